#include <doctest.h>

#include <cmath>
#include <memory>

#include "rcising/error.hpp"
#include "rcising/exact.hpp"
#include "rcising/rng.hpp"

using namespace rci;

namespace {

GraphPtr host(int n, std::vector<Edge> edges, std::optional<Vertex> ghost = std::nullopt) {
  return std::make_shared<const WeightedGraph>(n, std::move(edges), ghost);
}

// Brute-force <s_x s_y> with the ghost spin pinned to `tau` (0: ghost pairs dropped).
double brute_correlation(const WeightedGraph& g, double beta, int tau, Vertex x, Vertex y) {
  const int n = g.base_vertex_count();
  double z = 0.0;
  double num = 0.0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    auto spin = [&](Vertex v) {
      if (g.is_ghost(v)) return tau;
      return (mask >> v) & 1 ? 1 : -1;
    };
    double h = 0.0;
    for (const auto& e : g.edges()) h += e.coupling * spin(e.u) * spin(e.v);
    const double w = std::exp(beta * h);
    z += w;
    num += w * spin(x) * spin(y);
  }
  return num / z;
}

GraphPtr random_graph(std::uint64_t seed, bool with_ghost) {
  CounterRng rng(seed, 0);
  std::vector<Edge> edges;
  for (int u = 0; u < 4; ++u)
    for (int v = u + 1; v < 4; ++v) edges.push_back({u, v, 1.0 - rng.uniform()});
  if (!with_ghost) return host(4, edges);
  for (int u = 0; u < 4; ++u) edges.push_back({u, 4, 0.5 * (1.0 - rng.uniform())});
  return host(5, edges, 4);
}

}  // namespace

TEST_CASE("single pair two-point function is tanh") {
  const auto g = host(2, {{0, 1, 0.8}});
  for (double beta : {0.1, 0.5, 1.0}) {
    const auto r = two_point(g, beta, 0, 1, 20);
    CHECK(std::abs(r.value - std::tanh(beta * 0.8)) <= 1e-14);
    const auto coarse = two_point(g, beta, 0, 1, 4);
    CHECK(std::abs(coarse.value - std::tanh(beta * 0.8)) <= coarse.error_bound);
  }
}

TEST_CASE("sourceless sum of a single pair is a truncated cosh") {
  const auto g = host(2, {{0, 1, 1.0}});
  const double t = 0.9;
  const auto s = sum_currents(g, t, {}, 6);
  double expect = 0.0;
  double term = 1.0;
  for (int k = 0; k <= 6; ++k) {
    if (k > 0) term *= t / k;
    if (k % 2 == 0) expect += term;
  }
  CHECK(s.log_value == doctest::Approx(std::log(expect)).epsilon(1e-14));
  CHECK(s.per_pair_cap == 6);
  CHECK(poisson_tail_bound(*g, t, 6) >= std::cosh(t) - expect);
}

TEST_CASE("path correlations factorize") {
  const auto g = host(3, {{0, 1, 0.6}, {1, 2, 1.1}});
  const double beta = 0.7;
  const double expect = std::tanh(beta * 0.6) * std::tanh(beta * 1.1);
  CHECK(spin_oracle(*g, beta, Boundary::free, 0, 2) == doctest::Approx(expect).epsilon(1e-13));
  const auto r = two_point(g, beta, 0, 2, 14);
  CHECK(std::abs(r.value - expect) <= r.error_bound + 1e-15);
}

TEST_CASE("oracles agree with brute force on random instances") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto free_host = random_graph(seed, false);
    const auto ghost_host = random_graph(seed, true);
    const double beta = 0.6;
    CHECK(spin_oracle(*free_host, beta, Boundary::free, 0, 3) ==
          doctest::Approx(brute_correlation(*free_host, beta, 0, 0, 3)).epsilon(1e-12));
    CHECK(spin_oracle(*ghost_host, beta, Boundary::plus, 1, 2) ==
          doctest::Approx(brute_correlation(*ghost_host, beta, 1, 1, 2)).epsilon(1e-12));
    CHECK(spin_oracle(*ghost_host, beta, Boundary::minus, 1, 2) ==
          doctest::Approx(brute_correlation(*ghost_host, beta, -1, 1, 2)).epsilon(1e-12));
    CHECK(spin_magnetization(*ghost_host, beta, Boundary::plus, 0) ==
          doctest::Approx(brute_correlation(*ghost_host, beta, 1, 0, 4)).epsilon(1e-12));

    const auto tp = two_point_free(free_host, beta, 0, 3, 12);
    CHECK(std::abs(tp.value - brute_correlation(*free_host, beta, 0, 0, 3)) <= tp.error_bound + 1e-14);
    const auto pp = two_point_plus(ghost_host, beta, 0, 3, 10);
    CHECK(std::abs(pp.value - brute_correlation(*ghost_host, beta, 1, 0, 3)) <= pp.error_bound + 1e-14);
  }
}

TEST_CASE("FK coupling and edge marginals") {
  const auto g = random_graph(7, true);
  const double beta = 0.9;
  CHECK(fk_oracle(*g, beta, FkBoundary::free, 0, 2) ==
        doctest::Approx(brute_correlation(*g, beta, 0, 0, 2)).epsilon(1e-12));
  CHECK(fk_oracle(*g, beta, FkBoundary::wired, 0, 2) ==
        doctest::Approx(brute_correlation(*g, beta, 1, 0, 2)).epsilon(1e-12));
  // Edwards-Sokal: P(open e) = p (1 + <s_u s_v>) / 2.
  const EdgeId e = *g->find_edge(1, 3);
  const double p = -std::expm1(-2.0 * beta * g->edge(e).coupling);
  CHECK(fk_edge_marginal(*g, beta, FkBoundary::wired, e) ==
        doctest::Approx(0.5 * p * (1.0 + brute_correlation(*g, beta, 1, 1, 3))).epsilon(1e-12));
  CHECK(fk_edge_marginal(*g, beta, FkBoundary::free, e) ==
        doctest::Approx(0.5 * p * (1.0 + brute_correlation(*g, beta, 0, 1, 3))).epsilon(1e-12));
}

TEST_CASE("beta = 0") {
  const auto g = random_graph(3, true);
  CHECK(spin_oracle(*g, 0.0, Boundary::plus, 0, 1) == 0.0);
  CHECK(two_point(g, 0.0, 0, 1, 6).value == 0.0);
  CHECK(fk_oracle(*g, 0.0, FkBoundary::wired, 0, 1) == 0.0);
  CHECK_THROWS_AS(two_point(g, -0.1, 0, 1, 6), Error);
}

TEST_CASE("event probabilities") {
  const auto g = host(3, {{0, 1, 1.0}, {1, 2, 0.5}});
  // Sources {0, 2} force a path through 1.
  const auto conn = event_prob_exact(g, 0.8, {0, 2}, event_connected(0, 2), 8);
  CHECK(conn.value == doctest::Approx(1.0).epsilon(1e-15));
  // Sourceless on a tree: every multiplicity is even, so 0 <-> 1 iff n_01 >= 2.
  const double t = 0.8;
  const auto p = event_prob_exact(g, t, {}, event_connected(0, 1), 16);
  CHECK(p.value == doctest::Approx(1.0 - 1.0 / std::cosh(t)).epsilon(1e-10));
  // flow(0, 1) >= 2 under sources {0, 1}: odd n_01 at least 3.
  const auto f = event_prob_exact(g, t, {0, 1}, event_flow_at_least(0, 1, 2), 16);
  CHECK(f.value == doctest::Approx(1.0 - t / std::sinh(t)).epsilon(1e-10));
}

TEST_CASE("event A_f matches brute force over currents") {
  // x = 0, y = 1, ghost = 2 on a triangle: A_f needs n_01 = 1 and both
  // endpoints tied to the ghost, i.e. n_02 and n_12 odd.
  const double a = 0.7, b = 0.4, c = 0.9;
  const auto g = host(3, {{0, 1, a}, {0, 2, b}, {1, 2, c}}, 2);
  const double beta = 1.0;
  const auto p = event_prob_exact(g, beta, {}, event_A_f(*g, 0, 1), 18);
  const double z = std::cosh(a) * std::cosh(b) * std::cosh(c) + std::sinh(a) * std::sinh(b) * std::sinh(c);
  CHECK(p.value == doctest::Approx(a * std::sinh(b) * std::sinh(c) / z).epsilon(1e-10));
}

TEST_CASE("switching identity on a square") {
  const auto g = host(4, {{0, 1, 0.5}, {1, 2, 0.9}, {2, 3, 0.3}, {0, 3, 0.7}, {0, 2, 0.2}});
  const auto inner = mask_of(4, std::vector<Vertex>{0, 1, 2});
  SwitchingVerifier v(g, inner, 4);
  for (auto f : {SwitchingFunctional::constant, SwitchingFunctional::connection, SwitchingFunctional::cluster_size}) {
    const auto r = v.evaluate(0.8, 0, 1, {}, f);
    CHECK(r.max_discrepancy <= 1e-12);
    CHECK(r.blocks > 0);
    const auto with_a = v.evaluate(0.8, 0, 2, {1, 3}, f);
    CHECK(with_a.max_discrepancy <= 1e-12);
  }
  const std::vector<double> other{0.1, 0.2, 0.3, 0.4, 0.5};
  CHECK(v.evaluate(1.0, other, 0, 1, {}, SwitchingFunctional::connection).max_discrepancy <= 1e-12);
}

TEST_CASE("double current identity is the square of the two-point function") {
  const auto g = host(2, {{0, 1, 0.6}});
  const auto r = verify_double_current_identity(g, 1.0, 0, 1, 12);
  CHECK(r.discrepancy <= 1e-12);
  CHECK(std::abs(r.lhs - std::pow(std::tanh(0.6), 2)) <= r.tail_bound + 1e-14);
  const auto tri = host(3, {{0, 1, 0.6}, {1, 2, 0.8}, {0, 2, 0.3}});
  CHECK(verify_double_current_identity(tri, 1.0, 0, 2, 8).discrepancy <= 1e-12);
}

TEST_CASE("increment identity and parity bound") {
  const auto g = host(3, {{0, 1, 0.6}, {1, 2, 0.8}, {0, 2, 0.3}});
  CHECK(verify_increment_identity(g, 0.9, 4).discrepancy <= 1e-12);
  const std::vector<Vertex> path{0, 1};
  const auto r = verify_parity_bound(g, 0.9, 0, 1, path, mask_of(3, std::vector<Vertex>{2}), 12);
  CHECK(r.holds);
  CHECK(r.slack >= -1e-10);
  CHECK(r.k == doctest::Approx(1.0 / std::tanh(0.9 * 0.6 / 2)));
}

TEST_CASE("enumeration budget") {
  const auto g = random_graph(2, false);
  EnumerationLimits tiny;
  tiny.budget = 10;
  try {
    sum_currents(g, 0.5, {}, 10, nullptr, tiny);
    FAIL("expected a size error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::size);
    CHECK(std::string(e.what()).find("budget") != std::string::npos);
  }
}
