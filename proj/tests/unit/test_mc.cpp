#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>

#include "rcising/error.hpp"
#include "rcising/exact.hpp"
#include "rcising/mc.hpp"

using namespace rci;

namespace {

GraphPtr host(int n, std::vector<Edge> edges, std::optional<Vertex> ghost = std::nullopt) {
  return std::make_shared<const WeightedGraph>(n, std::move(edges), ghost);
}

std::string key(const WormState& s) {
  return std::to_string(s.tail) + "|" + std::to_string(s.head) + "|" + s.n.serialize();
}

// Largest violation of pi(a) P(a -> b) = pi(b) P(b -> a), relative to the
// larger side, over every state reachable with total multiplicity <= cap.
double detailed_balance_violation(const GraphPtr& g, double beta, int cap) {
  WormChain chain(g, beta);
  std::map<std::string, WormState> seen;
  std::deque<WormState> queue;
  WormState start{Current(g), 0, 0};
  seen.emplace(key(start), start);
  queue.push_back(start);
  double worst = 0.0;
  auto total = [](const Current& n) {
    std::uint64_t t = 0;
    for (auto m : n.multiplicities()) t += m;
    return t;
  };
  while (!queue.empty()) {
    const WormState a = queue.front();
    queue.pop_front();
    std::map<std::string, double> forward;
    std::map<std::string, WormState> targets;
    for (const auto& t : chain.transitions(a)) {
      forward[key(t.to)] += t.probability;
      targets.emplace(key(t.to), t.to);
    }
    for (const auto& [k, p_ab] : forward) {
      const WormState& b = targets.at(k);
      if (k == key(a) || total(b.n) > static_cast<std::uint64_t>(cap)) continue;
      double p_ba = 0.0;
      for (const auto& t : chain.transitions(b))
        if (key(t.to) == key(a)) p_ba += t.probability;
      const double lhs = std::exp(chain.log_target(a)) * p_ab;
      const double rhs = std::exp(chain.log_target(b)) * p_ba;
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(lhs, rhs));
      if (seen.emplace(k, b).second) queue.push_back(b);
    }
  }
  return worst;
}

McOptions options(std::uint64_t seed, std::int64_t sweeps) {
  McOptions o;
  o.seed = seed;
  o.chains = 4;
  o.sweeps = sweeps;
  return o;
}

}  // namespace

TEST_CASE("worm detailed balance on a pair and a triangle") {
  CHECK(detailed_balance_violation(host(2, {{0, 1, 0.7}}), 0.9, 8) <= 1e-12);
  CHECK(detailed_balance_violation(host(3, {{0, 1, 0.7}, {1, 2, 0.4}, {0, 2, 1.0}}), 0.6, 6) <= 1e-12);
}

TEST_CASE("worm transitions are a probability distribution") {
  const auto g = host(3, {{0, 1, 0.7}, {1, 2, 0.4}, {0, 2, 1.0}});
  WormChain chain(g, 0.8);
  CounterRng rng(3, 0);
  for (int i = 0; i < 200; ++i) {
    double total = 0.0;
    for (const auto& t : chain.transitions(chain.state())) total += t.probability;
    REQUIRE(total == doctest::Approx(1.0).epsilon(1e-12));
    chain.step(rng);
  }
}

TEST_CASE("samplers agree with the oracle on a 4-cycle") {
  const auto g = host(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 1.0}});
  const double beta = 0.5;
  const double exact = spin_oracle(*g, beta, Boundary::free, 0, 2);
  const auto pair = VertexPair::of(0, 2);
  const auto hb = find_estimate(sample_spins(g, beta, Boundary::free, options(1, 20000), {{pair}, {}, false, false})
                                    .estimates,
                                "corr:0:2");
  CHECK(std::abs(hb.mean - exact) <= 4.0 * hb.stderr_);
  const auto fk = find_estimate(sample_fk(g, beta, FkBoundary::free, options(2, 20000), {{pair}, {}, {}}).estimates,
                                "conn:0:2");
  CHECK(std::abs(fk.mean - exact) <= 4.0 * fk.stderr_);
  CurrentObservables obs;
  obs.two_point.push_back(pair);
  const auto worm = find_estimate(sample_current(g, beta, options(3, 50000), obs).estimates, "corr:0:2");
  CHECK(std::abs(worm.mean - exact) <= 4.0 * worm.stderr_);
}

TEST_CASE("plus boundary through the ghost") {
  const auto g = host(3, {{0, 1, 1.0}, {0, 2, 0.5}, {1, 2, 0.5}}, 2);
  const double beta = 0.7;
  const double exact = spin_oracle(*g, beta, Boundary::plus, 0, 1);
  const auto pair = VertexPair::of(0, 1);
  const auto hb = find_estimate(sample_spins(g, beta, Boundary::plus, options(4, 20000), {{pair}, {}, false, false})
                                    .estimates,
                                "corr:0:1");
  CHECK(std::abs(hb.mean - exact) <= 4.0 * hb.stderr_);
  const auto fk = sample_fk(g, beta, FkBoundary::wired, options(5, 20000), {{pair}, {0}, {}}).estimates;
  CHECK(std::abs(find_estimate(fk, "conn:0:1").mean - exact) <= 4.0 * find_estimate(fk, "conn:0:1").stderr_);
  const double marginal = fk_edge_marginal(*g, beta, FkBoundary::wired, 0);
  CHECK(std::abs(find_estimate(fk, "open:0").mean - marginal) <= 4.0 * find_estimate(fk, "open:0").stderr_);
  CHECK(std::abs(find_estimate(fk, "open_rb:0").mean - marginal) <= 4.0 * find_estimate(fk, "open_rb:0").stderr_);
  CHECK(find_estimate(fk, "open_rb:0").stderr_ < find_estimate(fk, "open:0").stderr_);
}

TEST_CASE("double current connection matches the squared correlation") {
  const auto g = host(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const auto ghost = host(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 0.5}}, 3);
  const double beta = 0.6;
  // Sourceless currents on trees have independent even multiplicities, so
  // 0 <-> 2 in n1 + n2 iff both pairs carry mass in n1 or n2.
  const double p = 1.0 - 1.0 / (std::cosh(beta) * std::cosh(beta));
  std::vector<std::pair<std::string, std::function<double(const Current&)>>> obs{
      {"conn", [](const Current& n) { return connected_within(n, 0, 2, full_mask(4)) ? 1.0 : 0.0; }}};
  const auto e = find_estimate(sample_double_current(g, ghost, beta, options(6, 40000), obs).estimates, "conn");
  CHECK(std::abs(e.mean - p * p) <= 4.0 * e.stderr_);
}

TEST_CASE("reproducible and independent of the worker count") {
  const auto g = host(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 1.0}});
  auto run = [&](int workers) {
    auto o = options(9, 2000);
    o.workers = workers;
    return find_estimate(sample_fk(g, 0.4, FkBoundary::free, o, {{VertexPair::of(0, 2)}, {}, {}}).estimates,
                         "conn:0:2");
  };
  const auto a = run(1);
  const auto b = run(1);
  const auto c = run(3);
  CHECK(a.mean == b.mean);
  CHECK(a.stderr_ == b.stderr_);
  CHECK(a.mean == c.mean);
}

TEST_CASE("beta = 0 gives zero correlation") {
  const auto g = host(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const auto fk = find_estimate(
      sample_fk(g, 0.0, FkBoundary::free, options(1, 500), {{VertexPair::of(0, 2)}, {}, {}}).estimates, "conn:0:2");
  CHECK(fk.mean == 0.0);
}

TEST_CASE("errors") {
  const auto split = host(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  try {
    WormChain chain(split, 0.5);
    FAIL("expected an ergodicity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ergodicity);
  }
  auto o = options(1, 100);
  o.thinning = 0;
  CHECK_THROWS_AS(sample_fk(split, 0.5, FkBoundary::free, o, {}), Error);
  CHECK(default_burn_in(1000, 0.5, 100000) == 500);
  CHECK(default_burn_in(10, 0.5, 100000) == 100);
  CHECK(default_burn_in(10, 0.5, 120) == 60);
}

TEST_CASE("binary series records") {
  const auto path = (std::filesystem::temp_directory_path() / "rci_series_test.bin").string();
  std::filesystem::remove(path);
  const auto g = host(2, {{0, 1, 1.0}});
  McOptions o;
  o.seed = 2;
  o.chains = 2;
  o.sweeps = 300;
  o.burn_in = 100;
  o.series_path = path;
  o.keep_runs = true;
  const auto r = sample_fk(g, 0.5, FkBoundary::free, o, {{VertexPair::of(0, 1)}, {0}, {}});
  // Three series (conn, open, open_rb) of 200 values per chain, 24 bytes per record.
  CHECK(std::filesystem::file_size(path) == 2u * 3u * 200u * 24u);
  REQUIRE(r.runs.size() == 2);
  CHECK(r.runs[1].chain_id == 1);
  std::FILE* f = std::fopen(path.c_str(), "rb");
  REQUIRE(f);
  unsigned char rec[24];
  REQUIRE(std::fread(rec, 1, 24, f) == 24);
  std::fclose(f);
  double value;
  std::memcpy(&value, rec + 16, 8);
  CHECK(value == r.runs[0].series[0].values[0]);
  std::filesystem::remove(path);
}
