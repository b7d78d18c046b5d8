#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rcising/analysis.hpp"
#include "rcising/error.hpp"
#include "rcising/exact.hpp"

using namespace rci;

namespace {

McOptions options(std::uint64_t seed, std::int64_t sweeps) {
  McOptions o;
  o.seed = seed;
  o.chains = 4;
  o.sweeps = sweeps;
  return o;
}

FamilySpec box2() {
  FamilySpec f;
  f.kind = FamilyKind::box;
  f.dimension = 2;
  return f;
}

FamilySpec tree3() {
  FamilySpec f;
  f.kind = FamilyKind::tree;
  f.degree = 3;
  return f;
}

nlohmann::json thresholds() {
  std::ifstream in(std::string(RCI_FIXTURES) + "/pilot_thresholds.json");
  REQUIRE(in);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("instances") {
  const auto inst = make_instance(box2(), 5);
  CHECK(inst.free_host->vertex_count() == 25);
  CHECK(inst.ghost_host->vertex_count() == 26);
  CHECK(inst.x == vertex_at(inst.graph, {2, 2}));
  CHECK(inst.y == vertex_at(inst.graph, {3, 2}));
  const auto tree = make_instance(tree3(), 2);
  CHECK(tree.x == center_vertex(tree.graph));
  CHECK(tree.free_host->find_edge(tree.x, tree.y).has_value());
  FamilySpec table;
  table.kind = FamilyKind::table;
  CHECK_THROWS_AS(make_instance(table, 3), Error);
}

TEST_CASE("gap at beta = 0 vanishes") {
  const auto scan = gap_scan(box2(), 0.0, {3, 4}, options(1, 400));
  REQUIRE(scan.rows.size() == 2);
  for (const auto& r : scan.rows) {
    CHECK(r.observable == "gap");
    CHECK(r.estimate.mean == 0.0);
  }
}

TEST_CASE("gap on a tiny box agrees with the oracle") {
  const auto inst = make_instance(box2(), 3);
  const double beta = 0.4;
  const double exact = spin_oracle(*inst.ghost_host, beta, Boundary::plus, inst.x, inst.y) -
                       spin_oracle(*inst.free_host, beta, Boundary::free, inst.x, inst.y);
  for (auto estimator : {GapEstimator::fk, GapEstimator::heat_bath}) {
    const auto scan = gap_scan(box2(), beta, {3}, options(21, 20000), estimator);
    const auto& e = find_row(scan, 3, "gap").estimate;
    CHECK(std::abs(e.mean - exact) <= 4.0 * e.stderr_);
  }
}

TEST_CASE("event frequency on a tiny ghost graph agrees with the exact probability") {
  const auto inst = make_instance(tree3(), 1);
  const double beta = 0.5;
  const auto exact = event_prob_exact(inst.ghost_host, beta, {}, event_A_f(*inst.ghost_host, inst.x, inst.y), 14);
  const auto scan = event_frequency_scan(tree3(), beta, 1, {}, options(5, 40000));
  const auto& e = find_row(scan, 1, "A_f").estimate;
  CHECK(std::abs(e.mean - exact.value) <= 3.0 * e.stderr_ + exact.error_bound);
}

TEST_CASE("event frequencies at beta = 0 vanish") {
  const auto scan = event_frequency_scan(box2(), 0.0, 4, {}, options(3, 500));
  CHECK(find_row(scan, 4, "A_f").estimate.mean == 0.0);
  CHECK(find_row(scan, 4, "A_proxy").estimate.mean == 0.0);
}

TEST_CASE("supercritical event frequencies clear the pilot floor") {
  const auto pilot = thresholds().at("event_positivity");
  const auto cfg = pilot.at("config");
  const int size = cfg.at("size");
  const auto scan = event_frequency_scan(box2(), cfg.at("beta"), size, {},
                                         options(cfg.at("seed").get<std::uint64_t>(), cfg.at("sweeps").get<int>() / 3));
  for (const char* name : {"A_f", "A_proxy"}) {
    const auto& e = find_row(scan, size, name).estimate;
    INFO(name << " " << e.mean << " +- " << e.stderr_);
    CHECK(e.mean - 3.0 * e.stderr_ > 0.0);
    CHECK(e.mean >= pilot.at("floor").at(name).get<double>());
  }
}

TEST_CASE("flow rows") {
  const auto scan = flow_scan(box2(), 0.5, 6, {1, 2}, -1, options(2, 1000));
  CHECK(find_row(scan, 6, "flow_ge2:d=1").estimate.n_samples > 0);
  CHECK(find_row(scan, 6, "flow_ge2:d=2").estimate.mean >= 0.0);
  CHECK(find_row(scan, 6, "flow_boundary_ge3:m=1").estimate.mean <= 1.0);
  CHECK(scan.metadata.at("m_radius") == 1);
}

TEST_CASE("fk uniqueness rows and beta = 0") {
  const auto scan = fk_uniqueness_scan(box2(), {0.0}, {4}, options(4, 400));
  CHECK(scan.rows.size() == 9);
  CHECK(find_row(scan, 4, "open_diff", 0.0).estimate.mean == 0.0);
  CHECK(find_row(scan, 4, "conn_diff", 0.0).estimate.mean == 0.0);
  CHECK(find_row(scan, 4, "open_rb_diff", 0.0).estimate.mean == 0.0);
}

TEST_CASE("magnetization curve") {
  const auto scan = magnetization_curve(box2(), {0.0, 0.5}, 3, options(6, 2000));
  CHECK(find_row(scan, 3, "magnetization", 0.0).estimate.mean == 0.0);
  const auto inst = make_instance(box2(), 3);
  const double exact = spin_magnetization(*inst.ghost_host, 0.5, Boundary::plus, inst.x);
  const auto& m = find_row(scan, 3, "magnetization", 0.5).estimate;
  CHECK(std::abs(m.mean - exact) <= 4.0 * m.stderr_);
  CHECK(find_row(scan, 3, "dm_dbeta", 0.25).estimate.mean == doctest::Approx(m.mean / 0.5));
}

TEST_CASE("ends proxy on a path") {
  std::vector<Edge> edges;
  for (int i = 0; i < 6; ++i) edges.push_back({i, i + 1, 1.0});
  const auto g = std::make_shared<const WeightedGraph>(7, edges);
  std::vector<int> dist;
  for (int v = 0; v < 7; ++v) dist.push_back(std::abs(v - 3));
  Current full(g);
  for (EdgeId e = 0; e < 6; ++e) full.set(e, 1);
  CHECK(ends_proxy(full, dist, 0, 3) == 2);
  CHECK(ends_proxy(full, dist, 1, 3) == 2);
  CHECK(ends_proxy(full, dist, 3, 3) == 0);
  Current half(g);
  for (EdgeId e = 3; e < 6; ++e) half.set(e, 2);
  CHECK(ends_proxy(half, dist, 0, 3) == 1);
  CHECK(ends_proxy(Current(g), dist, 0, 3) == 0);
}

TEST_CASE("ends histogram sums to one") {
  const auto scan = ends_scan(box2(), 0.5, 5, 0, 2, options(8, 1000));
  // Chains are combined per row with inverse-variance weights, so the rows
  // only add up to one within their errors.
  double total = 0.0;
  double spread = 0.0;
  for (const auto& r : scan.rows) {
    total += r.estimate.mean;
    spread += r.estimate.stderr_;
  }
  CHECK(scan.rows.size() == 6);
  CHECK(std::abs(total - 1.0) <= 3.0 * spread);
}

TEST_CASE("csv output is deterministic") {
  const auto a = to_csv(gap_scan(box2(), 0.5, {3, 4}, options(3, 500)));
  const auto b = to_csv(gap_scan(box2(), 0.5, {3, 4}, options(3, 500)));
  CHECK(a == b);
  std::istringstream in(a);
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "scan_id,family,dimension_or_degree,size,beta,observable,mean,stderr,n_samples,seed");
  std::getline(in, row);
  CHECK(row.rfind("gap_scan,box,2,3,0.5,gap,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') == 9);
  const auto c = to_csv(gap_scan(box2(), 0.5, {3, 4}, options(4, 500)));
  CHECK(a != c);
}

TEST_CASE("cell seeds") {
  CHECK(cell_seed(1, "gap_scan", 0) == cell_seed(1, "gap_scan", 0));
  CHECK(cell_seed(1, "gap_scan", 0) != cell_seed(1, "gap_scan", 1));
  CHECK(cell_seed(1, "gap_scan", 0) != cell_seed(1, "flow_scan", 0));
}
