#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "rcising/error.hpp"
#include "rcising/graph.hpp"

using namespace rci;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an rci::Error");
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST_CASE("box and torus sizes") {
  const auto box = build_box(2, 3, false);
  CHECK(box.vertex_count == 9);
  CHECK(box.pairs.size() == 12);
  const auto torus = build_box(2, 3, true);
  CHECK(torus.vertex_count == 9);
  CHECK(torus.pairs.size() == 18);
  const auto cube = build_box(3, 4, false);
  CHECK(cube.vertex_count == 64);
  CHECK(cube.pairs.size() == 3 * 4 * 4 * 3);

  // Side-2 torus: both lattice bonds between a pair collapse onto one pair.
  const auto small = build_box(2, 2, true);
  CHECK(small.pairs.size() == 4);
  for (int m : small.bond_multiplicity) CHECK(m == 2);
}

TEST_CASE("tree ball") {
  const auto t = build_tree_ball(3, 2);
  CHECK(t.vertex_count == 1 + 3 + 6);
  CHECK(t.pairs.size() == 9);
  const auto d = family_distances(t, center_vertex(t));
  CHECK(*std::max_element(d.begin(), d.end()) == 2);
}

TEST_CASE("long-range chain couplings") {
  const auto c = build_long_range_chain(5, 2.0, 1.5);
  CHECK(c.graph.pairs.size() == 10);
  CHECK(c.coupling.at(VertexPair::of(0, 1)) == doctest::Approx(1.5));
  CHECK(c.coupling.at(VertexPair::of(1, 4)) == doctest::Approx(1.5 / 9.0));
  CHECK(code_of([] { build_long_range_chain(5, 1.0, 1.0); }) == ErrorCode::condition);
}

TEST_CASE("weighted graph lookups") {
  const WeightedGraph g(3, {{0, 1, 0.5}, {1, 2, 0.25}}, 2);
  CHECK(g.edge_count() == 2);
  CHECK(g.find_edge(1, 0).has_value());
  CHECK_FALSE(g.find_edge(0, 2).has_value());
  CHECK(g.coupling(0, 2) == 0.0);
  CHECK(g.row_sum(1) == doctest::Approx(0.75));
  CHECK(g.is_ghost(2));
  CHECK(g.is_ghost_edge(1));
  CHECK_FALSE(g.is_ghost_edge(0));
  CHECK(g.base_vertex_count() == 2);
  CHECK(g.connected());
  CHECK_FALSE(WeightedGraph(3, {{0, 1, 1.0}}).connected());
}

TEST_CASE("ghost coupling on a box counts missing neighbours") {
  const auto box = build_box(2, 3, false);
  const auto j = CouplingField::nearest_neighbor(box, 0.7);
  const auto ghost = ghost_augment(box, j, box.family, 1e-6);
  CHECK(ghost.ghost_coupling[static_cast<std::size_t>(vertex_at(box, {0, 0}))] == doctest::Approx(1.4));
  CHECK(ghost.ghost_coupling[static_cast<std::size_t>(vertex_at(box, {1, 0}))] == doctest::Approx(0.7));
  CHECK(ghost.ghost_coupling[static_cast<std::size_t>(vertex_at(box, {1, 1}))] == 0.0);
  const auto host = make_weighted(ghost);
  CHECK(host->vertex_count() == 10);
  CHECK(*host->ghost() == 9);
  // 4 corners + 4 edge midpoints carry ghost pairs.
  CHECK(host->edge_count() == 12 + 8);
  // Total ghost coupling: 4 (d = 2) bonds leave per boundary side.
  CHECK(host->row_sum(9) == doctest::Approx(0.7 * 12));
}

TEST_CASE("ghost coupling on a long-range chain matches zeta(2)") {
  const auto c = build_long_range_chain(3, 2.0, 1.0);
  const double tol = 1e-5;
  const auto ghost = ghost_augment(c.graph, c.coupling, c.graph.family, tol);
  const double zeta2 = std::numbers::pi * std::numbers::pi / 6.0;
  // Vertex 0: outside vertices at distances 1, 2, ... on the left and 3, 4, ... on the right.
  CHECK(std::abs(ghost.ghost_coupling[0] - (2.0 * zeta2 - 1.25)) <= tol);
  // Vertex 1: distances 2, 3, ... on both sides.
  CHECK(std::abs(ghost.ghost_coupling[1] - (2.0 * zeta2 - 2.0)) <= tol);
  CHECK(ghost.tail_error <= tol);
}

TEST_CASE("condition checks") {
  const auto box = build_box(2, 3, false);
  CHECK(validate_conditions(box, CouplingField::nearest_neighbor(box, 1.0)).all_pass());

  std::map<VertexPair, double> table{{VertexPair::of(0, 1), 1.0}, {VertexPair::of(1, 2), -0.5}};
  const auto g = build_table_graph(3, table);
  const auto report = validate_conditions(g, CouplingField::table(table));
  CHECK_FALSE(report.all_pass());
  std::set<std::string> failed;
  for (const auto& c : report.checks)
    if (!c.pass) failed.insert(c.condition);
  CHECK(failed.count("C1") == 1);
}

TEST_CASE("limits and bad arguments") {
  GraphLimits tiny;
  tiny.max_vertices = 10;
  CHECK(code_of([&] { build_box(2, 4, false, tiny); }) == ErrorCode::size);
  CHECK(code_of([] { family_from_string("hexagon"); }) != ErrorCode::size);
  const auto box = build_box(2, 3, false);
  CHECK(code_of([&] { vertex_at(box, {5, 5}); }) != ErrorCode::size);
}

TEST_CASE("centre and distances on a box") {
  const auto box = build_box(2, 5, false);
  const Vertex c = center_vertex(box);
  CHECK(c == vertex_at(box, {2, 2}));
  const auto d = family_distances(box, c);
  CHECK(d[static_cast<std::size_t>(vertex_at(box, {0, 0}))] == 4);
  CHECK(d[static_cast<std::size_t>(vertex_at(box, {2, 3}))] == 1);
}
