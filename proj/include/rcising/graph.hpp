#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace rci {

using Vertex = std::int32_t;
using EdgeId = std::int32_t;

/// Unordered vertex pair, stored with u < v.
struct VertexPair {
  Vertex u = 0;
  Vertex v = 0;

  static VertexPair of(Vertex a, Vertex b) { return a < b ? VertexPair{a, b} : VertexPair{b, a}; }
  auto operator<=>(const VertexPair&) const = default;
};

struct Edge {
  Vertex u;
  Vertex v;
  double coupling;
};

struct Incidence {
  Vertex neighbor;
  EdgeId edge;
};

/// Dense-indexed graph carrying the positive couplings. Every kernel in the
/// library (currents, enumeration, samplers) runs on this representation.
/// When a ghost vertex is present it is always the last vertex.
class WeightedGraph {
 public:
  WeightedGraph(int vertex_count, std::vector<Edge> edges, std::optional<Vertex> ghost = std::nullopt);

  int vertex_count() const noexcept { return vertex_count_; }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(static_cast<std::size_t>(e)); }
  std::span<const Incidence> incident(Vertex v) const;

  std::optional<EdgeId> find_edge(Vertex a, Vertex b) const;
  double coupling(Vertex a, Vertex b) const;
  double row_sum(Vertex v) const { return row_sums_[static_cast<std::size_t>(v)]; }

  std::optional<Vertex> ghost() const noexcept { return ghost_; }
  bool is_ghost(Vertex v) const noexcept { return ghost_ && *ghost_ == v; }
  bool is_ghost_edge(EdgeId e) const;
  int base_vertex_count() const noexcept { return ghost_ ? vertex_count_ - 1 : vertex_count_; }

  /// Connectivity of the positive-coupling graph over all vertices.
  bool connected() const;

 private:
  static std::uint64_t key(Vertex a, Vertex b);

  int vertex_count_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Incidence> incidences_;
  std::vector<double> row_sums_;
  std::unordered_map<std::uint64_t, EdgeId> lookup_;
  std::optional<Vertex> ghost_;
};

using GraphPtr = std::shared_ptr<const WeightedGraph>;

enum class FamilyKind { box, torus, tree, long_range, table };

std::string to_string(FamilyKind kind);
FamilyKind family_from_string(const std::string& name);

struct FamilyDescriptor {
  FamilyKind kind = FamilyKind::box;
  int dimension = 0;
  int side = 0;
  int degree = 0;
  int depth = 0;
  int length = 0;
  double exponent = 0.0;
};

/// Finite truncation of a transitive graph. Pairs list the unordered
/// nearest-neighbour bonds (or, for long-range chains, every pair); a pair
/// that absorbed several lattice bonds (side-2 tori) records that count.
struct FiniteGraph {
  FamilyDescriptor family;
  int vertex_count = 0;
  std::vector<std::vector<int>> coordinates;
  std::vector<VertexPair> pairs;
  std::vector<int> bond_multiplicity;
};

struct GraphLimits {
  std::int64_t max_vertices = std::int64_t{1} << 22;
  std::int64_t max_pairs = std::int64_t{1} << 24;
};

class CouplingField {
 public:
  enum class Kind { nearest_neighbor, power_law, table };

  static CouplingField nearest_neighbor(const FiniteGraph& graph, double j0);
  static CouplingField power_law(const FiniteGraph& graph, double exponent, double j0);
  static CouplingField table(std::map<VertexPair, double> entries);

  Kind kind() const noexcept { return kind_; }
  double j0() const noexcept { return j0_; }
  double exponent() const noexcept { return exponent_; }
  double at(VertexPair pair) const;
  const std::map<VertexPair, double>& entries() const noexcept { return entries_; }

 private:
  Kind kind_ = Kind::table;
  double j0_ = 0.0;
  double exponent_ = 0.0;
  std::map<VertexPair, double> entries_;
};

FiniteGraph build_box(int dimension, int side, bool wrap, const GraphLimits& limits = {});
FiniteGraph build_tree_ball(int degree, int depth, const GraphLimits& limits = {});

struct LongRangeChain {
  FiniteGraph graph;
  CouplingField coupling;
};
LongRangeChain build_long_range_chain(int length, double exponent, double j0, const GraphLimits& limits = {});

/// Graph on `vertex_count` vertices whose pairs are the positive entries of
/// the table. The table may hold non-positive entries (validation reports them).
FiniteGraph build_table_graph(int vertex_count, const std::map<VertexPair, double>& table);

/// Finite box augmented with the ghost vertex. ghost_coupling[x] is the total
/// coupling from x to the ambient vertices outside the box.
struct GhostGraph {
  FiniteGraph base;
  CouplingField coupling;
  std::vector<double> ghost_coupling;
  double tail_error = 0.0;
  std::int64_t radius = 0;
};

GhostGraph ghost_augment(const FiniteGraph& graph, const CouplingField& coupling,
                         const FamilyDescriptor& ambient, double tail_tol,
                         std::int64_t radius_cap = 10'000'000);

GraphPtr make_weighted(const FiniteGraph& graph, const CouplingField& coupling);
/// Ghost vertex index is base.vertex_count; ghost pairs with zero coupling are omitted.
GraphPtr make_weighted(const GhostGraph& ghost);

struct ValidationReport {
  struct Check {
    std::string condition;
    bool pass = true;
    std::string witness;
  };
  std::vector<Check> checks;

  bool all_pass() const;
  nlohmann::json to_json() const;
};

ValidationReport validate_conditions(const FiniteGraph& graph, const CouplingField& coupling);

/// Graph distance from `from` in the ambient family (|i-j| on long-range chains).
std::vector<int> family_distances(const FiniteGraph& graph, Vertex from);
Vertex center_vertex(const FiniteGraph& graph);
/// Vertex whose coordinates are `coords`; throws if absent.
Vertex vertex_at(const FiniteGraph& graph, const std::vector<int>& coords);

}  // namespace rci
