#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rcising/graph.hpp"

namespace rci {

/// Sorted list of source vertices.
using SourceSet = std::vector<Vertex>;

/// Membership mask over the host's vertices.
using VertexMask = std::vector<char>;

VertexMask mask_of(int vertex_count, std::span<const Vertex> vertices);
VertexMask full_mask(int vertex_count);
/// Every vertex except the host's ghost.
VertexMask base_mask(const WeightedGraph& host);

/// Current on a host graph: one non-negative multiplicity per positive-coupling
/// pair, indexed by the host's edge ids. Pairs with zero coupling have no slot
/// and therefore cannot carry a multiplicity.
class Current {
 public:
  explicit Current(GraphPtr host);

  /// Builds a current from (pair, multiplicity) entries. A pair with zero
  /// coupling on the host is a domain error.
  static Current from_entries(GraphPtr host, std::span<const std::pair<VertexPair, std::uint32_t>> entries);

  const WeightedGraph& host() const noexcept { return *host_; }
  const GraphPtr& host_ptr() const noexcept { return host_; }

  std::uint32_t at(EdgeId e) const { return counts_[static_cast<std::size_t>(e)]; }
  std::uint32_t at(Vertex a, Vertex b) const;
  void set(EdgeId e, std::uint32_t value) { counts_[static_cast<std::size_t>(e)] = value; }
  void set(Vertex a, Vertex b, std::uint32_t value);

  std::span<const std::uint32_t> multiplicities() const noexcept { return counts_; }
  std::span<std::uint32_t> multiplicities() noexcept { return counts_; }
  bool is_zero() const;

  /// One "u v multiplicity" line per non-zero pair, sorted by (u, v).
  std::string serialize() const;
  static Current parse(GraphPtr host, std::string_view text);

  friend bool operator==(const Current& a, const Current& b) {
    return a.host_ == b.host_ && a.counts_ == b.counts_;
  }

 private:
  GraphPtr host_;
  std::vector<std::uint32_t> counts_;
};

struct ClusterPartition {
  std::vector<Vertex> representative;  // smallest vertex of each cluster
  std::vector<int> size;               // indexed by vertex, meaningful at representatives

  bool same(Vertex a, Vertex b) const {
    return representative[static_cast<std::size_t>(a)] == representative[static_cast<std::size_t>(b)];
  }
  int size_of(Vertex v) const { return size[static_cast<std::size_t>(representative[static_cast<std::size_t>(v)])]; }
  std::vector<Vertex> members(Vertex v) const;
};

SourceSet sources(const Current& n);

/// Sum over pairs of n*log(beta*J) - log(n!). Returns -infinity when the weight
/// vanishes (beta = 0 with a positive multiplicity).
double log_weight(const Current& n, double beta);

/// n with the multiplicity of `pair` set to zero.
Current restrict(const Current& n, VertexPair pair);
Current add(const Current& a, const Current& b);
/// Re-indexes `n` onto a host that contains every pair of n's host with the same coupling.
Current embed(const Current& n, GraphPtr host);

ClusterPartition clusters(const Current& n);
bool connected_within(const Current& n, Vertex x, Vertex y, const VertexMask& region);
/// Connection of x to any vertex of `targets` through positive-multiplicity pairs.
bool connected_to_set(const Current& n, Vertex x, const VertexMask& targets);

/// Maximal number of edge-disjoint x-y paths in the multigraph of n, using
/// only vertices of `region`.
int flow(const Current& n, Vertex x, Vertex y, const VertexMask& region);
/// Maximal number of edge-disjoint paths from x to the set `boundary`.
int flow_to_boundary(const Current& n, Vertex x, const VertexMask& boundary);

/// n_xy = 1, x and y both reach the ghost in n_[xy], and x does not reach y
/// inside `region` in n_[xy]. The host must carry a ghost vertex.
bool in_event_A_f(const Current& n, Vertex x, Vertex y, const VertexMask& region);

/// Finite-volume stand-in for the infinite-volume event: the connections to
/// infinity become connections to `outer_boundary`.
bool in_event_A_inf_proxy(const Current& n, Vertex x, Vertex y, const VertexMask& inner_region,
                          const VertexMask& outer_boundary);

std::vector<VertexPair> U_set(const Current& n, std::span<const VertexPair> candidates,
                              const VertexMask& inner_region, const VertexMask& outer_boundary);

Current increment(const Current& n, VertexPair pair);
Current decrement_two(const Current& n, VertexPair first, VertexPair second);

bool is_admissible(const ClusterPartition& partition, Vertex x, Vertex y, Vertex x_prime, Vertex y_prime);

/// Number of currents obtained by replacing each path multiplicity with a
/// non-zero value of opposite parity not exceeding `cap`.
std::int64_t parity_flip_count(const Current& n, std::span<const Vertex> path, int cap);

/// Product over path pairs of max{cosh t / sinh t, sinh t / (cosh t - 1)}, t = beta*J.
double K_constant(std::span<const Vertex> path, double beta, const WeightedGraph& host);

/// Edge ids along a self-avoiding path of positive couplings; domain error otherwise.
std::vector<EdgeId> path_edges(std::span<const Vertex> path, const WeightedGraph& host);

}  // namespace rci
