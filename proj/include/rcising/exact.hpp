#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "rcising/current.hpp"
#include "rcising/graph.hpp"
#include "rcising/model.hpp"

namespace rci {

/// Limits shared by every exact routine. `budget` caps the number of leaves
/// an enumeration visits (classes of currents, spin or bond configurations).
struct EnumerationLimits {
  std::uint64_t budget = std::uint64_t{1} << 32;
  int workers = 1;
};

/// log of a truncated sum of current weights. tail_bound bounds the excluded
/// mass relative to the untruncated sourceless sum on the same host.
struct TruncatedSum {
  double log_value = 0.0;
  int per_pair_cap = 0;
  double tail_bound = 0.0;
  std::uint64_t leaves = 0;
};

struct BoundedValue {
  double value = 0.0;
  double error_bound = 0.0;
};

/// Event on currents. The predicate only sees a class representative, so it
/// must be constant on the classes implied by the resolutions: with resolution
/// r >= 0 a pair's multiplicities are grouped as {0}, {1}, ..., {r}, larger
/// even values, larger odd values; r = -1 keeps every value distinct.
/// Connectivity-type events need r = 0; "n_e = 1" needs r = 1 on e.
struct EventPredicate {
  std::function<bool(const Current&)> test;
  int base_resolution = 0;
  std::vector<std::pair<EdgeId, int>> watched;

  static EventPredicate always();
};

/// Sum of weights over currents with the given sources and every multiplicity
/// at most `cap`, optionally restricted to an event.
TruncatedSum sum_currents(const GraphPtr& host, double beta, const SourceSet& sources, int cap,
                          const EventPredicate* filter = nullptr, const EnumerationLimits& limits = {});

/// sum_{k>cap} t^k/k! summed over pairs, bounded by t^{cap+1}/(cap+1)! e^t.
double poisson_tail_bound(const WeightedGraph& host, double beta, int cap);

/// Ratio of sourced to sourceless truncated sums; the host may carry a ghost.
BoundedValue two_point(const GraphPtr& host, double beta, Vertex x, Vertex y, int cap,
                       const EnumerationLimits& limits = {});
BoundedValue two_point_free(const GraphPtr& host, double beta, Vertex x, Vertex y, int cap,
                            const EnumerationLimits& limits = {});
/// The host must carry a ghost vertex.
BoundedValue two_point_plus(const GraphPtr& ghost_host, double beta, Vertex x, Vertex y, int cap,
                            const EnumerationLimits& limits = {});

/// Boltzmann averages by full spin enumeration over the non-ghost vertices.
double spin_oracle(const WeightedGraph& host, double beta, Boundary boundary, Vertex x, Vertex y,
                   const EnumerationLimits& limits = {});
double spin_magnetization(const WeightedGraph& host, double beta, Boundary boundary, Vertex x,
                          const EnumerationLimits& limits = {});

/// FK connection probability phi[x <-> y] by bond enumeration. With wired
/// boundary the ghost pairs are bonds and the ghost's cluster carries no factor 2.
double fk_oracle(const WeightedGraph& host, double beta, FkBoundary boundary, Vertex x, Vertex y,
                 const EnumerationLimits& limits = {});
double fk_edge_marginal(const WeightedGraph& host, double beta, FkBoundary boundary, EdgeId e,
                        const EnumerationLimits& limits = {});

/// Probability of an event under the truncated measure with the given sources.
BoundedValue event_prob_exact(const GraphPtr& host, double beta, const SourceSet& sources,
                              const EventPredicate& event, int cap, const EnumerationLimits& limits = {});

/// Event n_xy = 1, x and y connected to the ghost in n_[xy], not connected
/// inside `region` (non-ghost vertices by default).
EventPredicate event_A_f(const WeightedGraph& host, Vertex x, Vertex y, VertexMask region = {});
EventPredicate event_connected(Vertex x, Vertex y);
EventPredicate event_flow_at_least(Vertex x, Vertex y, int k);

enum class SwitchingFunctional { constant, connection, cluster_size };
std::string to_string(SwitchingFunctional f);

struct SwitchingResult {
  double max_discrepancy = 0.0;
  double lhs_total = 0.0;
  double rhs_total = 0.0;
  std::uint64_t blocks = 0;
};

/// Both sides of the switching identity restricted to each block m = n1 + n2
/// with m_e <= block_cap. Inner volume Λ1 is the induced subgraph on
/// `inner`; the decomposition counts are integer and computed once.
class SwitchingVerifier {
 public:
  SwitchingVerifier(GraphPtr outer, VertexMask inner, int block_cap, const EnumerationLimits& limits = {});

  SwitchingResult evaluate(double beta, Vertex x, Vertex y, const SourceSet& a, SwitchingFunctional f) const;
  /// Same, with the outer couplings replaced (one per edge id). The block
  /// tables only depend on the pair set, so one verifier serves many draws.
  SwitchingResult evaluate(double beta, std::span<const double> couplings, Vertex x, Vertex y, const SourceSet& a,
                           SwitchingFunctional f) const;

  const WeightedGraph& outer() const { return *outer_; }
  const VertexMask& inner() const { return inner_; }

 private:
  GraphPtr outer_;
  VertexMask inner_;
  int block_cap_;
  int vertex_count_ = 0;
  std::uint64_t block_count_ = 0;
  std::vector<std::uint8_t> m_;           // block-major multiplicities
  std::vector<std::uint32_t> boundary_;   // source mask of each block
  std::vector<std::uint8_t> inner_comp_;  // component label per vertex, inner pairs only
  std::vector<std::uint8_t> full_size_;   // cluster size per vertex, all pairs
  // counts_[block * 2^V + mask]: sum over n1 <= m on inner pairs with source
  // mask `mask` of prod_e C(m_e, n1_e).
  std::vector<std::uint64_t> counts_;
  std::vector<std::vector<std::uint32_t>> by_boundary_;
  Vertex functional_u_ = 0;
  Vertex functional_v_ = 0;
};

SwitchingResult verify_switching(const GraphPtr& outer, const VertexMask& inner, double beta, Vertex x, Vertex y,
                                 const SourceSet& a, SwitchingFunctional f, int block_cap,
                                 const EnumerationLimits& limits = {});

/// Checks J2 restricted to the image of `embedding` equals J1, then verifies
/// on the outer host. embedding[v] is the outer vertex of inner vertex v.
SwitchingResult verify_switching(const WeightedGraph& inner_host, const GraphPtr& outer,
                                 std::span<const Vertex> embedding, double beta, Vertex x, Vertex y,
                                 const SourceSet& a, SwitchingFunctional f, int block_cap,
                                 const EnumerationLimits& limits = {});

struct IdentityCheck {
  double discrepancy = 0.0;
  double tail_bound = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Double sum with both sources {x, y} against the double sourceless sum
/// weighted by x <-> y in n1 + n2, both normalized by the double sourceless
/// sum. Truncation keeps n1 + n2 <= cap on every pair, so the two sides agree
/// blockwise; tail_bound bounds the distance of each side to its untruncated value.
IdentityCheck verify_double_current_identity(const GraphPtr& host, double beta, Vertex x, Vertex y, int cap,
                                             const EnumerationLimits& limits = {});

/// Max relative error of w(n')/w(n) = beta J/(n_xy + 1) over all currents with
/// multiplicities below `cap` and every pair (or only `pair` when given).
IdentityCheck verify_increment_identity(const GraphPtr& host, double beta, int cap,
                                        const VertexPair* pair = nullptr, const EnumerationLimits& limits = {});

struct ParityBoundResult {
  bool holds = false;
  double slack = 0.0;  // (K*rhs - lhs) / Z_emptyset
  double lhs = 0.0;    // sums relative to Z_emptyset
  double rhs = 0.0;
  double k = 0.0;
  double tail_bound = 0.0;
};

/// sum_{dn={x,y}} w 1[x <-> boundary] <= K sum_{dn=0} w 1[x <-> boundary].
ParityBoundResult verify_parity_bound(const GraphPtr& host, double beta, Vertex x, Vertex y,
                                      std::span<const Vertex> path, const VertexMask& boundary, int cap,
                                      const EnumerationLimits& limits = {});

}  // namespace rci
