#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rcising/current.hpp"
#include "rcising/graph.hpp"
#include "rcising/model.hpp"
#include "rcising/rng.hpp"

namespace rci {

struct ChainConfig {
  std::uint64_t seed = 1;
  int chain_id = 0;
  std::int64_t sweeps = 10'000;  // total, burn-in included
  std::int64_t burn_in = 1'000;
  std::int64_t thinning = 1;

  void validate() const;
  std::int64_t recorded_sweeps() const { return (sweeps - burn_in) / thinning; }
};

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::int64_t n_samples = 0;
  int n_batches = 0;
  std::uint64_t seed = 0;
  int chains = 1;
};

/// Batch means with clamp(floor(sqrt n), 8, 64) equal batches; trailing
/// samples that do not fill a batch are dropped. Needs at least 64 samples.
Estimate batch_means(const std::vector<double>& samples);
/// sum(num)/sum(den) with the error taken from per-batch ratios.
Estimate ratio_batch_means(const std::vector<double>& num, const std::vector<double>& den);
/// Inverse-variance weighting; plain averaging when some chain reports a zero
/// standard error.
Estimate combine_chains(const std::vector<Estimate>& per_chain);

struct NamedEstimate {
  std::string name;
  Estimate estimate;
};

const Estimate& find_estimate(const std::vector<NamedEstimate>& estimates, const std::string& name);

/// Per-chain observable series. A ratio observable stores its denominator.
struct ObservableSeries {
  std::string name;
  std::vector<double> values;
  std::vector<double> denominators;
};

struct ChainRun {
  int chain_id = 0;
  std::vector<ObservableSeries> series;
};

struct McOptions {
  std::uint64_t seed = 1;
  int chains = 4;
  std::int64_t sweeps = 10'000;
  std::int64_t burn_in = -1;  // negative: default_burn_in
  std::int64_t thinning = 1;
  int workers = 1;
  std::string series_path;  // append binary records when non-empty
  bool keep_runs = false;   // retain raw per-chain series in the result
};

/// max(100, ceil(vertex_count * beta)), at most half the sweeps.
std::int64_t default_burn_in(int vertex_count, double beta, std::int64_t sweeps);

struct McResult {
  std::vector<NamedEstimate> estimates;
  std::vector<ChainRun> runs;  // only with keep_runs
  std::int64_t burn_in = 0;
};

/// Record layout: chain_id u32, step u64, observable_id u32, value f64, little-endian.
void append_series(const std::string& path, const std::vector<ChainRun>& runs);

struct SpinObservables {
  std::vector<VertexPair> correlations;  // "corr:x:y"
  std::vector<Vertex> sites;             // "sigma:x"
  bool magnetization = true;             // "magnetization", per vertex
  bool energy = true;                    // "energy", per vertex
};

/// Single-site heat-bath sweeps; the ghost pairs act as a field of sign tau.
McResult sample_spins(const GraphPtr& host, double beta, Boundary boundary, const McOptions& options,
                      const SpinObservables& observables);

struct FkObservables {
  std::vector<VertexPair> connections;  // "conn:x:y" (wired: through the ghost as well)
  std::vector<EdgeId> edges;            // "open:e", plus "open_rb:e" = p_e (1 + 1[u<->v]) / 2
  std::vector<VertexPair> spin_correlations;  // "corr:x:y" from the spin half of the update
};

/// Swendsen-Wang: bonds on agreeing pairs with probability 1 - exp(-2 beta J),
/// then uniform cluster signs, clusters touching the ghost pinned to +.
McResult sample_fk(const GraphPtr& host, double beta, FkBoundary boundary, const McOptions& options,
                   const FkObservables& observables);

/// Worm state: current with sources {tail, head} (empty when they coincide).
struct WormState {
  Current n;
  Vertex tail = 0;
  Vertex head = 0;
};

/// Worm dynamics with target weight w(n) on states with dn = {tail, head}.
/// With probability p_jump the worm is relocated uniformly when closed;
/// otherwise the head crosses a pair chosen with probability J/R(head) and
/// raises or lowers its multiplicity with probability 1/2 each.
class WormChain {
 public:
  WormChain(GraphPtr host, double beta, double p_jump = 0.25);

  struct Move {
    enum Kind { jump, raise, lower } kind;
    EdgeId edge = -1;
    Vertex target = 0;
  };
  struct Transition {
    WormState to;
    double probability;
  };

  void step(CounterRng& rng);
  std::vector<Transition> transitions(const WormState& from) const;
  double log_target(const WormState& s) const;

  const WormState& state() const { return state_; }
  void set_state(WormState s);
  bool closed() const { return state_.tail == state_.head; }
  const WeightedGraph& host() const { return *host_; }

 private:
  double proposal(const WormState& s, const Move& m) const;
  double acceptance(const WormState& s, const Move& m) const;
  void apply(WormState& s, const Move& m) const;

  GraphPtr host_;
  double beta_;
  double p_jump_;
  std::vector<std::vector<double>> cumulative_;  // per vertex, cumulative J over incidences
  WormState state_;
};

struct CurrentObservables {
  std::vector<VertexPair> two_point;  // "corr:x:y" from worm visit counts
  /// Functionals of the closed-worm current, recorded on a thinned trace of
  /// the closed states.
  std::vector<std::pair<std::string, std::function<double(const Current&)>>> sector;
  /// Raw access to every recorded closed current (chain id, current).
  std::function<void(int, const Current&)> sink;
};

McResult sample_current(const GraphPtr& host, double beta, const McOptions& options,
                        const CurrentObservables& observables);

/// Observables evaluated on n1 + n2, n1 from the free host, n2 from the ghost host.
McResult sample_double_current(const GraphPtr& free_host, const GraphPtr& ghost_host, double beta,
                               const McOptions& options,
                               const std::vector<std::pair<std::string, std::function<double(const Current&)>>>&
                                   observables,
                               const std::function<void(int, const Current&)>& sink = {});

}  // namespace rci
