#include "rcising/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include "rcising/detail/union_find.hpp"
#include "rcising/error.hpp"

namespace rci {

void ChainConfig::validate() const {
  if (burn_in < 0) fail(ErrorCode::invalid_argument, "burn_in must be non-negative");
  if (sweeps <= burn_in) fail(ErrorCode::invalid_argument, "sweeps must exceed burn_in");
  if (thinning < 1) fail(ErrorCode::invalid_argument, "thinning must be at least 1");
}

namespace {

int batch_count(std::size_t n) {
  const auto root = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
  return std::clamp(root, 8, 64);
}

void require_samples(std::size_t n) {
  if (n < 64)
    fail(ErrorCode::insufficient_data,
         "batch means needs at least 64 samples, got " + std::to_string(n));
}

double sample_sd(const std::vector<double>& xs, double mean) {
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

Estimate batch_means(const std::vector<double>& samples) {
  require_samples(samples.size());
  const int nb = batch_count(samples.size());
  const std::size_t size = samples.size() / static_cast<std::size_t>(nb);
  std::vector<double> means(static_cast<std::size_t>(nb), 0.0);
  for (int b = 0; b < nb; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < size; ++i) s += samples[static_cast<std::size_t>(b) * size + i];
    means[static_cast<std::size_t>(b)] = s / static_cast<double>(size);
  }
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= nb;
  Estimate e;
  e.mean = mean;
  e.stderr_ = sample_sd(means, mean) / std::sqrt(static_cast<double>(nb));
  e.n_samples = static_cast<std::int64_t>(size) * nb;
  e.n_batches = nb;
  return e;
}

Estimate ratio_batch_means(const std::vector<double>& num, const std::vector<double>& den) {
  if (num.size() != den.size()) fail(ErrorCode::invalid_argument, "ratio series lengths differ");
  require_samples(num.size());
  const int nb = batch_count(num.size());
  const std::size_t size = num.size() / static_cast<std::size_t>(nb);
  std::vector<double> ratios(static_cast<std::size_t>(nb));
  double total_num = 0.0;
  double total_den = 0.0;
  for (int b = 0; b < nb; ++b) {
    double sn = 0.0;
    double sd = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      sn += num[static_cast<std::size_t>(b) * size + i];
      sd += den[static_cast<std::size_t>(b) * size + i];
    }
    if (sd <= 0.0) fail(ErrorCode::insufficient_data, "ratio estimator batch without denominator mass");
    ratios[static_cast<std::size_t>(b)] = sn / sd;
    total_num += sn;
    total_den += sd;
  }
  Estimate e;
  e.mean = total_num / total_den;
  double rbar = 0.0;
  for (double r : ratios) rbar += r;
  rbar /= nb;
  e.stderr_ = sample_sd(ratios, rbar) / std::sqrt(static_cast<double>(nb));
  e.n_samples = static_cast<std::int64_t>(size) * nb;
  e.n_batches = nb;
  return e;
}

Estimate combine_chains(const std::vector<Estimate>& per_chain) {
  if (per_chain.empty()) fail(ErrorCode::insufficient_data, "no chains to combine");
  Estimate out;
  out.seed = per_chain.front().seed;
  out.chains = 0;
  bool any_zero = false;
  for (const auto& e : per_chain) {
    out.n_samples += e.n_samples;
    out.n_batches += e.n_batches;
    out.chains += e.chains;
    if (e.stderr_ <= 0.0) any_zero = true;
  }
  const double c = static_cast<double>(per_chain.size());
  if (any_zero) {
    double mean = 0.0;
    double var = 0.0;
    for (const auto& e : per_chain) {
      mean += e.mean;
      var += e.stderr_ * e.stderr_;
    }
    out.mean = mean / c;
    out.stderr_ = std::sqrt(var) / c;
    return out;
  }
  double wsum = 0.0;
  double mean = 0.0;
  for (const auto& e : per_chain) {
    const double w = 1.0 / (e.stderr_ * e.stderr_);
    wsum += w;
    mean += w * e.mean;
  }
  out.mean = mean / wsum;
  out.stderr_ = std::sqrt(1.0 / wsum);
  return out;
}

const Estimate& find_estimate(const std::vector<NamedEstimate>& estimates, const std::string& name) {
  for (const auto& e : estimates)
    if (e.name == name) return e.estimate;
  fail(ErrorCode::invalid_argument, "no estimate named '" + name + "'");
}

std::int64_t default_burn_in(int vertex_count, double beta, std::int64_t sweeps) {
  const auto scaled = static_cast<std::int64_t>(std::ceil(vertex_count * beta));
  return std::min(std::max<std::int64_t>(100, scaled), sweeps / 2);
}

void append_series(const std::string& path, const std::vector<ChainRun>& runs) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) fail(ErrorCode::io, "cannot open series file " + path);
  auto put = [&](auto value) {
    unsigned char bytes[sizeof(value)];
    std::memcpy(bytes, &value, sizeof(value));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(value));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(value));
  };
  for (const auto& run : runs) {
    for (std::size_t obs = 0; obs < run.series.size(); ++obs) {
      const auto& s = run.series[obs];
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        put(static_cast<std::uint32_t>(run.chain_id));
        put(static_cast<std::uint64_t>(i));
        put(static_cast<std::uint32_t>(obs));
        put(s.denominators.empty() ? s.values[i] : s.values[i] / s.denominators[i]);
      }
    }
  }
  if (!out) fail(ErrorCode::io, "failed writing series file " + path);
}

namespace {

ChainConfig chain_config(const McOptions& o, int chain, std::int64_t burn_in) {
  ChainConfig c;
  c.seed = o.seed;
  c.chain_id = chain;
  c.sweeps = o.sweeps;
  c.burn_in = burn_in;
  c.thinning = o.thinning;
  c.validate();
  return c;
}

template <class Run>
std::vector<ChainRun> run_chains(const McOptions& o, Run run) {
  if (o.chains < 1) fail(ErrorCode::invalid_argument, "need at least one chain");
  std::vector<ChainRun> runs(static_cast<std::size_t>(o.chains));
  const int pool = std::max(1, std::min(o.workers, o.chains));
  if (pool == 1) {
    for (int c = 0; c < o.chains; ++c) runs[static_cast<std::size_t>(c)] = run(c);
    return runs;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(o.chains));
  std::vector<std::thread> threads;
  for (int w = 0; w < pool; ++w) {
    threads.emplace_back([&, w] {
      for (int c = w; c < o.chains; c += pool) {
        try {
          runs[static_cast<std::size_t>(c)] = run(c);
        } catch (...) {
          errors[static_cast<std::size_t>(c)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return runs;
}

McResult aggregate(std::vector<ChainRun> runs, const McOptions& o, std::int64_t burn_in) {
  if (!o.series_path.empty()) append_series(o.series_path, runs);
  McResult result;
  result.burn_in = burn_in;
  const std::size_t count = runs.front().series.size();
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<Estimate> per_chain;
    for (const auto& run : runs) {
      const auto& s = run.series[i];
      Estimate e = s.denominators.empty() ? batch_means(s.values) : ratio_batch_means(s.values, s.denominators);
      e.seed = o.seed;
      per_chain.push_back(e);
    }
    result.estimates.push_back({runs.front().series[i].name, combine_chains(per_chain)});
  }
  if (o.keep_runs) result.runs = std::move(runs);
  return result;
}

std::string pair_name(const char* prefix, VertexPair p) {
  return std::string(prefix) + ":" + std::to_string(p.u) + ":" + std::to_string(p.v);
}

void check_pair(const WeightedGraph& g, VertexPair p) {
  if (p.u < 0 || p.v >= g.vertex_count() || p.u == p.v)
    fail(ErrorCode::invalid_argument, "observable pair {" + std::to_string(p.u) + "," + std::to_string(p.v) + "} invalid");
}

void check_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail(ErrorCode::domain, "beta must be finite and non-negative");
}

}  // namespace

// ---------------------------------------------------------------------------
// Heat bath.

McResult sample_spins(const GraphPtr& host, double beta, Boundary boundary, const McOptions& options,
                      const SpinObservables& obs) {
  if (!host) fail(ErrorCode::host, "missing host graph");
  check_beta(beta);
  const WeightedGraph& g = *host;
  const int n = g.base_vertex_count();
  for (const auto& p : obs.correlations) check_pair(g, VertexPair::of(p.u, p.v));
  for (Vertex v : obs.sites)
    if (v < 0 || v >= g.vertex_count()) fail(ErrorCode::invalid_argument, "observable site out of range");
  const double tau = boundary_sign(boundary);
  const std::int64_t burn_in = options.burn_in >= 0 ? options.burn_in : default_burn_in(n, beta, options.sweeps);

  std::vector<double> field(static_cast<std::size_t>(n), 0.0);
  for (const auto& e : g.edges()) {
    if (g.is_ghost(e.u)) field[static_cast<std::size_t>(e.v)] += tau * beta * e.coupling;
    if (g.is_ghost(e.v)) field[static_cast<std::size_t>(e.u)] += tau * beta * e.coupling;
  }

  auto run = [&](int chain) {
    const auto cfg = chain_config(options, chain, burn_in);
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(cfg.chain_id));
    std::vector<int> spin(static_cast<std::size_t>(g.vertex_count()), 1);
    if (boundary == Boundary::minus) std::fill(spin.begin(), spin.end(), -1);
    if (boundary == Boundary::free)
      for (int v = 0; v < n; ++v) spin[static_cast<std::size_t>(v)] = rng.uniform() < 0.5 ? 1 : -1;
    if (g.ghost()) spin[static_cast<std::size_t>(*g.ghost())] = boundary == Boundary::minus ? -1 : 1;
    auto sigma = [&](Vertex v) -> double { return g.is_ghost(v) ? tau : spin[static_cast<std::size_t>(v)]; };

    ChainRun out;
    out.chain_id = chain;
    for (const auto& p : obs.correlations) out.series.push_back({pair_name("corr", VertexPair::of(p.u, p.v)), {}, {}});
    for (Vertex v : obs.sites) out.series.push_back({"sigma:" + std::to_string(v), {}, {}});
    if (obs.magnetization) out.series.push_back({"magnetization", {}, {}});
    if (obs.energy) out.series.push_back({"energy", {}, {}});

    for (std::int64_t sweep = 0; sweep < cfg.sweeps; ++sweep) {
      for (int v = 0; v < n; ++v) {
        double h = field[static_cast<std::size_t>(v)];
        for (const auto& inc : g.incident(v))
          if (!g.is_ghost(inc.neighbor))
            h += beta * g.edge(inc.edge).coupling * spin[static_cast<std::size_t>(inc.neighbor)];
        const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * h));
        spin[static_cast<std::size_t>(v)] = rng.uniform() < p_plus ? 1 : -1;
      }
      if (sweep < cfg.burn_in || (sweep - cfg.burn_in) % cfg.thinning != 0) continue;
      std::size_t k = 0;
      for (const auto& p : obs.correlations) out.series[k++].values.push_back(sigma(p.u) * sigma(p.v));
      for (Vertex v : obs.sites) out.series[k++].values.push_back(sigma(v));
      if (obs.magnetization) {
        double m = 0.0;
        for (int v = 0; v < n; ++v) m += spin[static_cast<std::size_t>(v)];
        out.series[k++].values.push_back(m / n);
      }
      if (obs.energy) {
        double h = 0.0;
        for (const auto& e : g.edges()) h -= e.coupling * sigma(e.u) * sigma(e.v);
        out.series[k++].values.push_back(h / n);
      }
    }
    return out;
  };
  return aggregate(run_chains(options, run), options, burn_in);
}

// ---------------------------------------------------------------------------
// Swendsen-Wang.

McResult sample_fk(const GraphPtr& host, double beta, FkBoundary boundary, const McOptions& options,
                   const FkObservables& obs) {
  if (!host) fail(ErrorCode::host, "missing host graph");
  check_beta(beta);
  const WeightedGraph& g = *host;
  const bool wired = boundary == FkBoundary::wired;
  for (const auto& p : obs.connections) check_pair(g, VertexPair::of(p.u, p.v));
  for (const auto& p : obs.spin_correlations) check_pair(g, VertexPair::of(p.u, p.v));
  for (EdgeId e : obs.edges)
    if (e < 0 || e >= g.edge_count()) fail(ErrorCode::invalid_argument, "observable edge out of range");
  const std::int64_t burn_in =
      options.burn_in >= 0 ? options.burn_in : default_burn_in(g.base_vertex_count(), beta, options.sweeps);

  std::vector<EdgeId> bonds;
  std::vector<double> p_open;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (!wired && g.is_ghost_edge(e)) continue;
    bonds.push_back(e);
    p_open.push_back(-std::expm1(-2.0 * beta * g.edge(e).coupling));
  }

  auto run = [&](int chain) {
    const auto cfg = chain_config(options, chain, burn_in);
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(cfg.chain_id));
    const auto nv = static_cast<std::size_t>(g.vertex_count());
    std::vector<int> spin(nv, 1);
    std::vector<char> open(static_cast<std::size_t>(g.edge_count()), 0);
    std::vector<int> sign(nv, 0);
    detail::UnionFind uf(g.vertex_count());

    ChainRun out;
    out.chain_id = chain;
    for (const auto& p : obs.connections) out.series.push_back({pair_name("conn", VertexPair::of(p.u, p.v)), {}, {}});
    for (EdgeId e : obs.edges) out.series.push_back({"open:" + std::to_string(e), {}, {}});
    for (const auto& p : obs.spin_correlations)
      out.series.push_back({pair_name("corr", VertexPair::of(p.u, p.v)), {}, {}});
    for (EdgeId e : obs.edges) out.series.push_back({"open_rb:" + std::to_string(e), {}, {}});

    for (std::int64_t sweep = 0; sweep < cfg.sweeps; ++sweep) {
      uf.reset(g.vertex_count());
      std::fill(open.begin(), open.end(), 0);
      for (std::size_t i = 0; i < bonds.size(); ++i) {
        const auto& e = g.edge(bonds[i]);
        if (spin[static_cast<std::size_t>(e.u)] != spin[static_cast<std::size_t>(e.v)]) continue;
        if (rng.uniform() < p_open[i]) {
          open[static_cast<std::size_t>(bonds[i])] = 1;
          uf.unite(e.u, e.v);
        }
      }
      std::fill(sign.begin(), sign.end(), 0);
      if (wired && g.ghost()) sign[static_cast<std::size_t>(uf.find(*g.ghost()))] = 1;
      for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (g.is_ghost(v)) continue;
        auto& s = sign[static_cast<std::size_t>(uf.find(v))];
        if (s == 0) s = rng.uniform() < 0.5 ? 1 : -1;
        spin[static_cast<std::size_t>(v)] = s;
      }
      if (g.ghost()) spin[static_cast<std::size_t>(*g.ghost())] = 1;

      if (sweep < cfg.burn_in || (sweep - cfg.burn_in) % cfg.thinning != 0) continue;
      std::size_t k = 0;
      for (const auto& p : obs.connections) out.series[k++].values.push_back(uf.find(p.u) == uf.find(p.v) ? 1.0 : 0.0);
      for (EdgeId e : obs.edges) out.series[k++].values.push_back(open[static_cast<std::size_t>(e)]);
      for (const auto& p : obs.spin_correlations)
        out.series[k++].values.push_back(spin[static_cast<std::size_t>(p.u)] * spin[static_cast<std::size_t>(p.v)]);
      // Conditional expectation of the bond given the clusters it was drawn from.
      for (EdgeId e : obs.edges) {
        const auto& ed = g.edge(e);
        const double p = -std::expm1(-2.0 * beta * ed.coupling);
        out.series[k++].values.push_back(0.5 * p * (uf.find(ed.u) == uf.find(ed.v) ? 2.0 : 1.0));
      }
    }
    return out;
  };
  return aggregate(run_chains(options, run), options, burn_in);
}

// ---------------------------------------------------------------------------
// Worm.

WormChain::WormChain(GraphPtr host, double beta, double p_jump)
    : host_(std::move(host)), beta_(beta), p_jump_(p_jump), state_{Current(host_), 0, 0} {
  check_beta(beta);
  if (!(p_jump > 0.0 && p_jump < 1.0)) fail(ErrorCode::invalid_argument, "p_jump must lie in (0, 1)");
  if (host_->vertex_count() > 1 && !host_->connected())
    fail(ErrorCode::ergodicity, "coupling support is not connected; the worm cannot reach every vertex");
  cumulative_.resize(static_cast<std::size_t>(host_->vertex_count()));
  for (Vertex v = 0; v < host_->vertex_count(); ++v) {
    double acc = 0.0;
    for (const auto& inc : host_->incident(v)) {
      acc += host_->edge(inc.edge).coupling;
      cumulative_[static_cast<std::size_t>(v)].push_back(acc);
    }
  }
}

void WormChain::set_state(WormState s) {
  if (s.n.host_ptr() != host_) fail(ErrorCode::host, "worm state lives on another host");
  auto src = sources(s.n);
  SourceSet expect;
  if (s.tail != s.head) expect = {std::min(s.tail, s.head), std::max(s.tail, s.head)};
  if (src != expect) fail(ErrorCode::invalid_argument, "worm state sources must be {tail, head}");
  state_ = std::move(s);
}

double WormChain::log_target(const WormState& s) const { return log_weight(s.n, beta_); }

double WormChain::proposal(const WormState& s, const Move& m) const {
  if (m.kind == Move::jump) return p_jump_ / host_->vertex_count();
  const double j = host_->edge(m.edge).coupling;
  return (1.0 - p_jump_) * 0.5 * j / host_->row_sum(s.head);
}

double WormChain::acceptance(const WormState& s, const Move& m) const {
  if (m.kind == Move::jump) return s.tail == s.head ? 1.0 : 0.0;
  const double t = beta_ * host_->edge(m.edge).coupling;
  const double rows = host_->row_sum(s.head) / host_->row_sum(m.target);
  const std::uint32_t n = s.n.at(m.edge);
  double ratio;
  if (m.kind == Move::raise) {
    ratio = t / (n + 1.0) * rows;
  } else {
    if (n == 0) return 0.0;
    ratio = n / t * rows;
  }
  return std::min(1.0, ratio);
}

void WormChain::apply(WormState& s, const Move& m) const {
  if (m.kind == Move::jump) {
    s.tail = s.head = m.target;
    return;
  }
  const std::uint32_t n = s.n.at(m.edge);
  if (m.kind == Move::raise) {
    if (n == std::numeric_limits<std::uint32_t>::max()) fail(ErrorCode::domain, "multiplicity overflow in worm");
    s.n.set(m.edge, n + 1);
  } else {
    s.n.set(m.edge, n - 1);
  }
  s.head = m.target;
}

void WormChain::step(CounterRng& rng) {
  Move m{Move::jump, -1, 0};
  if (rng.uniform() < p_jump_) {
    m.target = static_cast<Vertex>(rng.below(static_cast<std::uint64_t>(host_->vertex_count())));
  } else {
    const auto& cum = cumulative_[static_cast<std::size_t>(state_.head)];
    if (cum.empty()) return;
    const double u = rng.uniform() * cum.back();
    auto idx = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    idx = std::min(idx, cum.size() - 1);
    const auto& inc = host_->incident(state_.head)[idx];
    m.kind = rng.uniform() < 0.5 ? Move::raise : Move::lower;
    m.edge = inc.edge;
    m.target = inc.neighbor;
  }
  const double a = acceptance(state_, m);
  if (a >= 1.0 || (a > 0.0 && rng.uniform() < a)) apply(state_, m);
}

std::vector<WormChain::Transition> WormChain::transitions(const WormState& from) const {
  std::vector<Transition> out;
  double moved = 0.0;
  auto consider = [&](const Move& m) {
    const double p = proposal(from, m) * acceptance(from, m);
    if (p <= 0.0) return;
    WormState to = from;
    apply(to, m);
    if (to.tail == from.tail && to.head == from.head && to.n == from.n) return;
    out.push_back({std::move(to), p});
    moved += p;
  };
  for (Vertex v = 0; v < host_->vertex_count(); ++v) consider({Move::jump, -1, v});
  for (const auto& inc : host_->incident(from.head)) {
    consider({Move::raise, inc.edge, inc.neighbor});
    consider({Move::lower, inc.edge, inc.neighbor});
  }
  out.push_back({from, 1.0 - moved});
  return out;
}

namespace {

// Drives one worm chain: burn-in, then steps with the two-point tallies and
// a Bernoulli-thinned trace of the closed states.
class WormRunner {
 public:
  WormRunner(const GraphPtr& host, double beta, const ChainConfig& cfg, std::uint64_t stream,
             const std::vector<VertexPair>& pairs)
      : chain_(host, beta), rng_(cfg.seed, stream), cfg_(cfg), pairs_(pairs) {
    steps_per_sweep_ = std::max(1, host->vertex_count());
    tally_.assign(pairs_.size(), 0.0);
  }

  void burn() {
    std::int64_t closed = 0;
    const std::int64_t steps = cfg_.burn_in * steps_per_sweep_;
    for (std::int64_t s = 0; s < steps; ++s) {
      chain_.step(rng_);
      if (chain_.closed()) ++closed;
    }
    const double f = steps > 0 ? static_cast<double>(closed) / static_cast<double>(steps) : 0.0;
    const double per_record = static_cast<double>(cfg_.thinning) * steps_per_sweep_;
    p_record_ = f > 0.0 ? std::min(1.0, 1.0 / (per_record * f)) : 1.0;
    remaining_ = (cfg_.sweeps - cfg_.burn_in) * steps_per_sweep_;
  }

  bool exhausted() const { return remaining_ <= 0; }

  // One step; true when the closed state reached is selected for recording.
  bool step() {
    chain_.step(rng_);
    --remaining_;
    const auto& s = chain_.state();
    if (s.tail == s.head) {
      diag_ += 1.0;
    } else {
      for (std::size_t i = 0; i < pairs_.size(); ++i) {
        const auto& p = pairs_[i];
        if ((s.tail == p.u && s.head == p.v) || (s.tail == p.v && s.head == p.u)) tally_[i] += 0.5;
      }
    }
    if (s.tail != s.head) return false;
    return p_record_ >= 1.0 || rng_.uniform() < p_record_;
  }

  // Advances until a closed state is recorded; false when the budget runs out.
  bool next_record() {
    while (!exhausted())
      if (step()) return true;
    return false;
  }

  std::int64_t steps_done() const { return (cfg_.sweeps - cfg_.burn_in) * steps_per_sweep_ - remaining_; }
  int steps_per_sweep() const { return steps_per_sweep_; }
  const Current& current() const { return chain_.state().n; }

  void flush_tallies(std::vector<ObservableSeries>& series) {
    const double den = diag_ / steps_per_sweep_;
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      series[i].values.push_back(tally_[i]);
      series[i].denominators.push_back(den);
      tally_[i] = 0.0;
    }
    diag_ = 0.0;
  }

 private:
  WormChain chain_;
  CounterRng rng_;
  ChainConfig cfg_;
  std::vector<VertexPair> pairs_;
  int steps_per_sweep_ = 1;
  double p_record_ = 1.0;
  std::int64_t remaining_ = 0;
  std::vector<double> tally_;
  double diag_ = 0.0;
};

}  // namespace

McResult sample_current(const GraphPtr& host, double beta, const McOptions& options, const CurrentObservables& obs) {
  if (!host) fail(ErrorCode::host, "missing host graph");
  check_beta(beta);
  std::vector<VertexPair> pairs;
  for (const auto& p : obs.two_point) {
    check_pair(*host, VertexPair::of(p.u, p.v));
    pairs.push_back(VertexPair::of(p.u, p.v));
  }
  const std::int64_t burn_in =
      options.burn_in >= 0 ? options.burn_in : default_burn_in(host->vertex_count(), beta, options.sweeps);

  auto run = [&](int chain) {
    const auto cfg = chain_config(options, chain, burn_in);
    WormRunner runner(host, beta, cfg, static_cast<std::uint64_t>(chain), pairs);
    runner.burn();
    ChainRun out;
    out.chain_id = chain;
    for (const auto& p : pairs) out.series.push_back({pair_name("corr", p), {}, {}});
    for (const auto& [name, fn] : obs.sector) out.series.push_back({name, {}, {}});
    const std::int64_t block = static_cast<std::int64_t>(runner.steps_per_sweep()) * cfg.thinning;
    std::int64_t in_block = 0;
    while (!runner.exhausted()) {
      if (runner.step()) {
        const Current& n = runner.current();
        for (std::size_t i = 0; i < obs.sector.size(); ++i)
          out.series[pairs.size() + i].values.push_back(obs.sector[i].second(n));
        if (obs.sink) obs.sink(chain, n);
      }
      if (++in_block == block) {
        runner.flush_tallies(out.series);
        in_block = 0;
      }
    }
    return out;
  };
  return aggregate(run_chains(options, run), options, burn_in);
}

McResult sample_double_current(const GraphPtr& free_host, const GraphPtr& ghost_host, double beta,
                               const McOptions& options,
                               const std::vector<std::pair<std::string, std::function<double(const Current&)>>>& obs,
                               const std::function<void(int, const Current&)>& sink) {
  if (!free_host || !ghost_host) fail(ErrorCode::host, "missing host graph");
  if (!ghost_host->ghost() || free_host->ghost()) fail(ErrorCode::host, "expected a free host and a ghost host");
  int inner_edges = 0;
  for (EdgeId e = 0; e < ghost_host->edge_count(); ++e) {
    if (ghost_host->is_ghost_edge(e)) continue;
    ++inner_edges;
    const auto& ed = ghost_host->edge(e);
    const auto f = free_host->find_edge(ed.u, ed.v);
    if (!f || std::abs(free_host->edge(*f).coupling - ed.coupling) > 1e-12 * ed.coupling)
      fail(ErrorCode::host, "free host must be the ghost host without the ghost");
  }
  if (inner_edges != free_host->edge_count() || free_host->vertex_count() != ghost_host->base_vertex_count())
    fail(ErrorCode::host, "free host must be the ghost host without the ghost");
  check_beta(beta);
  const std::int64_t burn_in =
      options.burn_in >= 0 ? options.burn_in : default_burn_in(ghost_host->vertex_count(), beta, options.sweeps);

  auto run = [&](int chain) {
    const auto cfg = chain_config(options, chain, burn_in);
    WormRunner free_runner(free_host, beta, cfg, 2 * static_cast<std::uint64_t>(chain), {});
    WormRunner ghost_runner(ghost_host, beta, cfg, 2 * static_cast<std::uint64_t>(chain) + 1, {});
    free_runner.burn();
    ghost_runner.burn();
    ChainRun out;
    out.chain_id = chain;
    for (const auto& [name, fn] : obs) out.series.push_back({name, {}, {}});
    while (free_runner.next_record() && ghost_runner.next_record()) {
      const Current sum = add(free_runner.current(), ghost_runner.current());
      for (std::size_t i = 0; i < obs.size(); ++i) out.series[i].values.push_back(obs[i].second(sum));
      if (sink) sink(chain, sum);
    }
    return out;
  };
  return aggregate(run_chains(options, run), options, burn_in);
}

}  // namespace rci
