#include "rcising/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <thread>
#include <unordered_map>

#include "rcising/detail/log_sum.hpp"
#include "rcising/detail/union_find.hpp"
#include "rcising/error.hpp"

namespace rci {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kParityOnly = -2;

struct EdgeClass {
  double log_weight;
  std::uint32_t rep;
  bool odd;
};

double log_term(double t, int k) {
  if (k == 0) return 0.0;
  if (t == 0.0) return kNegInf;
  return k * std::log(t) - std::lgamma(k + 1.0);
}

void push_class(std::vector<EdgeClass>& out, double t, int first, int last, int step) {
  detail::LogSum acc;
  for (int k = first; k <= last; k += step) acc.add(log_term(t, k));
  if (acc.empty()) return;
  double lw = acc.log_value();
#ifdef RCI_INJECT_FAULT
  if (first % 2 == 1) lw += 1e-6;
#endif
  out.push_back({lw, static_cast<std::uint32_t>(first), first % 2 == 1});
}

std::vector<EdgeClass> build_classes(double t, int cap, int resolution) {
  std::vector<EdgeClass> out;
  if (resolution == kParityOnly) {
    push_class(out, t, 0, cap, 2);
    push_class(out, t, 1, cap, 2);
    return out;
  }
  const int single = (resolution < 0 || resolution >= cap) ? cap : resolution;
  for (int k = 0; k <= single; ++k) push_class(out, t, k, k, 1);
  if (single < cap) {
    const int even = (single + 1) % 2 == 0 ? single + 1 : single + 2;
    const int odd = (single + 1) % 2 == 1 ? single + 1 : single + 2;
    push_class(out, t, even, cap, 2);
    push_class(out, t, odd, cap, 2);
  }
  return out;
}

std::uint64_t saturating_product(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

void check_budget(std::uint64_t required, const EnumerationLimits& limits, const char* what) {
  if (required > limits.budget)
    fail(ErrorCode::size, std::string(what) + " needs " + std::to_string(required) + " leaves; required budget " +
                              std::to_string(required) + " exceeds configured budget " + std::to_string(limits.budget));
}

void check_vertex(const WeightedGraph& g, Vertex v) {
  if (v < 0 || v >= g.vertex_count()) fail(ErrorCode::invalid_argument, "vertex " + std::to_string(v) + " out of range");
}

std::vector<char> parity_target(const WeightedGraph& g, const SourceSet& sources) {
  std::vector<char> target(static_cast<std::size_t>(g.vertex_count()), 0);
  for (Vertex v : sources) {
    check_vertex(g, v);
    auto& bit = target[static_cast<std::size_t>(v)];
    if (bit) fail(ErrorCode::invalid_argument, "duplicate source vertex");
    bit = 1;
  }
  return target;
}

// Depth-first enumeration over per-pair classes with vertex-parity pruning:
// a vertex's parity is checked as soon as its last incident pair is fixed.
class ClassEnumerator {
 public:
  ClassEnumerator(const WeightedGraph& g, std::vector<std::vector<EdgeClass>> classes, std::vector<char> target)
      : g_(g), classes_(std::move(classes)), target_(std::move(target)) {
    last_edge_.assign(static_cast<std::size_t>(g.vertex_count()), -1);
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      last_edge_[static_cast<std::size_t>(g.edge(e).u)] = e;
      last_edge_[static_cast<std::size_t>(g.edge(e).v)] = e;
    }
    for (std::size_t v = 0; v < target_.size(); ++v)
      if (last_edge_[v] < 0 && target_[v]) feasible_ = false;
  }

  std::uint64_t leaf_bound() const {
    std::uint64_t n = 1;
    for (const auto& c : classes_) n = saturating_product(n, c.size());
    return n;
  }

  std::size_t partitions() const { return classes_.empty() ? 1 : classes_[0].size(); }

  template <class Leaf>
  void run(std::size_t partition, Leaf& leaf) const {
    if (!feasible_) return;
    std::vector<int> choice(classes_.size(), 0);
    std::vector<char> parity(target_.size(), 0);
    if (classes_.empty()) {
      leaf(choice, 0.0);
      return;
    }
    descend(0, 0.0, static_cast<int>(partition), choice, parity, leaf);
  }

  const std::vector<std::vector<EdgeClass>>& classes() const { return classes_; }

 private:
  template <class Leaf>
  void descend(int e, double lw, int only, std::vector<int>& choice, std::vector<char>& parity, Leaf& leaf) const {
    if (e == static_cast<int>(classes_.size())) {
      leaf(choice, lw);
      return;
    }
    const auto& edge = g_.edge(e);
    const auto u = static_cast<std::size_t>(edge.u);
    const auto v = static_cast<std::size_t>(edge.v);
    const auto& options = classes_[static_cast<std::size_t>(e)];
    const int first = only >= 0 ? only : 0;
    const int last = only >= 0 ? only + 1 : static_cast<int>(options.size());
    for (int c = first; c < last; ++c) {
      const auto& cls = options[static_cast<std::size_t>(c)];
      if (cls.odd) {
        parity[u] ^= 1;
        parity[v] ^= 1;
      }
      const bool ok = (last_edge_[u] != e || parity[u] == target_[u]) && (last_edge_[v] != e || parity[v] == target_[v]);
      if (ok) {
        choice[static_cast<std::size_t>(e)] = c;
        descend(e + 1, lw + cls.log_weight, -1, choice, parity, leaf);
      }
      if (cls.odd) {
        parity[u] ^= 1;
        parity[v] ^= 1;
      }
    }
  }

  const WeightedGraph& g_;
  std::vector<std::vector<EdgeClass>> classes_;
  std::vector<char> target_;
  std::vector<EdgeId> last_edge_;
  bool feasible_ = true;
};

// Runs every partition (fixed class of the first pair) and returns the
// per-partition states in partition order, independent of the worker count.
template <class State, class Make>
std::vector<State> run_partitions(const ClassEnumerator& en, int workers, Make make) {
  const std::size_t parts = en.partitions();
  std::vector<State> states;
  states.reserve(parts);
  for (std::size_t i = 0; i < parts; ++i) states.push_back(make());
  const int pool = std::max(1, std::min<int>(workers, static_cast<int>(parts)));
  if (pool == 1) {
    for (std::size_t i = 0; i < parts; ++i) en.run(i, states[i]);
    return states;
  }
  std::vector<std::thread> threads;
  for (int w = 0; w < pool; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = static_cast<std::size_t>(w); i < parts; i += static_cast<std::size_t>(pool))
        en.run(i, states[i]);
    });
  }
  for (auto& t : threads) t.join();
  return states;
}

struct SumState {
  detail::LogSum acc;
  std::uint64_t leaves = 0;
  void operator()(const std::vector<int>&, double lw) {
    acc.add(lw);
    ++leaves;
  }
};

struct FilteredState {
  const ClassEnumerator* en;
  const EventPredicate* filter;
  Current scratch;
  detail::LogSum acc;
  std::uint64_t leaves = 0;

  void operator()(const std::vector<int>& choice, double lw) {
    ++leaves;
    const auto& classes = en->classes();
    for (std::size_t e = 0; e < choice.size(); ++e)
      scratch.set(static_cast<EdgeId>(e), classes[e][static_cast<std::size_t>(choice[e])].rep);
    if (filter->test(scratch)) acc.add(lw);
  }
};

int resolution_for(const EventPredicate* filter, EdgeId e) {
  if (!filter) return kParityOnly;
  for (const auto& [edge, r] : filter->watched)
    if (edge == e) return r;
  return filter->base_resolution;
}

ClassEnumerator make_enumerator(const WeightedGraph& g, double beta, const SourceSet& sources, int cap,
                                const EventPredicate* filter) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail(ErrorCode::domain, "beta must be finite and non-negative");
  if (cap < 0) fail(ErrorCode::domain, "cap must be non-negative");
  std::vector<std::vector<EdgeClass>> classes;
  classes.reserve(static_cast<std::size_t>(g.edge_count()));
  for (EdgeId e = 0; e < g.edge_count(); ++e)
    classes.push_back(build_classes(beta * g.edge(e).coupling, cap, resolution_for(filter, e)));
  return ClassEnumerator(g, std::move(classes), parity_target(g, sources));
}

double ratio_error(double eps) { return eps < 1.0 ? eps / (1.0 - eps) : std::numeric_limits<double>::infinity(); }

}  // namespace

EventPredicate EventPredicate::always() {
  EventPredicate p;
  p.test = [](const Current&) { return true; };
  p.base_resolution = kParityOnly;
  return p;
}

double poisson_tail_bound(const WeightedGraph& host, double beta, int cap) {
  double total = 0.0;
  for (const auto& e : host.edges()) {
    const double t = beta * e.coupling;
    if (t == 0.0) continue;
    total += std::exp((cap + 1) * std::log(t) - std::lgamma(cap + 2.0) + t);
  }
  return total;
}

TruncatedSum sum_currents(const GraphPtr& host, double beta, const SourceSet& sources, int cap,
                          const EventPredicate* filter, const EnumerationLimits& limits) {
  if (!host) fail(ErrorCode::host, "missing host graph");
  if (filter && !filter->test) fail(ErrorCode::invalid_argument, "event predicate has no test");
  const auto en = make_enumerator(*host, beta, sources, cap, filter);
  check_budget(en.leaf_bound(), limits, "current enumeration");

  detail::LogSum total;
  std::uint64_t leaves = 0;
  if (!filter) {
    for (auto& s : run_partitions<SumState>(en, limits.workers, [] { return SumState{}; })) {
      total.merge(s.acc);
      leaves += s.leaves;
    }
  } else {
    auto make = [&] { return FilteredState{&en, filter, Current(host), {}, 0}; };
    for (auto& s : run_partitions<FilteredState>(en, limits.workers, make)) {
      total.merge(s.acc);
      leaves += s.leaves;
    }
  }
  return {total.log_value(), cap, poisson_tail_bound(*host, beta, cap), leaves};
}

BoundedValue two_point(const GraphPtr& host, double beta, Vertex x, Vertex y, int cap,
                       const EnumerationLimits& limits) {
  if (!host) fail(ErrorCode::host, "missing host graph");
  check_vertex(*host, x);
  check_vertex(*host, y);
  if (x == y) return {1.0, 0.0};
  const auto num = sum_currents(host, beta, SourceSet{std::min(x, y), std::max(x, y)}, cap, nullptr, limits);
  const auto den = sum_currents(host, beta, {}, cap, nullptr, limits);
  return {std::exp(num.log_value - den.log_value), ratio_error(den.tail_bound)};
}

BoundedValue two_point_free(const GraphPtr& host, double beta, Vertex x, Vertex y, int cap,
                            const EnumerationLimits& limits) {
  if (host && host->ghost()) fail(ErrorCode::host, "free two-point function expects a host without ghost");
  return two_point(host, beta, x, y, cap, limits);
}

BoundedValue two_point_plus(const GraphPtr& ghost_host, double beta, Vertex x, Vertex y, int cap,
                            const EnumerationLimits& limits) {
  if (!ghost_host || !ghost_host->ghost()) fail(ErrorCode::host, "plus two-point function needs a ghost host");
  return two_point(ghost_host, beta, x, y, cap, limits);
}

BoundedValue event_prob_exact(const GraphPtr& host, double beta, const SourceSet& sources,
                              const EventPredicate& event, int cap, const EnumerationLimits& limits) {
  const auto num = sum_currents(host, beta, sources, cap, &event, limits);
  const auto den = sum_currents(host, beta, sources, cap, nullptr, limits);
  if (den.log_value == kNegInf) fail(ErrorCode::domain, "no current has the requested sources");
  return {num.log_value == kNegInf ? 0.0 : std::exp(num.log_value - den.log_value), ratio_error(den.tail_bound)};
}

EventPredicate event_A_f(const WeightedGraph& host, Vertex x, Vertex y, VertexMask region) {
  if (!host.ghost()) fail(ErrorCode::host, "event A_f needs a ghost host");
  const auto e = host.find_edge(x, y);
  if (!e) fail(ErrorCode::domain, "event A_f needs a positive-coupling pair");
  if (region.empty()) region = base_mask(host);
  EventPredicate p;
  p.base_resolution = 0;
  p.watched = {{*e, 1}};
  p.test = [x, y, region = std::move(region)](const Current& n) { return in_event_A_f(n, x, y, region); };
  return p;
}

EventPredicate event_connected(Vertex x, Vertex y) {
  EventPredicate p;
  p.base_resolution = 0;
  p.test = [x, y](const Current& n) {
    return connected_within(n, x, y, full_mask(n.host().vertex_count()));
  };
  return p;
}

EventPredicate event_flow_at_least(Vertex x, Vertex y, int k) {
  EventPredicate p;
  p.base_resolution = -1;
  p.test = [x, y, k](const Current& n) { return flow(n, x, y, full_mask(n.host().vertex_count())) >= k; };
  return p;
}

// ---------------------------------------------------------------------------
// Spin and bond enumeration.

namespace {

struct SpinTotals {
  double z = 0.0;
  double corr = 0.0;
  double mag = 0.0;
};

// Gray-code walk over all spin configurations of the non-ghost vertices.
// The ghost pairs enter as an external field tau * beta * J_{x delta}.
SpinTotals spin_enumerate(const WeightedGraph& host, double beta, Boundary boundary, Vertex x, Vertex y,
                          const EnumerationLimits& limits) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail(ErrorCode::domain, "beta must be finite and non-negative");
  const int n = host.base_vertex_count();
  if (n > 62) fail(ErrorCode::size, "spin enumeration over " + std::to_string(n) + " vertices");
  check_budget(std::uint64_t{1} << n, limits, "spin enumeration");
  const double tau = boundary_sign(boundary);

  std::vector<double> field(static_cast<std::size_t>(n), 0.0);
  double bound = 0.0;
  for (const auto& e : host.edges()) {
    const double t = beta * e.coupling;
    if (host.is_ghost(e.u) || host.is_ghost(e.v)) {
      const Vertex v = host.is_ghost(e.u) ? e.v : e.u;
      field[static_cast<std::size_t>(v)] += tau * t;
      bound += std::abs(tau * t);
    } else {
      bound += t;
    }
  }

  std::vector<int> spin(static_cast<std::size_t>(n), 1);
  double energy = bound;  // all spins +1 maximizes every term except negative fields
  for (int v = 0; v < n; ++v)
    if (field[static_cast<std::size_t>(v)] < 0.0) energy -= 2.0 * std::abs(field[static_cast<std::size_t>(v)]);

  auto spin_at = [&](Vertex v) -> double {
    if (host.is_ghost(v)) return tau;
    return spin[static_cast<std::size_t>(v)];
  };

  SpinTotals tot;
  const std::uint64_t states = std::uint64_t{1} << n;
  for (std::uint64_t i = 0;; ++i) {
    const double w = std::exp(energy - bound);
    tot.z += w;
    tot.corr += w * spin_at(x) * spin_at(y);
    tot.mag += w * spin_at(x);
    if (i + 1 == states) break;
    const int v = std::countr_zero(i + 1);
    double local = field[static_cast<std::size_t>(v)];
    for (const auto& inc : host.incident(v))
      if (!host.is_ghost(inc.neighbor))
        local += beta * host.edge(inc.edge).coupling * spin[static_cast<std::size_t>(inc.neighbor)];
    energy -= 2.0 * spin[static_cast<std::size_t>(v)] * local;
    spin[static_cast<std::size_t>(v)] = -spin[static_cast<std::size_t>(v)];
  }
  return tot;
}

template <class Event>
double fk_enumerate(const WeightedGraph& host, double beta, FkBoundary boundary, const EnumerationLimits& limits,
                    Event event) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail(ErrorCode::domain, "beta must be finite and non-negative");
  std::vector<EdgeId> bonds;
  for (EdgeId e = 0; e < host.edge_count(); ++e)
    if (boundary == FkBoundary::wired || !host.is_ghost_edge(e)) bonds.push_back(e);
  if (bonds.size() > 62) fail(ErrorCode::size, "bond enumeration over " + std::to_string(bonds.size()) + " pairs");
  check_budget(std::uint64_t{1} << bonds.size(), limits, "bond enumeration");

  std::vector<double> open_weight;
  for (EdgeId e : bonds) {
    const double t = beta * host.edge(e).coupling;
    open_weight.push_back(t == 0.0 ? kNegInf : std::log(std::expm1(2.0 * t)));
  }
  const auto ghost = host.ghost();
  detail::LogSum z;
  detail::LogSum hit;
  detail::UnionFind uf;
  std::vector<char> open(bonds.size());
  const std::uint64_t states = std::uint64_t{1} << bonds.size();
  for (std::uint64_t s = 0; s < states; ++s) {
    uf.reset(host.vertex_count());
    double lw = 0.0;
    int merges = 0;
    for (std::size_t i = 0; i < bonds.size(); ++i) {
      open[i] = (s >> i) & 1u;
      if (!open[i]) continue;
      lw += open_weight[i];
      const auto& e = host.edge(bonds[i]);
      if (uf.unite(e.u, e.v)) ++merges;
    }
    if (lw == kNegInf) continue;
    // Clusters of the non-ghost vertices; on wired boundary the ghost's
    // cluster carries no factor 2, on free boundary the ghost is absent.
    int clusters = host.vertex_count() - merges;
    if (ghost) --clusters;
    lw += clusters * std::log(2.0);
    z.add(lw);
    if (event(uf, open, bonds)) hit.add(lw);
  }
  return hit.empty() ? 0.0 : std::exp(hit.log_value() - z.log_value());
}

}  // namespace

double spin_oracle(const WeightedGraph& host, double beta, Boundary boundary, Vertex x, Vertex y,
                   const EnumerationLimits& limits) {
  check_vertex(host, x);
  check_vertex(host, y);
  if (x == y) return 1.0;
  const auto tot = spin_enumerate(host, beta, boundary, x, y, limits);
  return tot.corr / tot.z;
}

double spin_magnetization(const WeightedGraph& host, double beta, Boundary boundary, Vertex x,
                          const EnumerationLimits& limits) {
  check_vertex(host, x);
  const auto tot = spin_enumerate(host, beta, boundary, x, x, limits);
  return tot.mag / tot.z;
}

double fk_oracle(const WeightedGraph& host, double beta, FkBoundary boundary, Vertex x, Vertex y,
                 const EnumerationLimits& limits) {
  check_vertex(host, x);
  check_vertex(host, y);
  if (x == y) return 1.0;
  if (boundary == FkBoundary::free && (host.is_ghost(x) || host.is_ghost(y))) return 0.0;
  return fk_enumerate(host, beta, boundary, limits,
                      [x, y](detail::UnionFind& uf, const std::vector<char>&, const std::vector<EdgeId>&) {
                        return uf.find(x) == uf.find(y);
                      });
}

double fk_edge_marginal(const WeightedGraph& host, double beta, FkBoundary boundary, EdgeId e,
                        const EnumerationLimits& limits) {
  if (e < 0 || e >= host.edge_count()) fail(ErrorCode::invalid_argument, "edge id out of range");
  if (boundary == FkBoundary::free && host.is_ghost_edge(e)) return 0.0;
  return fk_enumerate(host, beta, boundary, limits,
                      [e](detail::UnionFind&, const std::vector<char>& open, const std::vector<EdgeId>& bonds) {
                        for (std::size_t i = 0; i < bonds.size(); ++i)
                          if (bonds[i] == e) return open[i] != 0;
                        return false;
                      });
}

// ---------------------------------------------------------------------------
// Switching identity, blockwise.

std::string to_string(SwitchingFunctional f) {
  switch (f) {
    case SwitchingFunctional::constant: return "constant";
    case SwitchingFunctional::connection: return "connection";
    case SwitchingFunctional::cluster_size: return "cluster_size";
  }
  return "unknown";
}

SwitchingVerifier::SwitchingVerifier(GraphPtr outer, VertexMask inner, int block_cap, const EnumerationLimits& limits)
    : outer_(std::move(outer)), inner_(std::move(inner)), block_cap_(block_cap) {
  if (!outer_) fail(ErrorCode::host, "missing host graph");
  if (block_cap_ < 0 || block_cap_ > 20) fail(ErrorCode::domain, "block cap must lie in [0, 20]");
  vertex_count_ = outer_->vertex_count();
  if (vertex_count_ > 16) fail(ErrorCode::size, "switching verifier supports at most 16 vertices");
  if (inner_.size() != static_cast<std::size_t>(vertex_count_))
    fail(ErrorCode::invalid_argument, "inner mask does not match the host size");

  const int edges = outer_->edge_count();
  std::uint64_t blocks = 1;
  for (int e = 0; e < edges; ++e) blocks = saturating_product(blocks, static_cast<std::uint64_t>(block_cap_) + 1);
  const std::uint64_t masks = std::uint64_t{1} << vertex_count_;
  check_budget(saturating_product(blocks, masks), limits, "switching blocks");
  block_count_ = blocks;

  std::vector<EdgeId> inner_edges;
  for (EdgeId e = 0; e < edges; ++e) {
    const auto& ed = outer_->edge(e);
    if (inner_[static_cast<std::size_t>(ed.u)] && inner_[static_cast<std::size_t>(ed.v)]) inner_edges.push_back(e);
  }
  functional_u_ = -1;
  for (Vertex v = 0; v < vertex_count_; ++v) {
    if (!inner_[static_cast<std::size_t>(v)]) continue;
    if (functional_u_ < 0) functional_u_ = v;
    functional_v_ = v;
  }
  if (functional_u_ < 0) fail(ErrorCode::invalid_argument, "inner volume is empty");

  std::vector<std::vector<std::uint64_t>> binom(static_cast<std::size_t>(block_cap_) + 1);
  for (int a = 0; a <= block_cap_; ++a) {
    binom[static_cast<std::size_t>(a)].assign(static_cast<std::size_t>(a) + 1, 1);
    for (int b = 1; b < a; ++b)
      binom[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          binom[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(b - 1)] +
          binom[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(b)];
  }

  const auto nb = static_cast<std::size_t>(blocks);
  const auto nv = static_cast<std::size_t>(vertex_count_);
  m_.assign(nb * static_cast<std::size_t>(edges), 0);
  boundary_.assign(nb, 0);
  inner_comp_.assign(nb * nv, 0);
  full_size_.assign(nb * nv, 0);
  counts_.assign(nb * masks, 0);
  by_boundary_.assign(masks, {});

  std::vector<std::uint8_t> m(static_cast<std::size_t>(edges), 0);
  std::vector<std::uint8_t> n1(inner_edges.size(), 0);
  detail::UnionFind uf;
  for (std::size_t b = 0; b < nb; ++b) {
    std::copy(m.begin(), m.end(), m_.begin() + static_cast<std::ptrdiff_t>(b * static_cast<std::size_t>(edges)));
    std::uint32_t mask = 0;
    for (EdgeId e = 0; e < edges; ++e)
      if (m[static_cast<std::size_t>(e)] & 1u) mask ^= (1u << outer_->edge(e).u) ^ (1u << outer_->edge(e).v);
    boundary_[b] = mask;
    by_boundary_[mask].push_back(static_cast<std::uint32_t>(b));

    uf.reset(vertex_count_);
    for (EdgeId e : inner_edges)
      if (m[static_cast<std::size_t>(e)] > 0) uf.unite(outer_->edge(e).u, outer_->edge(e).v);
    for (std::size_t v = 0; v < nv; ++v) inner_comp_[b * nv + v] = static_cast<std::uint8_t>(uf.find(static_cast<int>(v)));
    uf.reset(vertex_count_);
    for (EdgeId e = 0; e < edges; ++e)
      if (m[static_cast<std::size_t>(e)] > 0) uf.unite(outer_->edge(e).u, outer_->edge(e).v);
    for (std::size_t v = 0; v < nv; ++v)
      full_size_[b * nv + v] = static_cast<std::uint8_t>(uf.component_size(static_cast<int>(v)));

    // Every decomposition n1 <= m on the inner pairs, odometer order.
    std::fill(n1.begin(), n1.end(), 0);
    std::uint64_t* bucket = counts_.data() + b * masks;
    while (true) {
      std::uint64_t weight = 1;
      std::uint32_t src = 0;
      for (std::size_t i = 0; i < inner_edges.size(); ++i) {
        const auto e = static_cast<std::size_t>(inner_edges[i]);
        weight *= binom[m[e]][n1[i]];
        if (n1[i] & 1u) src ^= (1u << outer_->edge(inner_edges[i]).u) ^ (1u << outer_->edge(inner_edges[i]).v);
      }
      bucket[src] += weight;
      std::size_t i = 0;
      while (i < n1.size() && n1[i] == m[static_cast<std::size_t>(inner_edges[i])]) n1[i++] = 0;
      if (i == n1.size()) break;
      ++n1[i];
    }

    std::size_t e = 0;
    while (e < m.size() && m[e] == block_cap_) m[e++] = 0;
    if (e == m.size()) break;
    ++m[e];
  }
}

SwitchingResult SwitchingVerifier::evaluate(double beta, Vertex x, Vertex y, const SourceSet& a,
                                            SwitchingFunctional f) const {
  std::vector<double> couplings;
  for (const auto& e : outer_->edges()) couplings.push_back(e.coupling);
  return evaluate(beta, couplings, x, y, a, f);
}

SwitchingResult SwitchingVerifier::evaluate(double beta, std::span<const double> couplings, Vertex x, Vertex y,
                                            const SourceSet& a, SwitchingFunctional f) const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail(ErrorCode::domain, "beta must be finite and non-negative");
  if (couplings.size() != static_cast<std::size_t>(outer_->edge_count()))
    fail(ErrorCode::invalid_argument, "one coupling per outer pair expected");
  for (double j : couplings)
    if (!(j > 0.0) || !std::isfinite(j)) fail(ErrorCode::domain, "couplings must be positive and finite");
  check_vertex(*outer_, x);
  check_vertex(*outer_, y);
  if (x == y) fail(ErrorCode::invalid_argument, "switching pair needs distinct vertices");
  if (!inner_[static_cast<std::size_t>(x)] || !inner_[static_cast<std::size_t>(y)])
    fail(ErrorCode::invalid_argument, "switching pair must lie in the inner volume");
  std::uint32_t a_mask = 0;
  for (Vertex v : a) {
    check_vertex(*outer_, v);
    a_mask ^= 1u << v;
  }
  const std::uint32_t xy_mask = (1u << x) | (1u << y);
  const std::uint32_t target = a_mask ^ xy_mask;

  const int edges = outer_->edge_count();
  std::vector<std::vector<double>> lw(static_cast<std::size_t>(edges));
  for (EdgeId e = 0; e < edges; ++e)
    for (int k = 0; k <= block_cap_; ++k)
      lw[static_cast<std::size_t>(e)].push_back(log_term(beta * couplings[static_cast<std::size_t>(e)], k));

  const auto nv = static_cast<std::size_t>(vertex_count_);
  const std::size_t masks = std::size_t{1} << vertex_count_;
  SwitchingResult out;
  for (std::uint32_t b : by_boundary_[target]) {
    const std::uint8_t* m = m_.data() + static_cast<std::size_t>(b) * static_cast<std::size_t>(edges);
    double log_w = 0.0;
    for (int e = 0; e < edges; ++e)
      if (m[e] > 0) log_w += lw[static_cast<std::size_t>(e)][m[e]];
    const std::uint8_t* comp = inner_comp_.data() + static_cast<std::size_t>(b) * nv;
    double fval = 1.0;
    if (f == SwitchingFunctional::connection) {
      fval = comp[functional_u_] == comp[functional_v_] ? 1.0 : 0.0;
    } else if (f == SwitchingFunctional::cluster_size) {
      fval = full_size_[static_cast<std::size_t>(b) * nv + static_cast<std::size_t>(x)];
    }
    const double w = std::exp(log_w) * fval;
    const std::uint64_t* bucket = counts_.data() + static_cast<std::size_t>(b) * masks;
    const double lhs = w * static_cast<double>(bucket[xy_mask]);
    const double rhs = comp[x] == comp[y] ? w * static_cast<double>(bucket[0]) : 0.0;
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    if (scale > 0.0) out.max_discrepancy = std::max(out.max_discrepancy, std::abs(lhs - rhs) / scale);
    out.lhs_total += lhs;
    out.rhs_total += rhs;
    ++out.blocks;
  }
  return out;
}

SwitchingResult verify_switching(const GraphPtr& outer, const VertexMask& inner, double beta, Vertex x, Vertex y,
                                 const SourceSet& a, SwitchingFunctional f, int block_cap,
                                 const EnumerationLimits& limits) {
  return SwitchingVerifier(outer, inner, block_cap, limits).evaluate(beta, x, y, a, f);
}

SwitchingResult verify_switching(const WeightedGraph& inner_host, const GraphPtr& outer,
                                 std::span<const Vertex> embedding, double beta, Vertex x, Vertex y,
                                 const SourceSet& a, SwitchingFunctional f, int block_cap,
                                 const EnumerationLimits& limits) {
  if (!outer) fail(ErrorCode::host, "missing host graph");
  if (embedding.size() != static_cast<std::size_t>(inner_host.vertex_count()))
    fail(ErrorCode::invalid_argument, "embedding must map every inner vertex");
  VertexMask inner(static_cast<std::size_t>(outer->vertex_count()), 0);
  for (Vertex v : embedding) {
    check_vertex(*outer, v);
    if (inner[static_cast<std::size_t>(v)]) fail(ErrorCode::invalid_argument, "embedding is not injective");
    inner[static_cast<std::size_t>(v)] = 1;
  }
  for (Vertex p = 0; p < inner_host.vertex_count(); ++p) {
    for (Vertex q = p + 1; q < inner_host.vertex_count(); ++q) {
      const double j1 = inner_host.coupling(p, q);
      const double j2 = outer->coupling(embedding[static_cast<std::size_t>(p)], embedding[static_cast<std::size_t>(q)]);
      if (std::abs(j1 - j2) > 1e-12 * std::max(std::abs(j1), std::abs(j2)))
        fail(ErrorCode::condition, "outer couplings restricted to the inner volume differ at {" + std::to_string(p) +
                                       "," + std::to_string(q) + "}");
    }
  }
  check_vertex(inner_host, x);
  check_vertex(inner_host, y);
  return verify_switching(outer, inner, beta, embedding[static_cast<std::size_t>(x)],
                          embedding[static_cast<std::size_t>(y)], a, f, block_cap, limits);
}

// ---------------------------------------------------------------------------
// Double-current identity, increment identity, parity bound.

namespace {

// Per-pair classes of (n1, n2) with n1 + n2 <= cap, keyed by the parities of
// both currents and whether the pair is used by the sum.
struct PairClass {
  int parity1;
  int parity2;
  bool used;
  double log_weight;
};

std::vector<PairClass> double_classes(double t, int cap) {
  std::vector<PairClass> out;
  for (int p1 = 0; p1 < 2; ++p1) {
    for (int p2 = 0; p2 < 2; ++p2) {
      for (int used = 0; used < 2; ++used) {
        detail::LogSum acc;
        for (int a = p1; a <= cap; a += 2)
          for (int b = p2; a + b <= cap; b += 2)
            if ((a + b > 0) == (used == 1)) acc.add(log_term(t, a) + log_term(t, b));
        if (acc.empty() || acc.log_value() == kNegInf) continue;
        double lw = acc.log_value();
#ifdef RCI_INJECT_FAULT
        lw += 1e-6 * (p1 + p2);
#endif
        out.push_back({p1, p2, used == 1, lw});
      }
    }
  }
  return out;
}

}  // namespace

IdentityCheck verify_double_current_identity(const GraphPtr& host, double beta, Vertex x, Vertex y, int cap,
                                             const EnumerationLimits& limits) {
  if (!host) fail(ErrorCode::host, "missing host graph");
  check_vertex(*host, x);
  check_vertex(*host, y);
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail(ErrorCode::domain, "beta must be finite and non-negative");
  if (cap < 1) fail(ErrorCode::domain, "double-current identity needs cap >= 1");
  if (x == y) fail(ErrorCode::invalid_argument, "double-current identity needs distinct vertices");
  const int edges = host->edge_count();
  if (edges > 10 || host->vertex_count() > 32)
    fail(ErrorCode::size, "double-current identity supports at most 10 pairs");

  std::vector<std::vector<PairClass>> classes;
  std::uint64_t leaves = 1;
  for (const auto& e : host->edges()) {
    classes.push_back(double_classes(beta * e.coupling, cap));
    leaves = saturating_product(leaves, classes.back().size());
  }
  check_budget(leaves, limits, "double-current enumeration");

  const std::uint32_t xy = (1u << x) | (1u << y);
  detail::LogSum sourced;    // dn1 = dn2 = {x, y}
  detail::LogSum sourceless; // dn1 = dn2 = empty
  detail::LogSum joined;     // sourceless with x <-> y in n1 + n2
  detail::UnionFind uf;
  std::vector<int> choice(static_cast<std::size_t>(edges), 0);
  auto leaf = [&](double lw) {
    std::uint32_t m1 = 0;
    std::uint32_t m2 = 0;
    for (EdgeId e = 0; e < edges; ++e) {
      const auto& c = classes[static_cast<std::size_t>(e)][static_cast<std::size_t>(choice[static_cast<std::size_t>(e)])];
      const auto ends = (1u << host->edge(e).u) | (1u << host->edge(e).v);
      if (c.parity1) m1 ^= ends;
      if (c.parity2) m2 ^= ends;
    }
    if (m1 == xy && m2 == xy) sourced.add(lw);
    if (m1 != 0 || m2 != 0) return;
    sourceless.add(lw);
    uf.reset(host->vertex_count());
    for (EdgeId e = 0; e < edges; ++e)
      if (classes[static_cast<std::size_t>(e)][static_cast<std::size_t>(choice[static_cast<std::size_t>(e)])].used)
        uf.unite(host->edge(e).u, host->edge(e).v);
    if (uf.find(x) == uf.find(y)) joined.add(lw);
  };
  auto walk = [&](auto&& self, int e, double lw) -> void {
    if (e == edges) {
      leaf(lw);
      return;
    }
    const auto& cs = classes[static_cast<std::size_t>(e)];
    for (std::size_t k = 0; k < cs.size(); ++k) {
      choice[static_cast<std::size_t>(e)] = static_cast<int>(k);
      self(self, e + 1, lw + cs[k].log_weight);
    }
  };
  walk(walk, 0, 0.0);

  IdentityCheck out;
  const double log_z = sourceless.log_value();
  out.lhs = sourced.empty() ? 0.0 : std::exp(sourced.log_value() - log_z);
  out.rhs = joined.empty() ? 0.0 : std::exp(joined.log_value() - log_z);
  out.discrepancy = std::abs(out.lhs - out.rhs);
  // Excluded blocks have some m_e > cap; a pair's block weight is (2t)^m/m!.
  double eps = 0.0;
  for (const auto& e : host->edges()) {
    const double t2 = 2.0 * beta * e.coupling;
    eps += std::exp(log_term(t2, cap + 1) + t2);
  }
  out.tail_bound = 2.0 * ratio_error(eps);
  return out;
}

IdentityCheck verify_increment_identity(const GraphPtr& host, double beta, int cap, const VertexPair* pair,
                                        const EnumerationLimits& limits) {
  if (!host) fail(ErrorCode::host, "missing host graph");
  if (cap < 1) fail(ErrorCode::domain, "increment identity needs cap >= 1");
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail(ErrorCode::domain, "beta must be finite and non-negative");
  const int edges = host->edge_count();
  std::vector<EdgeId> checked;
  if (pair) {
    auto e = host->find_edge(pair->u, pair->v);
    if (!e) fail(ErrorCode::domain, "increment needs a positive-coupling pair");
    checked.push_back(*e);
  } else {
    for (EdgeId e = 0; e < edges; ++e) checked.push_back(e);
  }
  std::uint64_t total = 1;
  for (int e = 0; e < edges; ++e) total = saturating_product(total, static_cast<std::uint64_t>(cap) + 1);
  check_budget(total, limits, "increment enumeration");

  // Every current with multiplicities <= cap, odometer order; index stride of
  // pair e is (cap+1)^e.
  std::vector<double> log_w(static_cast<std::size_t>(total));
  Current n(host);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t rest = idx;
    for (EdgeId e = 0; e < edges; ++e) {
      n.set(e, static_cast<std::uint32_t>(rest % static_cast<std::uint64_t>(cap + 1)));
      rest /= static_cast<std::uint64_t>(cap + 1);
    }
    log_w[idx] = log_weight(n, beta);
  }

  std::vector<std::uint64_t> stride(static_cast<std::size_t>(edges), 1);
  for (int e = 1; e < edges; ++e)
    stride[static_cast<std::size_t>(e)] = stride[static_cast<std::size_t>(e - 1)] * static_cast<std::uint64_t>(cap + 1);

  IdentityCheck out;
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    if (log_w[idx] == kNegInf) continue;
    for (EdgeId e : checked) {
      const auto k = (idx / stride[static_cast<std::size_t>(e)]) % static_cast<std::uint64_t>(cap + 1);
      if (k == static_cast<std::uint64_t>(cap)) continue;
      const double t = beta * host->edge(e).coupling;
      const double after = log_w[idx + stride[static_cast<std::size_t>(e)]];
      double err;
      if (t == 0.0) {
        err = after == kNegInf ? 0.0 : 1.0;
      } else {
        const double expected = std::log(t) - std::log(static_cast<double>(k) + 1.0);
        err = std::abs(std::expm1(after - log_w[idx] - expected));
      }
      out.discrepancy = std::max(out.discrepancy, err);
    }
  }
  return out;
}

ParityBoundResult verify_parity_bound(const GraphPtr& host, double beta, Vertex x, Vertex y,
                                      std::span<const Vertex> path, const VertexMask& boundary, int cap,
                                      const EnumerationLimits& limits) {
  if (!host) fail(ErrorCode::host, "missing host graph");
  check_vertex(*host, x);
  check_vertex(*host, y);
  if (x == y) fail(ErrorCode::invalid_argument, "parity bound needs distinct endpoints");
  if (path.empty() || path.front() != x || path.back() != y)
    fail(ErrorCode::domain, "path must run from x to y");
  if (boundary.size() != static_cast<std::size_t>(host->vertex_count()))
    fail(ErrorCode::invalid_argument, "boundary mask does not match the host size");

  ParityBoundResult out;
  out.k = K_constant(path, beta, *host);
  EventPredicate reach;
  reach.base_resolution = 0;
  reach.test = [x, &boundary](const Current& n) { return connected_to_set(n, x, boundary); };

  const auto z = sum_currents(host, beta, {}, cap, nullptr, limits);
  const auto lhs = sum_currents(host, beta, SourceSet{std::min(x, y), std::max(x, y)}, cap, &reach, limits);
  const auto rhs = sum_currents(host, beta, {}, cap, &reach, limits);
  out.lhs = lhs.log_value == kNegInf ? 0.0 : std::exp(lhs.log_value - z.log_value);
  out.rhs = rhs.log_value == kNegInf ? 0.0 : std::exp(rhs.log_value - z.log_value);
  out.tail_bound = z.tail_bound;
  out.slack = out.k * out.rhs - out.lhs;
  out.holds = out.slack >= -(1.0 + out.k) * ratio_error(z.tail_bound);
  return out;
}

}  // namespace rci
