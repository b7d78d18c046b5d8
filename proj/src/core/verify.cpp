#include "rcising/verify.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <mutex>
#include <thread>

#include "rcising/detail/union_find.hpp"
#include "rcising/error.hpp"
#include "rcising/exact.hpp"
#include "rcising/rng.hpp"

namespace rci {

namespace {

constexpr double kSwitchingTol = 1e-12;
constexpr double kFkTol = 1e-10;
constexpr double kDoubleTol = 1e-8;
constexpr double kIncrementTol = 1e-12;
constexpr double kParityTol = 1e-10;
constexpr double kSinglePairTol = 1e-10;
constexpr double kRoundoff = 1e-14;

struct SmallGraph {
  int n = 0;
  std::vector<VertexPair> pairs;
  std::string label;
};

std::vector<SmallGraph> connected_graphs(int max_vertices) {
  std::vector<SmallGraph> out;
  for (int n = 2; n <= max_vertices; ++n) {
    std::vector<VertexPair> all;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) all.push_back({u, v});
    const std::uint32_t subsets = 1u << all.size();
    for (std::uint32_t mask = 1; mask < subsets; ++mask) {
      detail::UnionFind uf(n);
      SmallGraph g;
      g.n = n;
      for (std::size_t i = 0; i < all.size(); ++i) {
        if (!((mask >> i) & 1u)) continue;
        g.pairs.push_back(all[i]);
        uf.unite(all[i].u, all[i].v);
      }
      bool connected = true;
      for (int v = 1; v < n; ++v) connected = connected && uf.find(v) == uf.find(0);
      if (!connected) continue;
      g.label = "n" + std::to_string(n) + ":";
      for (std::size_t i = 0; i < g.pairs.size(); ++i)
        g.label += (i ? "," : "") + std::to_string(g.pairs[i].u) + std::to_string(g.pairs[i].v);
      out.push_back(std::move(g));
    }
  }
  return out;
}

struct Draw {
  std::vector<double> couplings;  // one per pair, in pair order
  std::vector<double> ghost;      // one per vertex
};

// Couplings in (0, 1]; identical for every identity on the same graph.
std::vector<Draw> make_draws(const SmallGraph& g, std::uint64_t seed, std::uint64_t graph_index, int count) {
  std::vector<Draw> out;
  CounterRng rng(derive_seed(seed, graph_index), 0);
  for (int d = 0; d < count; ++d) {
    Draw draw;
    for (std::size_t i = 0; i < g.pairs.size(); ++i) draw.couplings.push_back(1.0 - rng.uniform());
    for (int v = 0; v < g.n; ++v) draw.ghost.push_back(1.0 - rng.uniform());
    out.push_back(std::move(draw));
  }
  return out;
}

GraphPtr free_host(const SmallGraph& g, const Draw& d) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < g.pairs.size(); ++i) edges.push_back({g.pairs[i].u, g.pairs[i].v, d.couplings[i]});
  return std::make_shared<const WeightedGraph>(g.n, std::move(edges));
}

GraphPtr ghost_host(const SmallGraph& g, const Draw& d) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < g.pairs.size(); ++i) edges.push_back({g.pairs[i].u, g.pairs[i].v, d.couplings[i]});
  for (int v = 0; v < g.n; ++v) edges.push_back({v, g.n, d.ghost[static_cast<std::size_t>(v)]});
  return std::make_shared<const WeightedGraph>(g.n + 1, std::move(edges), Vertex{g.n});
}

std::vector<int> bfs_distances(const WeightedGraph& host, Vertex from, std::vector<Vertex>* parent) {
  std::vector<int> dist(static_cast<std::size_t>(host.vertex_count()), -1);
  if (parent) parent->assign(dist.size(), -1);
  std::deque<Vertex> queue{from};
  dist[static_cast<std::size_t>(from)] = 0;
  while (!queue.empty()) {
    const Vertex u = queue.front();
    queue.pop_front();
    for (const auto& inc : host.incident(u)) {
      auto& d = dist[static_cast<std::size_t>(inc.neighbor)];
      if (d >= 0) continue;
      d = dist[static_cast<std::size_t>(u)] + 1;
      if (parent) (*parent)[static_cast<std::size_t>(inc.neighbor)] = u;
      queue.push_back(inc.neighbor);
    }
  }
  return dist;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Worst {
  double discrepancy = 0.0;
  double threshold = 0.0;
  double tail_bound = 0.0;
  std::int64_t checks = 0;
  bool pass = true;

  void add(double discrepancy_value, double threshold_value, double bound = 0.0) {
    ++checks;
    const bool ok = std::isfinite(discrepancy_value) && discrepancy_value <= threshold_value;
    if (!ok) pass = false;
    if (!std::isfinite(discrepancy_value) || discrepancy_value > this->discrepancy || checks == 1) {
      this->discrepancy = discrepancy_value;
      this->threshold = threshold_value;
    }
    tail_bound = std::max(tail_bound, bound);
  }
};

VerifyRecord finish(const std::string& identity, const std::string& instance, const Worst& w, const Timer& t) {
  VerifyRecord r;
  r.identity = identity;
  r.instance = instance;
  r.discrepancy = w.discrepancy;
  r.threshold = w.threshold;
  r.tail_bound = w.tail_bound;
  r.checks = w.checks;
  r.pass = w.pass;
  r.elapsed = t.seconds();
  return r;
}

std::string beta_label(double beta) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", beta);
  return buf;
}

bool wanted(const SweepOptions& o, const std::string& name) {
  return o.identities.empty() || std::find(o.identities.begin(), o.identities.end(), name) != o.identities.end();
}

void run_switching(const SmallGraph& g, const std::vector<Draw>& draws, const SweepOptions& o,
                   std::vector<VerifyRecord>& out) {
  Draw unit;
  unit.couplings.assign(g.pairs.size(), 1.0);
  const GraphPtr outer = free_host(g, unit);
  EnumerationLimits limits;
  limits.workers = 1;

  std::vector<SwitchingVerifier> verifiers;
  std::vector<std::vector<Vertex>> inner_sets;
  for (std::uint32_t mask = 1; mask < (1u << g.n); ++mask) {
    if (std::popcount(mask) < 2) continue;
    VertexMask inner(static_cast<std::size_t>(g.n), 0);
    std::vector<Vertex> members;
    for (int v = 0; v < g.n; ++v)
      if ((mask >> v) & 1u) {
        inner[static_cast<std::size_t>(v)] = 1;
        members.push_back(v);
      }
    verifiers.emplace_back(outer, inner, o.block_cap, limits);
    inner_sets.push_back(std::move(members));
  }
  std::vector<SourceSet> source_sets{{}};
  for (int a = 0; a < g.n; ++a)
    for (int b = a + 1; b < g.n; ++b) source_sets.push_back({a, b});
  const SwitchingFunctional functionals[] = {SwitchingFunctional::constant, SwitchingFunctional::connection,
                                             SwitchingFunctional::cluster_size};

  for (double beta : o.betas) {
    Timer t;
    Worst w;
    for (const auto& d : draws) {
      for (std::size_t i = 0; i < verifiers.size(); ++i) {
        const auto& members = inner_sets[i];
        for (std::size_t p = 0; p < members.size(); ++p)
          for (std::size_t q = p + 1; q < members.size(); ++q)
            for (const auto& a : source_sets)
              for (auto f : functionals)
                w.add(verifiers[i].evaluate(beta, d.couplings, members[p], members[q], a, f).max_discrepancy,
                      kSwitchingTol);
      }
    }
    out.push_back(finish("switching", g.label + "|beta=" + beta_label(beta), w, t));
  }
}

void run_representation(const SmallGraph& g, const std::vector<Draw>& draws, const SweepOptions& o,
                        std::vector<VerifyRecord>& out) {
  for (double beta : o.betas) {
    Timer t;
    Worst free_w;
    Worst plus_w;
    Worst single_w;
    for (const auto& d : draws) {
      const auto host = free_host(g, d);
      const auto ghost = ghost_host(g, d);
      for (Vertex x = 0; x < g.n; ++x) {
        for (Vertex y = x + 1; y < g.n; ++y) {
          const auto f = two_point_free(host, beta, x, y, o.cap);
          free_w.add(std::abs(f.value - spin_oracle(*host, beta, Boundary::free, x, y)), f.error_bound + kRoundoff,
                     f.error_bound);
          const auto p = two_point_plus(ghost, beta, x, y, o.cap);
          plus_w.add(std::abs(p.value - spin_oracle(*ghost, beta, Boundary::plus, x, y)), p.error_bound + kRoundoff,
                     p.error_bound);
        }
        // <s_x>^+ as the correlation with the ghost.
        const auto m = two_point(ghost, beta, x, g.n, o.cap);
        plus_w.add(std::abs(m.value - spin_magnetization(*ghost, beta, Boundary::plus, x)), m.error_bound + kRoundoff,
                   m.error_bound);
      }
      if (g.n == 2) {
        const auto f = two_point_free(host, beta, 0, 1, o.cap);
        single_w.add(std::abs(f.value - std::tanh(beta * d.couplings[0])), kSinglePairTol, f.error_bound);
      }
    }
    const double elapsed = t.seconds();
    out.push_back(finish("representation", g.label + "|free|beta=" + beta_label(beta), free_w, t));
    out.push_back(finish("representation", g.label + "|plus|beta=" + beta_label(beta), plus_w, t));
    if (g.n == 2) out.push_back(finish("representation", "single_pair_tanh|beta=" + beta_label(beta), single_w, t));
    for (auto it = out.end() - (g.n == 2 ? 3 : 2); it != out.end(); ++it) it->elapsed = elapsed;
  }
}

void run_fk(const SmallGraph& g, const std::vector<Draw>& draws, const SweepOptions& o,
            std::vector<VerifyRecord>& out) {
  for (double beta : o.betas) {
    Timer t;
    Worst w;
    for (const auto& d : draws) {
      const auto host = free_host(g, d);
      const auto ghost = ghost_host(g, d);
      for (Vertex x = 0; x < g.n; ++x) {
        for (Vertex y = x + 1; y < g.n; ++y) {
          w.add(std::abs(fk_oracle(*host, beta, FkBoundary::free, x, y) -
                         spin_oracle(*host, beta, Boundary::free, x, y)),
                kFkTol);
          w.add(std::abs(fk_oracle(*ghost, beta, FkBoundary::wired, x, y) -
                         spin_oracle(*ghost, beta, Boundary::plus, x, y)),
                kFkTol);
        }
      }
    }
    out.push_back(finish("fk_coupling", g.label + "|beta=" + beta_label(beta), w, t));
  }
}

void run_double(const SmallGraph& g, const std::vector<Draw>& draws, const SweepOptions& o,
                std::vector<VerifyRecord>& out) {
  if (g.n > 3) return;
  for (double beta : o.betas) {
    Timer t;
    Worst w;
    for (const auto& d : draws) {
      const auto host = free_host(g, d);
      for (Vertex x = 0; x < g.n; ++x)
        for (Vertex y = x + 1; y < g.n; ++y) {
          const auto c = verify_double_current_identity(host, beta, x, y, o.double_cap);
          w.add(c.discrepancy, kDoubleTol, c.tail_bound);
        }
    }
    out.push_back(finish("double_current", g.label + "|beta=" + beta_label(beta), w, t));
  }
}

void run_increment(const SmallGraph& g, const std::vector<Draw>& draws, const SweepOptions& o,
                   std::vector<VerifyRecord>& out) {
  for (double beta : o.betas) {
    Timer t;
    Worst w;
    for (const auto& d : draws) w.add(verify_increment_identity(free_host(g, d), beta, o.increment_cap).discrepancy,
                                      kIncrementTol);
    out.push_back(finish("increment", g.label + "|beta=" + beta_label(beta), w, t));
  }
}

void run_parity(const SmallGraph& g, const std::vector<Draw>& draws, const SweepOptions& o,
                std::vector<VerifyRecord>& out) {
  for (double beta : o.betas) {
    Timer t;
    Worst w;
    for (const auto& d : draws) {
      const auto host = free_host(g, d);
      for (Vertex x = 0; x < g.n; ++x) {
        std::vector<Vertex> parent;
        const auto dist = bfs_distances(*host, x, &parent);
        const int far = *std::max_element(dist.begin(), dist.end());
        VertexMask boundary(dist.size(), 0);
        for (std::size_t v = 0; v < dist.size(); ++v) boundary[v] = dist[v] == far ? 1 : 0;
        for (Vertex y = 0; y < g.n; ++y) {
          if (y == x) continue;
          std::vector<Vertex> path{y};
          while (path.back() != x) path.push_back(parent[static_cast<std::size_t>(path.back())]);
          std::reverse(path.begin(), path.end());
          const auto r = verify_parity_bound(host, beta, x, y, path, boundary, o.cap);
          // Discrepancy is the violation of K*rhs - lhs >= 0.
          w.add(std::max(0.0, -r.slack), kParityTol, r.tail_bound);
        }
      }
    }
    out.push_back(finish("parity_bound", g.label + "|beta=" + beta_label(beta), w, t));
  }
}

void run_positivity(const SmallGraph& g, const std::vector<Draw>& draws, const SweepOptions& o,
                    std::vector<VerifyRecord>& out) {
  // Qualitative check: first draw only.
  for (double beta : o.betas) {
    Timer t;
    Worst w;
    const auto ghost = ghost_host(g, draws.front());
    for (const auto& pr : g.pairs) {
      const auto p = event_prob_exact(ghost, beta, {}, event_A_f(*ghost, pr.u, pr.v), o.cap);
      // Discrepancy 1 when the probability is not strictly positive.
      w.add(p.value > 0.0 ? 0.0 : 1.0, 0.0, p.error_bound);
    }
    out.push_back(finish("event_positivity", g.label + "|beta=" + beta_label(beta), w, t));
  }
}

}  // namespace

const std::vector<std::string>& identity_names() {
  static const std::vector<std::string> names = {"switching",   "representation", "double_current",  "fk_coupling",
                                                 "increment",   "parity_bound",   "event_positivity"};
  return names;
}

nlohmann::json VerifyRecord::to_json() const {
  return {{"identity", identity},     {"instance", instance}, {"discrepancy", discrepancy},
          {"threshold", threshold},   {"tail_bound", tail_bound}, {"checks", checks},
          {"elapsed", elapsed},       {"pass", pass}};
}

std::vector<VerifyRecord> run_identity_sweep(const SweepOptions& o,
                                             const std::function<void(const VerifyRecord&)>& on_record) {
  for (const auto& name : o.identities)
    if (std::find(identity_names().begin(), identity_names().end(), name) == identity_names().end())
      fail(ErrorCode::invalid_argument, "unknown identity '" + name + "'");
  if (o.draws < 1) fail(ErrorCode::invalid_argument, "sweep needs at least one draw");
  if (o.max_vertices < 2 || o.max_vertices > 5) fail(ErrorCode::invalid_argument, "max_vertices must lie in [2, 5]");
  if (o.betas.empty()) fail(ErrorCode::invalid_argument, "sweep needs at least one beta");

  const auto graphs = connected_graphs(o.max_vertices);
  std::vector<std::vector<VerifyRecord>> per_graph(graphs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < graphs.size(); i = next++) {
      try {
        const auto& g = graphs[i];
        const auto draws = make_draws(g, o.seed, i, o.draws);
        auto& out = per_graph[i];
        if (wanted(o, "switching")) run_switching(g, draws, o, out);
        if (wanted(o, "representation")) run_representation(g, draws, o, out);
        if (wanted(o, "double_current")) run_double(g, draws, o, out);
        if (wanted(o, "fk_coupling")) run_fk(g, draws, o, out);
        if (wanted(o, "increment")) run_increment(g, draws, o, out);
        if (wanted(o, "parity_bound")) run_parity(g, draws, o, out);
        if (wanted(o, "event_positivity")) run_positivity(g, draws, o, out);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int pool = std::max(1, std::min<int>(o.workers, static_cast<int>(graphs.size())));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < pool; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);

  // Canonical order: identity, then graph.
  std::vector<VerifyRecord> records;
  for (const auto& name : identity_names())
    for (const auto& batch : per_graph)
      for (const auto& r : batch)
        if (r.identity == name) records.push_back(r);
  if (on_record)
    for (const auto& r : records) on_record(r);
  return records;
}

}  // namespace rci
