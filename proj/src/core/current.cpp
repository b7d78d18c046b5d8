#include "rcising/current.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "rcising/detail/union_find.hpp"
#include "rcising/error.hpp"

namespace rci {

VertexMask mask_of(int vertex_count, std::span<const Vertex> vertices) {
  VertexMask mask(static_cast<std::size_t>(vertex_count), 0);
  for (Vertex v : vertices) {
    if (v < 0 || v >= vertex_count) fail(ErrorCode::invalid_argument, "vertex out of range in mask");
    mask[static_cast<std::size_t>(v)] = 1;
  }
  return mask;
}

VertexMask full_mask(int vertex_count) { return VertexMask(static_cast<std::size_t>(vertex_count), 1); }

VertexMask base_mask(const WeightedGraph& host) {
  auto mask = full_mask(host.vertex_count());
  if (host.ghost()) mask[static_cast<std::size_t>(*host.ghost())] = 0;
  return mask;
}

Current::Current(GraphPtr host) : host_(std::move(host)) {
  if (!host_) fail(ErrorCode::host, "current needs a host graph");
  counts_.assign(static_cast<std::size_t>(host_->edge_count()), 0);
}

Current Current::from_entries(GraphPtr host, std::span<const std::pair<VertexPair, std::uint32_t>> entries) {
  Current n(std::move(host));
  for (const auto& [pair, value] : entries) n.set(pair.u, pair.v, value);
  return n;
}

std::uint32_t Current::at(Vertex a, Vertex b) const {
  auto e = host_->find_edge(a, b);
  return e ? counts_[static_cast<std::size_t>(*e)] : 0u;
}

void Current::set(Vertex a, Vertex b, std::uint32_t value) {
  auto e = host_->find_edge(a, b);
  if (!e) {
    if (value == 0) return;
    fail(ErrorCode::domain, "pair {" + std::to_string(a) + "," + std::to_string(b) + "} has zero coupling");
  }
  counts_[static_cast<std::size_t>(*e)] = value;
}

bool Current::is_zero() const {
  return std::all_of(counts_.begin(), counts_.end(), [](std::uint32_t c) { return c == 0; });
}

std::string Current::serialize() const {
  std::ostringstream out;
  const auto& edges = host_->edges();
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (counts_[i] != 0) out << edges[i].u << ' ' << edges[i].v << ' ' << counts_[i] << '\n';
  return out.str();
}

Current Current::parse(GraphPtr host, std::string_view text) {
  Current n(std::move(host));
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    long long u = 0, v = 0, m = 0;
    std::string extra;
    if (!(fields >> u >> v >> m) || (fields >> extra) || m < 0 || m > std::numeric_limits<std::uint32_t>::max())
      fail(ErrorCode::invalid_argument, "malformed current line " + std::to_string(line_no));
    n.set(static_cast<Vertex>(u), static_cast<Vertex>(v), static_cast<std::uint32_t>(m));
  }
  return n;
}

std::vector<Vertex> ClusterPartition::members(Vertex v) const {
  std::vector<Vertex> out;
  const Vertex rep = representative[static_cast<std::size_t>(v)];
  for (std::size_t i = 0; i < representative.size(); ++i)
    if (representative[i] == rep) out.push_back(static_cast<Vertex>(i));
  return out;
}

SourceSet sources(const Current& n) {
  const auto& host = n.host();
  std::vector<std::uint8_t> parity(static_cast<std::size_t>(host.vertex_count()), 0);
  const auto& edges = host.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (n.at(static_cast<EdgeId>(i)) & 1u) {
      parity[static_cast<std::size_t>(edges[i].u)] ^= 1u;
      parity[static_cast<std::size_t>(edges[i].v)] ^= 1u;
    }
  }
  SourceSet out;
  for (std::size_t v = 0; v < parity.size(); ++v)
    if (parity[v]) out.push_back(static_cast<Vertex>(v));
  return out;
}

double log_weight(const Current& n, double beta) {
  if (beta < 0.0) fail(ErrorCode::domain, "beta must be non-negative");
  const auto& edges = n.host().edges();
  double total = 0.0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::uint32_t m = n.at(static_cast<EdgeId>(i));
    if (m == 0) continue;
    const double t = beta * edges[i].coupling;
    if (t == 0.0) return -std::numeric_limits<double>::infinity();
    total += m * std::log(t) - std::lgamma(static_cast<double>(m) + 1.0);
  }
  return total;
}

Current restrict(const Current& n, VertexPair pair) {
  Current out = n;
  if (auto e = n.host().find_edge(pair.u, pair.v)) out.set(*e, 0);
  return out;
}

namespace {

bool same_coupling(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

bool host_contains(const WeightedGraph& inner, const WeightedGraph& outer) {
  if (inner.base_vertex_count() > outer.vertex_count()) return false;
  for (const auto& e : inner.edges()) {
    if (inner.is_ghost(e.u) || inner.is_ghost(e.v)) {
      if (!outer.ghost() || inner.vertex_count() != outer.vertex_count()) return false;
    }
    auto f = outer.find_edge(e.u, e.v);
    if (!f || !same_coupling(outer.edge(*f).coupling, e.coupling)) return false;
  }
  return true;
}

}  // namespace

Current embed(const Current& n, GraphPtr host) {
  if (n.host_ptr() == host) return n;
  if (!host || !host_contains(n.host(), *host)) fail(ErrorCode::host, "current host is not contained in the target host");
  Current out(host);
  const auto& edges = n.host().edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto m = n.at(static_cast<EdgeId>(i));
    if (m != 0) out.set(*host->find_edge(edges[i].u, edges[i].v), m);
  }
  return out;
}

Current add(const Current& a, const Current& b) {
  Current lhs = a;
  Current rhs = b;
  if (a.host_ptr() != b.host_ptr()) {
    if (host_contains(a.host(), b.host())) {
      lhs = embed(a, b.host_ptr());
    } else if (host_contains(b.host(), a.host())) {
      rhs = embed(b, a.host_ptr());
    } else {
      fail(ErrorCode::host, "currents live on incompatible hosts");
    }
  }
  auto out = lhs;
  auto dst = out.multiplicities();
  auto src = rhs.multiplicities();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const std::uint64_t sum = std::uint64_t{dst[i]} + src[i];
    if (sum > std::numeric_limits<std::uint32_t>::max()) fail(ErrorCode::domain, "multiplicity overflow in current sum");
    dst[i] = static_cast<std::uint32_t>(sum);
  }
  return out;
}

ClusterPartition clusters(const Current& n) {
  const auto& host = n.host();
  detail::UnionFind uf(host.vertex_count());
  const auto& edges = host.edges();
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (n.at(static_cast<EdgeId>(i)) > 0) uf.unite(edges[i].u, edges[i].v);

  ClusterPartition out;
  const auto count = static_cast<std::size_t>(host.vertex_count());
  out.representative.assign(count, -1);
  out.size.assign(count, 0);
  std::vector<Vertex> root_min(count, -1);
  for (std::size_t v = 0; v < count; ++v) {
    const auto r = static_cast<std::size_t>(uf.find(static_cast<int>(v)));
    if (root_min[r] < 0) root_min[r] = static_cast<Vertex>(v);
    out.representative[v] = root_min[r];
    ++out.size[static_cast<std::size_t>(root_min[r])];
  }
  return out;
}

namespace {

// Breadth-first search over positive-multiplicity pairs restricted to `region`.
std::vector<char> reach(const Current& n, Vertex from, const VertexMask* region) {
  const auto& host = n.host();
  std::vector<char> seen(static_cast<std::size_t>(host.vertex_count()), 0);
  std::deque<Vertex> queue{from};
  seen[static_cast<std::size_t>(from)] = 1;
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    for (const auto& inc : host.incident(v)) {
      const auto w = static_cast<std::size_t>(inc.neighbor);
      if (seen[w] || n.at(inc.edge) == 0) continue;
      if (region && !(*region)[w]) continue;
      seen[w] = 1;
      queue.push_back(inc.neighbor);
    }
  }
  return seen;
}

void check_mask(const Current& n, const VertexMask& mask) {
  if (mask.size() != static_cast<std::size_t>(n.host().vertex_count()))
    fail(ErrorCode::invalid_argument, "vertex mask does not match the host size");
}

void check_vertex(const Current& n, Vertex v) {
  if (v < 0 || v >= n.host().vertex_count()) fail(ErrorCode::invalid_argument, "vertex out of range");
}

// Edmonds-Karp on the undirected multigraph: one arc pair per pair of
// vertices, each arc carrying the full multiplicity as capacity.
class FlowNetwork {
 public:
  explicit FlowNetwork(int nodes) : adj_(static_cast<std::size_t>(nodes)) {}

  void add_undirected(int a, int b, std::int64_t cap) {
    const auto ia = arcs_.size();
    arcs_.push_back({b, cap, ia + 1});
    arcs_.push_back({a, cap, ia});
    adj_[static_cast<std::size_t>(a)].push_back(ia);
    adj_[static_cast<std::size_t>(b)].push_back(ia + 1);
  }

  void add_directed(int a, int b, std::int64_t cap) {
    const auto ia = arcs_.size();
    arcs_.push_back({b, cap, ia + 1});
    arcs_.push_back({a, 0, ia});
    adj_[static_cast<std::size_t>(a)].push_back(ia);
    adj_[static_cast<std::size_t>(b)].push_back(ia + 1);
  }

  std::int64_t max_flow(int source, int sink) {
    std::int64_t total = 0;
    std::vector<std::size_t> via(adj_.size());
    std::vector<char> seen(adj_.size());
    while (true) {
      std::fill(seen.begin(), seen.end(), 0);
      std::deque<int> queue{source};
      seen[static_cast<std::size_t>(source)] = 1;
      while (!queue.empty() && !seen[static_cast<std::size_t>(sink)]) {
        const int v = queue.front();
        queue.pop_front();
        for (auto ai : adj_[static_cast<std::size_t>(v)]) {
          const auto& arc = arcs_[ai];
          if (arc.cap <= 0 || seen[static_cast<std::size_t>(arc.to)]) continue;
          seen[static_cast<std::size_t>(arc.to)] = 1;
          via[static_cast<std::size_t>(arc.to)] = ai;
          queue.push_back(arc.to);
        }
      }
      if (!seen[static_cast<std::size_t>(sink)]) return total;
      std::int64_t bottleneck = std::numeric_limits<std::int64_t>::max();
      for (int v = sink; v != source; v = arcs_[arcs_[via[static_cast<std::size_t>(v)]].rev].to)
        bottleneck = std::min(bottleneck, arcs_[via[static_cast<std::size_t>(v)]].cap);
      for (int v = sink; v != source; v = arcs_[arcs_[via[static_cast<std::size_t>(v)]].rev].to) {
        auto& arc = arcs_[via[static_cast<std::size_t>(v)]];
        arc.cap -= bottleneck;
        arcs_[arc.rev].cap += bottleneck;
      }
      total += bottleneck;
    }
  }

 private:
  struct Arc {
    int to;
    std::int64_t cap;
    std::size_t rev;
  };
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> adj_;
};

}  // namespace

bool connected_within(const Current& n, Vertex x, Vertex y, const VertexMask& region) {
  check_mask(n, region);
  check_vertex(n, x);
  check_vertex(n, y);
  if (!region[static_cast<std::size_t>(x)] || !region[static_cast<std::size_t>(y)])
    fail(ErrorCode::invalid_argument, "connection endpoints must lie in the region");
  if (x == y) return true;
  return reach(n, x, &region)[static_cast<std::size_t>(y)] != 0;
}

bool connected_to_set(const Current& n, Vertex x, const VertexMask& targets) {
  check_mask(n, targets);
  check_vertex(n, x);
  const auto seen = reach(n, x, nullptr);
  for (std::size_t v = 0; v < seen.size(); ++v)
    if (seen[v] && targets[v]) return true;
  return false;
}

int flow(const Current& n, Vertex x, Vertex y, const VertexMask& region) {
  check_mask(n, region);
  check_vertex(n, x);
  check_vertex(n, y);
  if (x == y) fail(ErrorCode::invalid_argument, "flow endpoints must differ");
  if (!region[static_cast<std::size_t>(x)] || !region[static_cast<std::size_t>(y)])
    fail(ErrorCode::invalid_argument, "flow endpoints must lie in the region");
  const auto& host = n.host();
  FlowNetwork net(host.vertex_count());
  const auto& edges = host.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto m = n.at(static_cast<EdgeId>(i));
    if (m == 0 || !region[static_cast<std::size_t>(edges[i].u)] || !region[static_cast<std::size_t>(edges[i].v)]) continue;
    net.add_undirected(edges[i].u, edges[i].v, m);
  }
  return static_cast<int>(net.max_flow(x, y));
}

int flow_to_boundary(const Current& n, Vertex x, const VertexMask& boundary) {
  check_mask(n, boundary);
  check_vertex(n, x);
  if (boundary[static_cast<std::size_t>(x)]) fail(ErrorCode::invalid_argument, "source vertex lies on the boundary");
  const auto& host = n.host();
  const int sink = host.vertex_count();
  FlowNetwork net(sink + 1);
  const auto& edges = host.edges();
  std::int64_t degree_total = 0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto m = n.at(static_cast<EdgeId>(i));
    if (m == 0) continue;
    net.add_undirected(edges[i].u, edges[i].v, m);
    degree_total += m;
  }
  // Capacity larger than any cut through the multigraph acts as infinite.
  const std::int64_t unbounded = degree_total + 1;
  for (int v = 0; v < sink; ++v)
    if (boundary[static_cast<std::size_t>(v)]) net.add_directed(v, sink, unbounded);
  return static_cast<int>(net.max_flow(x, sink));
}

namespace {

EdgeId require_edge(const WeightedGraph& host, Vertex a, Vertex b) {
  auto e = host.find_edge(a, b);
  if (!e) fail(ErrorCode::domain, "pair {" + std::to_string(a) + "," + std::to_string(b) + "} has zero coupling");
  return *e;
}

}  // namespace

bool in_event_A_f(const Current& n, Vertex x, Vertex y, const VertexMask& region) {
  const auto& host = n.host();
  if (!host.ghost()) fail(ErrorCode::host, "event A_f needs a host with a ghost vertex");
  check_mask(n, region);
  const Vertex delta = *host.ghost();
  if (region[static_cast<std::size_t>(delta)]) fail(ErrorCode::invalid_argument, "region must exclude the ghost");
  const EdgeId e = require_edge(host, x, y);
  if (n.at(e) != 1) return false;
  Current cut = n;
  cut.set(e, 0);
  const auto from_x = reach(cut, x, nullptr);
  if (!from_x[static_cast<std::size_t>(delta)]) return false;
  const auto from_y = reach(cut, y, nullptr);
  if (!from_y[static_cast<std::size_t>(delta)]) return false;
  return !connected_within(cut, x, y, region);
}

bool in_event_A_inf_proxy(const Current& n, Vertex x, Vertex y, const VertexMask& inner_region,
                          const VertexMask& outer_boundary) {
  check_mask(n, inner_region);
  check_mask(n, outer_boundary);
  const EdgeId e = require_edge(n.host(), x, y);
  if (n.at(e) != 1) return false;
  Current cut = n;
  cut.set(e, 0);
  if (!connected_to_set(cut, x, outer_boundary) || !connected_to_set(cut, y, outer_boundary)) return false;
  return !connected_within(cut, x, y, inner_region);
}

std::vector<VertexPair> U_set(const Current& n, std::span<const VertexPair> candidates,
                              const VertexMask& inner_region, const VertexMask& outer_boundary) {
  std::vector<VertexPair> out;
  for (const auto& p : candidates)
    if (in_event_A_inf_proxy(n, p.u, p.v, inner_region, outer_boundary)) out.push_back(p);
  return out;
}

Current increment(const Current& n, VertexPair pair) {
  const EdgeId e = require_edge(n.host(), pair.u, pair.v);
  if (n.at(e) == std::numeric_limits<std::uint32_t>::max()) fail(ErrorCode::domain, "multiplicity overflow");
  Current out = n;
  out.set(e, n.at(e) + 1);
  return out;
}

Current decrement_two(const Current& n, VertexPair first, VertexPair second) {
  const EdgeId a = require_edge(n.host(), first.u, first.v);
  const EdgeId b = require_edge(n.host(), second.u, second.v);
  const std::uint32_t need_a = (a == b) ? 2u : 1u;
  if (n.at(a) < need_a || n.at(b) < 1u) fail(ErrorCode::domain, "decrement below zero multiplicity");
  Current out = n;
  out.set(a, out.at(a) - 1);
  out.set(b, out.at(b) - 1);
  return out;
}

bool is_admissible(const ClusterPartition& partition, Vertex x, Vertex y, Vertex x_prime, Vertex y_prime) {
  return partition.same(x, y) && !partition.same(x, x_prime) && !partition.same(x, y_prime);
}

std::vector<EdgeId> path_edges(std::span<const Vertex> path, const WeightedGraph& host) {
  if (path.size() < 2) fail(ErrorCode::domain, "path needs at least two vertices");
  std::vector<Vertex> sorted(path.begin(), path.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    fail(ErrorCode::domain, "path revisits a vertex");
  std::vector<EdgeId> out;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) out.push_back(require_edge(host, path[i], path[i + 1]));
  return out;
}

std::int64_t parity_flip_count(const Current& n, std::span<const Vertex> path, int cap) {
  if (cap < 1) fail(ErrorCode::domain, "cap must be positive");
  std::int64_t count = 1;
  for (EdgeId e : path_edges(path, n.host())) {
    // Even current -> odd values in [1, cap]; odd current -> even values in [2, cap].
    const std::int64_t choices = (n.at(e) % 2 == 0) ? (cap + 1) / 2 : cap / 2;
    count *= choices;
  }
  return count;
}

double K_constant(std::span<const Vertex> path, double beta, const WeightedGraph& host) {
  double k = 1.0;
  for (EdgeId e : path_edges(path, host)) {
    const double t = beta * host.edge(e).coupling;
    if (!(t > 0.0)) fail(ErrorCode::domain, "K constant needs beta*J > 0 on every path pair");
    const double even_over_odd = 1.0 / std::tanh(t);
    // sinh t / (cosh t - 1) = coth(t/2), evaluated without cancellation.
    const double odd_over_even = 1.0 / std::tanh(0.5 * t);
    k *= std::max(even_over_odd, odd_over_even);
  }
  return k;
}

}  // namespace rci
