#include "rcising/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rcising/error.hpp"

namespace rci {

WeightedGraph::WeightedGraph(int vertex_count, std::vector<Edge> edges, std::optional<Vertex> ghost)
    : vertex_count_(vertex_count), edges_(std::move(edges)), ghost_(ghost) {
  if (vertex_count_ < 0) fail(ErrorCode::invalid_argument, "negative vertex count");
  if (ghost_ && *ghost_ != vertex_count_ - 1) fail(ErrorCode::invalid_argument, "ghost must be the last vertex");
  for (auto& e : edges_) {
    if (e.u == e.v) fail(ErrorCode::domain, "self pair " + std::to_string(e.u));
    if (e.u < 0 || e.v < 0 || e.u >= vertex_count_ || e.v >= vertex_count_)
      fail(ErrorCode::domain, "edge endpoint out of range");
    if (!(e.coupling > 0.0) || !std::isfinite(e.coupling))
      fail(ErrorCode::domain, "edge {" + std::to_string(e.u) + "," + std::to_string(e.v) + "} has non-positive coupling");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  });
  lookup_.reserve(edges_.size() * 2);
  std::vector<std::size_t> degree(static_cast<std::size_t>(vertex_count_), 0);
  row_sums_.assign(static_cast<std::size_t>(vertex_count_), 0.0);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    if (!lookup_.emplace(key(e.u, e.v), static_cast<EdgeId>(i)).second)
      fail(ErrorCode::domain, "duplicate pair {" + std::to_string(e.u) + "," + std::to_string(e.v) + "}");
    ++degree[static_cast<std::size_t>(e.u)];
    ++degree[static_cast<std::size_t>(e.v)];
    row_sums_[static_cast<std::size_t>(e.u)] += e.coupling;
    row_sums_[static_cast<std::size_t>(e.v)] += e.coupling;
  }
  offsets_.assign(static_cast<std::size_t>(vertex_count_) + 1, 0);
  for (int v = 0; v < vertex_count_; ++v) offsets_[static_cast<std::size_t>(v) + 1] = offsets_[static_cast<std::size_t>(v)] + degree[static_cast<std::size_t>(v)];
  incidences_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    incidences_[fill[static_cast<std::size_t>(e.u)]++] = {e.v, static_cast<EdgeId>(i)};
    incidences_[fill[static_cast<std::size_t>(e.v)]++] = {e.u, static_cast<EdgeId>(i)};
  }
}

std::uint64_t WeightedGraph::key(Vertex a, Vertex b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

std::span<const Incidence> WeightedGraph::incident(Vertex v) const {
  const auto i = static_cast<std::size_t>(v);
  return {incidences_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::optional<EdgeId> WeightedGraph::find_edge(Vertex a, Vertex b) const {
  if (a == b) return std::nullopt;
  auto it = lookup_.find(key(a, b));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

double WeightedGraph::coupling(Vertex a, Vertex b) const {
  auto e = find_edge(a, b);
  return e ? edges_[static_cast<std::size_t>(*e)].coupling : 0.0;
}

bool WeightedGraph::is_ghost_edge(EdgeId e) const {
  if (!ghost_) return false;
  const auto& edge = edges_.at(static_cast<std::size_t>(e));
  return edge.u == *ghost_ || edge.v == *ghost_;
}

bool WeightedGraph::connected() const {
  if (vertex_count_ <= 1) return true;
  std::vector<char> seen(static_cast<std::size_t>(vertex_count_), 0);
  std::vector<Vertex> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    Vertex v = stack.back();
    stack.pop_back();
    for (const auto& inc : incident(v)) {
      if (!seen[static_cast<std::size_t>(inc.neighbor)]) {
        seen[static_cast<std::size_t>(inc.neighbor)] = 1;
        ++count;
        stack.push_back(inc.neighbor);
      }
    }
  }
  return count == vertex_count_;
}

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::box: return "box";
    case FamilyKind::torus: return "torus";
    case FamilyKind::tree: return "tree";
    case FamilyKind::long_range: return "longrange";
    case FamilyKind::table: return "table";
  }
  return "unknown";
}

FamilyKind family_from_string(const std::string& name) {
  if (name == "box") return FamilyKind::box;
  if (name == "torus") return FamilyKind::torus;
  if (name == "tree") return FamilyKind::tree;
  if (name == "longrange") return FamilyKind::long_range;
  if (name == "table") return FamilyKind::table;
  fail(ErrorCode::config, "unknown graph family '" + name + "'");
}

// ---------------------------------------------------------------------------
// Coupling fields

CouplingField CouplingField::nearest_neighbor(const FiniteGraph& graph, double j0) {
  CouplingField f;
  f.kind_ = Kind::nearest_neighbor;
  f.j0_ = j0;
  for (std::size_t i = 0; i < graph.pairs.size(); ++i)
    f.entries_[graph.pairs[i]] = j0 * graph.bond_multiplicity[i];
  return f;
}

CouplingField CouplingField::power_law(const FiniteGraph& graph, double exponent, double j0) {
  CouplingField f;
  f.kind_ = Kind::power_law;
  f.j0_ = j0;
  f.exponent_ = exponent;
  for (const auto& p : graph.pairs) {
    const double dist = std::abs(graph.coordinates[static_cast<std::size_t>(p.u)][0] -
                                 graph.coordinates[static_cast<std::size_t>(p.v)][0]);
    f.entries_[p] = j0 * std::pow(dist, -exponent);
  }
  return f;
}

CouplingField CouplingField::table(std::map<VertexPair, double> entries) {
  CouplingField f;
  f.kind_ = Kind::table;
  f.entries_ = std::move(entries);
  return f;
}

double CouplingField::at(VertexPair pair) const {
  auto it = entries_.find(pair);
  return it == entries_.end() ? 0.0 : it->second;
}

// ---------------------------------------------------------------------------
// Constructors

namespace {

std::int64_t checked_power(std::int64_t base, int exponent, std::int64_t limit) {
  std::int64_t value = 1;
  for (int i = 0; i < exponent; ++i) {
    if (value > limit / std::max<std::int64_t>(base, 1)) return limit + 1;
    value *= base;
  }
  return value;
}

}  // namespace

FiniteGraph build_box(int dimension, int side, bool wrap, const GraphLimits& limits) {
  if (dimension < 1) fail(ErrorCode::invalid_argument, "dimension must be positive");
  if (side < 1) fail(ErrorCode::invalid_argument, "side must be positive");
  const std::int64_t n = checked_power(side, dimension, limits.max_vertices);
  if (n > limits.max_vertices)
    fail(ErrorCode::size, "box has more than " + std::to_string(limits.max_vertices) + " vertices");

  FiniteGraph g;
  g.family = {wrap ? FamilyKind::torus : FamilyKind::box, dimension, side};
  g.vertex_count = static_cast<int>(n);
  g.coordinates.resize(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(dimension)));
  std::vector<std::int64_t> stride(static_cast<std::size_t>(dimension), 1);
  for (int d = 1; d < dimension; ++d) stride[static_cast<std::size_t>(d)] = stride[static_cast<std::size_t>(d) - 1] * side;
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t rest = i;
    for (int d = 0; d < dimension; ++d) {
      g.coordinates[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)] = static_cast<int>(rest % side);
      rest /= side;
    }
  }

  std::map<VertexPair, int> bonds;
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& c = g.coordinates[static_cast<std::size_t>(i)];
    for (int d = 0; d < dimension; ++d) {
      const int cd = c[static_cast<std::size_t>(d)];
      std::int64_t j = -1;
      if (cd + 1 < side) {
        j = i + stride[static_cast<std::size_t>(d)];
      } else if (wrap) {
        j = i - static_cast<std::int64_t>(cd) * stride[static_cast<std::size_t>(d)];
      }
      if (j < 0 || j == i) continue;
      ++bonds[VertexPair::of(static_cast<Vertex>(i), static_cast<Vertex>(j))];
    }
  }
  for (const auto& [pair, count] : bonds) {
    g.pairs.push_back(pair);
    g.bond_multiplicity.push_back(count);
  }
  return g;
}

FiniteGraph build_tree_ball(int degree, int depth, const GraphLimits& limits) {
  if (degree < 3) fail(ErrorCode::invalid_argument, "tree degree must be at least 3");
  if (depth < 0) fail(ErrorCode::invalid_argument, "tree depth must be non-negative");
  std::int64_t total = 1;
  std::int64_t level = 1;
  for (int d = 1; d <= depth; ++d) {
    level *= (d == 1 ? degree : degree - 1);
    total += level;
    if (total > limits.max_vertices)
      fail(ErrorCode::size, "tree ball has more than " + std::to_string(limits.max_vertices) + " vertices");
  }

  FiniteGraph g;
  g.family = {FamilyKind::tree, 0, 0, degree, depth};
  g.vertex_count = static_cast<int>(total);
  g.coordinates.reserve(static_cast<std::size_t>(total));
  g.coordinates.push_back({});
  std::vector<Vertex> frontier{0};
  for (int d = 1; d <= depth; ++d) {
    std::vector<Vertex> next;
    for (Vertex parent : frontier) {
      const int children = (d == 1) ? degree : degree - 1;
      for (int c = 0; c < children; ++c) {
        auto address = g.coordinates[static_cast<std::size_t>(parent)];
        address.push_back(c);
        const auto child = static_cast<Vertex>(g.coordinates.size());
        g.coordinates.push_back(std::move(address));
        g.pairs.push_back(VertexPair::of(parent, child));
        g.bond_multiplicity.push_back(1);
        next.push_back(child);
      }
    }
    frontier = std::move(next);
  }
  std::sort(g.pairs.begin(), g.pairs.end());
  return g;
}

LongRangeChain build_long_range_chain(int length, double exponent, double j0, const GraphLimits& limits) {
  if (length < 2) fail(ErrorCode::invalid_argument, "chain length must be at least 2");
  if (!(exponent > 1.0))
    fail(ErrorCode::condition, "power-law exponent must exceed 1 for finite row sums (C4)");
  if (length > limits.max_vertices) fail(ErrorCode::size, "chain longer than the vertex limit");
  const std::int64_t pair_count = static_cast<std::int64_t>(length) * (length - 1) / 2;
  if (pair_count > limits.max_pairs) fail(ErrorCode::size, "chain has too many pairs");

  FiniteGraph g;
  g.family = {FamilyKind::long_range, 1, 0, 0, 0, length, exponent};
  g.vertex_count = length;
  for (int i = 0; i < length; ++i) g.coordinates.push_back({i});
  for (int i = 0; i < length; ++i)
    for (int j = i + 1; j < length; ++j) {
      g.pairs.push_back({i, j});
      g.bond_multiplicity.push_back(1);
    }
  auto coupling = CouplingField::power_law(g, exponent, j0);
  return {std::move(g), std::move(coupling)};
}

FiniteGraph build_table_graph(int vertex_count, const std::map<VertexPair, double>& table) {
  if (vertex_count < 1) fail(ErrorCode::invalid_argument, "table graph needs at least one vertex");
  FiniteGraph g;
  g.family = {FamilyKind::table};
  g.vertex_count = vertex_count;
  for (int i = 0; i < vertex_count; ++i) g.coordinates.push_back({i});
  for (const auto& [pair, j] : table) {
    if (pair.u == pair.v) fail(ErrorCode::domain, "self pair in coupling table");
    if (pair.u < 0 || pair.v >= vertex_count) fail(ErrorCode::domain, "coupling table vertex out of range");
    if (j > 0.0) {
      g.pairs.push_back(pair);
      g.bond_multiplicity.push_back(1);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Ghost vertex

GhostGraph ghost_augment(const FiniteGraph& graph, const CouplingField& coupling,
                         const FamilyDescriptor& ambient, double tail_tol, std::int64_t radius_cap) {
  if (ambient.kind != graph.family.kind)
    fail(ErrorCode::invalid_argument, "ambient family " + to_string(ambient.kind) +
                                          " does not match graph family " + to_string(graph.family.kind));
  GhostGraph out;
  out.base = graph;
  out.coupling = coupling;
  out.ghost_coupling.assign(static_cast<std::size_t>(graph.vertex_count), 0.0);

  switch (graph.family.kind) {
    case FamilyKind::box: {
      if (coupling.kind() != CouplingField::Kind::nearest_neighbor)
        fail(ErrorCode::invalid_argument, "box ghost coupling needs a nearest-neighbour field");
      const int side = graph.family.side;
      for (int x = 0; x < graph.vertex_count; ++x) {
        int outside = 0;
        for (int c : graph.coordinates[static_cast<std::size_t>(x)]) {
          outside += (c == 0) ? 1 : 0;
          outside += (c == side - 1) ? 1 : 0;
        }
        out.ghost_coupling[static_cast<std::size_t>(x)] = coupling.j0() * outside;
      }
      break;
    }
    case FamilyKind::tree: {
      if (coupling.kind() != CouplingField::Kind::nearest_neighbor)
        fail(ErrorCode::invalid_argument, "tree ghost coupling needs a nearest-neighbour field");
      for (int x = 0; x < graph.vertex_count; ++x) {
        const auto level = static_cast<int>(graph.coordinates[static_cast<std::size_t>(x)].size());
        if (level != graph.family.depth) continue;
        const int outside = (level == 0) ? graph.family.degree : graph.family.degree - 1;
        out.ghost_coupling[static_cast<std::size_t>(x)] = coupling.j0() * outside;
      }
      break;
    }
    case FamilyKind::long_range: {
      const double s = coupling.exponent();
      const double j0 = coupling.j0();
      if (!(s > 1.0)) fail(ErrorCode::condition, "ghost coupling diverges for exponent <= 1");
      if (!(tail_tol > 0.0)) fail(ErrorCode::precision, "tail tolerance must be positive");
      // Integral test: sum_{k > a} k^-s <= a^(1-s)/(s-1); two half-lines per vertex.
      const double needed = std::pow(2.0 * j0 / ((s - 1.0) * tail_tol), 1.0 / (s - 1.0));
      if (!(needed <= static_cast<double>(radius_cap)))
        fail(ErrorCode::precision, "tail tolerance needs radius " + std::to_string(needed) +
                                       " beyond cap " + std::to_string(radius_cap));
      const auto radius = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(needed)));
      const std::int64_t length = graph.vertex_count;
      // suffix[k] = sum_{j=k}^{top} j^-s, accumulated from the small end.
      const std::int64_t top = length + radius + 1;
      std::vector<double> suffix(static_cast<std::size_t>(top) + 2, 0.0);
      for (std::int64_t k = top; k >= 1; --k)
        suffix[static_cast<std::size_t>(k)] = suffix[static_cast<std::size_t>(k) + 1] + std::pow(static_cast<double>(k), -s);
      auto partial = [&](std::int64_t from, std::int64_t count) {
        return suffix[static_cast<std::size_t>(from)] - suffix[static_cast<std::size_t>(from + count)];
      };
      double worst = 0.0;
      for (std::int64_t x = 0; x < length; ++x) {
        const std::int64_t left = x + 1;        // nearest outside vertex on the left: -1
        const std::int64_t right = length - x;  // nearest outside vertex on the right: length
        const double sum = partial(left, radius) + partial(right, radius);
        out.ghost_coupling[static_cast<std::size_t>(x)] = j0 * sum;
        const double rem = j0 / (s - 1.0) *
                           (std::pow(static_cast<double>(left + radius - 1), 1.0 - s) +
                            std::pow(static_cast<double>(right + radius - 1), 1.0 - s));
        worst = std::max(worst, rem);
      }
      out.tail_error = worst;
      out.radius = radius;
      break;
    }
    case FamilyKind::torus:
    case FamilyKind::table:
      break;
  }
  return out;
}

GraphPtr make_weighted(const FiniteGraph& graph, const CouplingField& coupling) {
  std::vector<Edge> edges;
  edges.reserve(graph.pairs.size());
  for (const auto& p : graph.pairs) {
    const double j = coupling.at(p);
    if (j > 0.0) edges.push_back({p.u, p.v, j});
  }
  return std::make_shared<const WeightedGraph>(graph.vertex_count, std::move(edges));
}

GraphPtr make_weighted(const GhostGraph& ghost) {
  std::vector<Edge> edges;
  for (const auto& p : ghost.base.pairs) {
    const double j = ghost.coupling.at(p);
    if (j > 0.0) edges.push_back({p.u, p.v, j});
  }
  const Vertex delta = ghost.base.vertex_count;
  for (Vertex x = 0; x < delta; ++x) {
    const double j = ghost.ghost_coupling[static_cast<std::size_t>(x)];
    if (j > 0.0) edges.push_back({x, delta, j});
  }
  return std::make_shared<const WeightedGraph>(delta + 1, std::move(edges), delta);
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  out["pass"] = all_pass();
  auto& list = out["conditions"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json entry{{"condition", c.condition}, {"pass", c.pass}};
    if (!c.witness.empty()) entry["witness"] = c.witness;
    list.push_back(std::move(entry));
  }
  return out;
}

namespace {

std::string pair_text(VertexPair p) {
  return "{" + std::to_string(p.u) + "," + std::to_string(p.v) + "}";
}

bool same_coupling(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Translation invariance of the coupling table on a lattice-coordinate family.
// `periodic` tori wrap; open boxes and chains only compare translates that stay inside.
ValidationReport::Check check_translations(const FiniteGraph& graph, const CouplingField& coupling, bool periodic) {
  ValidationReport::Check check{"C2", true, {}};
  const int dim = static_cast<int>(graph.coordinates.empty() ? 0 : graph.coordinates[0].size());
  int side = graph.family.side;
  if (graph.family.kind == FamilyKind::long_range) side = graph.family.length;
  if (dim == 0 || side <= 1) return check;

  std::map<std::vector<int>, Vertex> index;
  for (int v = 0; v < graph.vertex_count; ++v) index[graph.coordinates[static_cast<std::size_t>(v)]] = v;

  // Enumerate translation vectors: [0, side) per axis on a torus, (-side, side) otherwise.
  const int lo = periodic ? 0 : -(side - 1);
  std::vector<int> shift(static_cast<std::size_t>(dim), lo);
  auto translate = [&](Vertex v, std::vector<int>& out) {
    out = graph.coordinates[static_cast<std::size_t>(v)];
    for (int d = 0; d < dim; ++d) {
      int c = out[static_cast<std::size_t>(d)] + shift[static_cast<std::size_t>(d)];
      if (periodic) c = ((c % side) + side) % side;
      if (c < 0 || c >= side) return false;
      out[static_cast<std::size_t>(d)] = c;
    }
    return true;
  };
  std::vector<int> cu, cv;
  while (true) {
    for (const auto& [pair, j] : coupling.entries()) {
      if (!translate(pair.u, cu) || !translate(pair.v, cv)) continue;
      const auto tu = index.at(cu);
      const auto tv = index.at(cv);
      if (tu == tv) continue;
      const double tj = coupling.at(VertexPair::of(tu, tv));
      if (!same_coupling(j, tj)) {
        check.pass = false;
        check.witness = "J" + pair_text(pair) + "=" + std::to_string(j) + " but J" +
                        pair_text(VertexPair::of(tu, tv)) + "=" + std::to_string(tj);
        return check;
      }
    }
    int d = 0;
    for (; d < dim; ++d) {
      if (++shift[static_cast<std::size_t>(d)] < side) break;
      shift[static_cast<std::size_t>(d)] = lo;
    }
    if (d == dim) break;
  }
  return check;
}

}  // namespace

ValidationReport validate_conditions(const FiniteGraph& graph, const CouplingField& coupling) {
  ValidationReport report;

  ValidationReport::Check c1{"C1", true, {}};
  for (const auto& [pair, j] : coupling.entries()) {
    if (j < 0.0 || std::isnan(j)) {
      c1.pass = false;
      c1.witness = "J" + pair_text(pair) + "=" + std::to_string(j);
      break;
    }
  }
  report.checks.push_back(c1);

  switch (graph.family.kind) {
    case FamilyKind::torus:
      report.checks.push_back(check_translations(graph, coupling, true));
      break;
    case FamilyKind::box:
    case FamilyKind::long_range:
      report.checks.push_back(check_translations(graph, coupling, false));
      break;
    case FamilyKind::tree: {
      // The automorphism group of the regular tree is edge-transitive.
      ValidationReport::Check c2{"C2", true, {}};
      const auto& entries = coupling.entries();
      if (!entries.empty()) {
        const auto& [first_pair, first] = *entries.begin();
        for (const auto& [pair, j] : entries) {
          if (!same_coupling(j, first)) {
            c2.pass = false;
            c2.witness = "J" + pair_text(first_pair) + "=" + std::to_string(first) + " but J" +
                         pair_text(pair) + "=" + std::to_string(j);
            break;
          }
        }
      }
      report.checks.push_back(c2);
      break;
    }
    case FamilyKind::table:
      report.checks.push_back({"C2", true, "no translation structure on explicit tables"});
      break;
  }

  ValidationReport::Check c3{"C3", true, {}};
  if (graph.vertex_count > 1) {
    std::vector<Edge> positive;
    for (const auto& [pair, j] : coupling.entries())
      if (j > 0.0 && pair.u >= 0 && pair.v < graph.vertex_count) positive.push_back({pair.u, pair.v, j});
    const WeightedGraph wg(graph.vertex_count, std::move(positive));
    if (!wg.connected()) {
      std::vector<char> seen(static_cast<std::size_t>(graph.vertex_count), 0);
      std::deque<Vertex> queue{0};
      seen[0] = 1;
      while (!queue.empty()) {
        Vertex v = queue.front();
        queue.pop_front();
        for (const auto& inc : wg.incident(v))
          if (!seen[static_cast<std::size_t>(inc.neighbor)]) {
            seen[static_cast<std::size_t>(inc.neighbor)] = 1;
            queue.push_back(inc.neighbor);
          }
      }
      const auto it = std::find(seen.begin(), seen.end(), 0);
      c3.pass = false;
      c3.witness = "vertex " + std::to_string(it - seen.begin()) + " is not reachable from vertex 0";
    }
  }
  report.checks.push_back(c3);

  ValidationReport::Check c4{"C4", true, {}};
  if (coupling.kind() == CouplingField::Kind::power_law && !(coupling.exponent() > 1.0)) {
    // sum_{k<=N} k^-s >= sum_{k<=N} 1/k >= log(N+1) for s <= 1: unbounded in N.
    const double n = 1e6;
    double partial = 0.0;
    for (int k = 1; k <= static_cast<int>(n); ++k) partial += std::pow(static_cast<double>(k), -coupling.exponent());
    c4.pass = false;
    std::ostringstream w;
    w << "row of vertex 0 diverges: partial sum up to distance 1e6 is " << coupling.j0() * partial
      << " >= J0*log(1e6+1)=" << coupling.j0() * std::log(n + 1.0);
    c4.witness = w.str();
  } else {
    std::vector<double> rows(static_cast<std::size_t>(graph.vertex_count), 0.0);
    for (const auto& [pair, j] : coupling.entries()) {
      if (pair.u < 0 || pair.v >= graph.vertex_count) continue;
      rows[static_cast<std::size_t>(pair.u)] += j;
      rows[static_cast<std::size_t>(pair.v)] += j;
    }
    for (std::size_t v = 0; v < rows.size(); ++v) {
      if (!std::isfinite(rows[v])) {
        c4.pass = false;
        c4.witness = "row of vertex " + std::to_string(v) + " is not finite";
        break;
      }
    }
  }
  report.checks.push_back(c4);
  return report;
}

// ---------------------------------------------------------------------------
// Geometry helpers

std::vector<int> family_distances(const FiniteGraph& graph, Vertex from) {
  std::vector<int> dist(static_cast<std::size_t>(graph.vertex_count), -1);
  if (graph.family.kind == FamilyKind::long_range) {
    for (int v = 0; v < graph.vertex_count; ++v) dist[static_cast<std::size_t>(v)] = std::abs(v - from);
    return dist;
  }
  std::vector<std::vector<Vertex>> adj(static_cast<std::size_t>(graph.vertex_count));
  for (const auto& p : graph.pairs) {
    adj[static_cast<std::size_t>(p.u)].push_back(p.v);
    adj[static_cast<std::size_t>(p.v)].push_back(p.u);
  }
  std::deque<Vertex> queue{from};
  dist[static_cast<std::size_t>(from)] = 0;
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    for (Vertex w : adj[static_cast<std::size_t>(v)])
      if (dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
        queue.push_back(w);
      }
  }
  return dist;
}

Vertex center_vertex(const FiniteGraph& graph) {
  switch (graph.family.kind) {
    case FamilyKind::box:
    case FamilyKind::torus:
      return vertex_at(graph, std::vector<int>(static_cast<std::size_t>(graph.family.dimension), graph.family.side / 2));
    case FamilyKind::long_range:
      return graph.vertex_count / 2;
    case FamilyKind::tree:
    case FamilyKind::table:
      return 0;
  }
  return 0;
}

Vertex vertex_at(const FiniteGraph& graph, const std::vector<int>& coords) {
  for (int v = 0; v < graph.vertex_count; ++v)
    if (graph.coordinates[static_cast<std::size_t>(v)] == coords) return v;
  fail(ErrorCode::invalid_argument, "no vertex with the requested coordinates");
}

}  // namespace rci
