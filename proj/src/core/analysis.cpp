#include "rcising/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "rcising/detail/union_find.hpp"
#include "rcising/error.hpp"

namespace rci {

int FamilySpec::dimension_or_degree() const {
  switch (kind) {
    case FamilyKind::tree: return degree;
    case FamilyKind::long_range: return 1;
    default: return dimension;
  }
}

namespace {

Vertex step_along_axis(const FiniteGraph& g, Vertex x, int d) {
  switch (g.family.kind) {
    case FamilyKind::box:
    case FamilyKind::torus: {
      auto c = g.coordinates[static_cast<std::size_t>(x)];
      const int side = g.family.side;
      int moved = c[0] + d;
      if (g.family.kind == FamilyKind::torus) moved %= side;
      if (moved >= side) fail(ErrorCode::invalid_argument, "distance leaves the box");
      c[0] = moved;
      return vertex_at(g, c);
    }
    case FamilyKind::long_range:
      if (x + d >= g.vertex_count) fail(ErrorCode::invalid_argument, "distance leaves the chain");
      return x + d;
    case FamilyKind::tree: {
      if (d > g.family.depth) fail(ErrorCode::invalid_argument, "distance exceeds the tree depth");
      auto address = g.coordinates[static_cast<std::size_t>(x)];
      for (int i = 0; i < d; ++i) address.push_back(0);
      return vertex_at(g, address);
    }
    case FamilyKind::table:
      break;
  }
  fail(ErrorCode::invalid_argument, "scans do not support table graphs");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

McOptions with_seed(const McOptions& mc, std::uint64_t seed) {
  McOptions o = mc;
  o.seed = seed;
  return o;
}

Estimate difference(const Estimate& a, const Estimate& b) {
  Estimate d;
  d.mean = a.mean - b.mean;
  d.stderr_ = std::hypot(a.stderr_, b.stderr_);
  d.n_samples = std::min(a.n_samples, b.n_samples);
  d.n_batches = std::min(a.n_batches, b.n_batches);
  d.chains = std::min(a.chains, b.chains);
  return d;
}

ScanRow make_row(const std::string& id, const FamilySpec& family, int size, double beta, std::string observable,
                 const Estimate& est, std::uint64_t seed) {
  ScanRow r;
  r.scan_id = id;
  r.family = to_string(family.kind);
  r.dimension_or_degree = family.dimension_or_degree();
  r.size = size;
  r.beta = beta;
  r.observable = std::move(observable);
  r.estimate = est;
  r.seed = seed;
  return r;
}

VertexMask ghost_sized(const VertexMask& base, const WeightedGraph& host, bool ghost_value) {
  VertexMask m(static_cast<std::size_t>(host.vertex_count()), 0);
  std::copy(base.begin(), base.end(), m.begin());
  if (host.ghost()) m[static_cast<std::size_t>(*host.ghost())] = ghost_value ? 1 : 0;
  return m;
}

nlohmann::json estimate_json(const Estimate& e) {
  return {{"mean", e.mean}, {"stderr", e.stderr_}, {"n_samples", e.n_samples}};
}

}  // namespace

Instance make_instance(const FamilySpec& family, int size) {
  Instance inst;
  switch (family.kind) {
    case FamilyKind::box:
    case FamilyKind::torus:
      if (size < 2) fail(ErrorCode::invalid_argument, "scan boxes need side >= 2");
      inst.graph = build_box(family.dimension, size, family.kind == FamilyKind::torus);
      inst.coupling = CouplingField::nearest_neighbor(inst.graph, family.j0);
      break;
    case FamilyKind::tree:
      if (size < 1) fail(ErrorCode::invalid_argument, "scan trees need depth >= 1");
      inst.graph = build_tree_ball(family.degree, size);
      inst.coupling = CouplingField::nearest_neighbor(inst.graph, family.j0);
      break;
    case FamilyKind::long_range: {
      auto chain = build_long_range_chain(size, family.exponent, family.j0);
      inst.graph = std::move(chain.graph);
      inst.coupling = std::move(chain.coupling);
      break;
    }
    case FamilyKind::table:
      fail(ErrorCode::invalid_argument, "scans do not support table graphs");
  }
  inst.ghost = ghost_augment(inst.graph, inst.coupling, inst.graph.family, family.tail_tol);
  inst.free_host = make_weighted(inst.graph, inst.coupling);
  inst.ghost_host = make_weighted(inst.ghost);
  inst.x = center_vertex(inst.graph);
  inst.y = step_along_axis(inst.graph, inst.x, 1);
  return inst;
}

const ScanRow& find_row(const ScanResult& scan, int size, const std::string& observable, double beta) {
  for (const auto& r : scan.rows)
    if (r.size == size && r.observable == observable && (beta < 0.0 || r.beta == beta)) return r;
  fail(ErrorCode::invalid_argument, "scan has no row " + observable + " at size " + std::to_string(size));
}

std::uint64_t cell_seed(std::uint64_t base, const std::string& scan_id, std::uint64_t cell) {
  return derive_seed(derive_seed(base, fnv1a(scan_id)), cell);
}

ScanResult gap_scan(const FamilySpec& family, double beta, const std::vector<int>& sizes, const McOptions& mc,
                    GapEstimator estimator) {
  ScanResult out;
  out.scan_id = "gap_scan";
  out.metadata["estimator"] = estimator == GapEstimator::fk ? "fk" : "heat_bath";
  out.metadata["cells"] = nlohmann::json::array();
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto inst = make_instance(family, sizes[i]);
    const std::uint64_t seed = cell_seed(mc.seed, out.scan_id, i);
    const VertexPair xy = VertexPair::of(inst.x, inst.y);
    const std::string name = "corr:" + std::to_string(xy.u) + ":" + std::to_string(xy.v);
    Estimate plus;
    Estimate free;
    if (estimator == GapEstimator::fk) {
      const auto conn = "conn:" + std::to_string(xy.u) + ":" + std::to_string(xy.v);
      plus = find_estimate(
          sample_fk(inst.ghost_host, beta, FkBoundary::wired, with_seed(mc, derive_seed(seed, 0)), {{xy}, {}, {}}).estimates,
          conn);
      free = find_estimate(
          sample_fk(inst.free_host, beta, FkBoundary::free, with_seed(mc, derive_seed(seed, 1)), {{xy}, {}, {}}).estimates,
          conn);
    } else {
      SpinObservables obs{{xy}, {}, false, false};
      plus = find_estimate(
          sample_spins(inst.ghost_host, beta, Boundary::plus, with_seed(mc, derive_seed(seed, 0)), obs).estimates, name);
      free = find_estimate(
          sample_spins(inst.free_host, beta, Boundary::free, with_seed(mc, derive_seed(seed, 1)), obs).estimates, name);
    }
    auto gap = difference(plus, free);
    gap.seed = seed;
    out.rows.push_back(make_row(out.scan_id, family, sizes[i], beta, "gap", gap, seed));
    out.metadata["cells"].push_back(
        {{"size", sizes[i]}, {"x", inst.x}, {"y", inst.y}, {"plus", estimate_json(plus)}, {"free", estimate_json(free)}});
  }
  return out;
}

ScanResult event_frequency_scan(const FamilySpec& family, double beta, int size, const ProxyParams& proxy,
                                const McOptions& mc) {
  ScanResult out;
  out.scan_id = "event_frequency_scan";
  const auto inst = make_instance(family, size);
  const int outer = proxy.outer_radius >= 0 ? proxy.outer_radius : std::max(1, size / 2);
  const auto dist = family_distances(inst.graph, inst.x);
  VertexMask inner(dist.size(), 0);
  VertexMask boundary(dist.size(), 0);
  for (std::size_t v = 0; v < dist.size(); ++v) {
    inner[v] = dist[v] <= proxy.inner_radius ? 1 : 0;
    boundary[v] = dist[v] >= outer ? 1 : 0;
  }
  const auto& host = *inst.ghost_host;
  const VertexMask inner_mask = ghost_sized(inner, host, false);
  const VertexMask outer_mask = ghost_sized(boundary, host, true);
  const VertexMask base = base_mask(host);
  const Vertex x = inst.x;
  const Vertex y = inst.y;

  const std::uint64_t seed = cell_seed(mc.seed, out.scan_id, 0);
  CurrentObservables single;
  single.sector.push_back({"A_f", [&](const Current& n) { return in_event_A_f(n, x, y, base) ? 1.0 : 0.0; }});
  auto af = find_estimate(sample_current(inst.ghost_host, beta, with_seed(mc, derive_seed(seed, 0)), single).estimates,
                          "A_f");
  af.seed = seed;
  auto ap = find_estimate(
      sample_double_current(inst.free_host, inst.ghost_host, beta, with_seed(mc, derive_seed(seed, 1)),
                            {{"A_proxy",
                              [&](const Current& n) {
                                return in_event_A_inf_proxy(n, x, y, inner_mask, outer_mask) ? 1.0 : 0.0;
                              }}})
          .estimates,
      "A_proxy");
  ap.seed = seed;
  out.rows.push_back(make_row(out.scan_id, family, size, beta, "A_f", af, seed));
  out.rows.push_back(make_row(out.scan_id, family, size, beta, "A_proxy", ap, seed));
  out.metadata["proxy"] = {{"inner_radius", proxy.inner_radius},
                           {"outer_radius", outer},
                           {"infinity", "connection to vertices at distance >= outer_radius or to the ghost"}};
  out.metadata["pair"] = {inst.x, inst.y};
  return out;
}

ScanResult flow_scan(const FamilySpec& family, double beta, int size, const std::vector<int>& distances, int m_radius,
                     const McOptions& mc) {
  ScanResult out;
  out.scan_id = "flow_scan";
  const auto inst = make_instance(family, size);
  const int m = m_radius > 0 ? m_radius : std::max(1, size / 4);
  const auto dist = family_distances(inst.graph, inst.x);
  VertexMask far(dist.size(), 0);
  for (std::size_t v = 0; v < dist.size(); ++v) far[v] = dist[v] >= m ? 1 : 0;
  const auto& host = *inst.ghost_host;
  const VertexMask boundary = ghost_sized(far, host, true);
  const VertexMask all = full_mask(host.vertex_count());
  const Vertex x = inst.x;

  std::vector<std::pair<std::string, std::function<double(const Current&)>>> obs;
  for (int d : distances) {
    const Vertex y = step_along_axis(inst.graph, x, d);
    obs.push_back({"flow_ge2:d=" + std::to_string(d),
                   [&all, x, y](const Current& n) { return flow(n, x, y, all) >= 2 ? 1.0 : 0.0; }});
  }
  obs.push_back({"flow_boundary_ge3:m=" + std::to_string(m),
                 [&boundary, x](const Current& n) { return flow_to_boundary(n, x, boundary) >= 3 ? 1.0 : 0.0; }});

  const std::uint64_t seed = cell_seed(mc.seed, out.scan_id, 0);
  const auto res = sample_double_current(inst.free_host, inst.ghost_host, beta, with_seed(mc, seed), obs);
  for (const auto& e : res.estimates) out.rows.push_back(make_row(out.scan_id, family, size, beta, e.name, e.estimate, seed));
  out.metadata["m_radius"] = m;
  out.metadata["distances"] = distances;
  return out;
}

ScanResult fk_uniqueness_scan(const FamilySpec& family, const std::vector<double>& betas,
                              const std::vector<int>& sizes, const McOptions& mc) {
  ScanResult out;
  out.scan_id = "fk_uniqueness_scan";
  std::uint64_t cell = 0;
  for (double beta : betas) {
    for (int size : sizes) {
      const auto inst = make_instance(family, size);
      const std::uint64_t seed = cell_seed(mc.seed, out.scan_id, cell++);
      const VertexPair xy = VertexPair::of(inst.x, inst.y);
      const EdgeId e_wired = *inst.ghost_host->find_edge(xy.u, xy.v);
      const EdgeId e_free = *inst.free_host->find_edge(xy.u, xy.v);
      const auto wired = sample_fk(inst.ghost_host, beta, FkBoundary::wired, with_seed(mc, derive_seed(seed, 0)),
                                   {{xy}, {e_wired}, {}});
      const auto free = sample_fk(inst.free_host, beta, FkBoundary::free, with_seed(mc, derive_seed(seed, 1)),
                                  {{xy}, {e_free}, {}});
      const std::string conn = "conn:" + std::to_string(xy.u) + ":" + std::to_string(xy.v);
      const auto ow = find_estimate(wired.estimates, "open:" + std::to_string(e_wired));
      const auto of = find_estimate(free.estimates, "open:" + std::to_string(e_free));
      const auto rw = find_estimate(wired.estimates, "open_rb:" + std::to_string(e_wired));
      const auto rf = find_estimate(free.estimates, "open_rb:" + std::to_string(e_free));
      const auto cw = find_estimate(wired.estimates, conn);
      const auto cf = find_estimate(free.estimates, conn);
      out.rows.push_back(make_row(out.scan_id, family, size, beta, "open_wired", ow, seed));
      out.rows.push_back(make_row(out.scan_id, family, size, beta, "open_free", of, seed));
      out.rows.push_back(make_row(out.scan_id, family, size, beta, "open_diff", difference(ow, of), seed));
      out.rows.push_back(make_row(out.scan_id, family, size, beta, "open_rb_wired", rw, seed));
      out.rows.push_back(make_row(out.scan_id, family, size, beta, "open_rb_free", rf, seed));
      out.rows.push_back(make_row(out.scan_id, family, size, beta, "open_rb_diff", difference(rw, rf), seed));
      out.rows.push_back(make_row(out.scan_id, family, size, beta, "conn_wired", cw, seed));
      out.rows.push_back(make_row(out.scan_id, family, size, beta, "conn_free", cf, seed));
      out.rows.push_back(make_row(out.scan_id, family, size, beta, "conn_diff", difference(cw, cf), seed));
    }
  }
  return out;
}

ScanResult magnetization_curve(const FamilySpec& family, const std::vector<double>& betas, int size,
                               const McOptions& mc) {
  ScanResult out;
  out.scan_id = "magnetization_curve";
  const auto inst = make_instance(family, size);
  const Vertex delta = *inst.ghost_host->ghost();
  const VertexPair pair = VertexPair::of(inst.x, delta);
  const std::string name = "conn:" + std::to_string(pair.u) + ":" + std::to_string(pair.v);
  std::vector<Estimate> m;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const std::uint64_t seed = cell_seed(mc.seed, out.scan_id, i);
    auto est = find_estimate(
        sample_fk(inst.ghost_host, betas[i], FkBoundary::wired, with_seed(mc, seed), {{pair}, {}, {}}).estimates, name);
    est.seed = seed;
    m.push_back(est);
    out.rows.push_back(make_row(out.scan_id, family, size, betas[i], "magnetization", est, seed));
  }
  for (std::size_t i = 0; i + 1 < betas.size(); ++i) {
    const double h = betas[i + 1] - betas[i];
    if (h == 0.0) continue;
    Estimate d = difference(m[i + 1], m[i]);
    d.mean /= h;
    d.stderr_ /= std::abs(h);
    out.rows.push_back(
        make_row(out.scan_id, family, size, 0.5 * (betas[i] + betas[i + 1]), "dm_dbeta", d, m[i + 1].seed));
  }
  out.metadata["estimator"] = "wired FK connection of the centre to the ghost";
  return out;
}

int ends_proxy(const Current& n, const std::vector<int>& distance_from_x, int inner_radius, int outer_radius) {
  const auto& host = n.host();
  const int nv = host.vertex_count();
  auto dist = [&](Vertex v) {
    return static_cast<std::size_t>(v) < distance_from_x.size() ? distance_from_x[static_cast<std::size_t>(v)] : -1;
  };
  detail::UnionFind uf(nv);
  std::vector<int> edge_count(static_cast<std::size_t>(nv), 0);
  std::vector<EdgeId> live;
  for (EdgeId e = 0; e < host.edge_count(); ++e) {
    if (n.at(e) == 0 || host.is_ghost_edge(e)) continue;
    live.push_back(e);
    uf.unite(host.edge(e).u, host.edge(e).v);
  }
  if (live.empty()) return 0;
  for (EdgeId e : live) ++edge_count[static_cast<std::size_t>(uf.find(host.edge(e).u))];
  int best_root = -1;
  for (Vertex v = 0; v < nv; ++v) {
    const int r = uf.find(v);
    if (best_root < 0 || edge_count[static_cast<std::size_t>(r)] > edge_count[static_cast<std::size_t>(best_root)])
      best_root = r;
  }

  auto kept = [&](Vertex v) { return uf.find(v) == best_root && dist(v) > inner_radius; };
  detail::UnionFind rest(nv);
  for (EdgeId e : live) {
    const auto& ed = host.edge(e);
    if (kept(ed.u) && kept(ed.v)) rest.unite(ed.u, ed.v);
  }
  std::vector<char> touching(static_cast<std::size_t>(nv), 0);
  int count = 0;
  for (Vertex v = 0; v < nv; ++v) {
    if (!kept(v) || dist(v) < outer_radius) continue;
    auto& t = touching[static_cast<std::size_t>(rest.find(v))];
    if (!t) {
      t = 1;
      ++count;
    }
  }
  return count;
}

ScanResult ends_scan(const FamilySpec& family, double beta, int size, int inner_radius, int outer_radius,
                     const McOptions& mc) {
  ScanResult out;
  out.scan_id = "ends_scan";
  const auto inst = make_instance(family, size);
  const auto dist = family_distances(inst.graph, inst.x);
  auto last = std::make_shared<int>(0);
  std::vector<std::pair<std::string, std::function<double(const Current&)>>> obs;
  // The first functional computes the proxy; the others read it for the same sample.
  obs.push_back({"ends=0", [=, &dist](const Current& n) {
                   *last = ends_proxy(n, dist, inner_radius, outer_radius);
                   return *last == 0 ? 1.0 : 0.0;
                 }});
  for (int k = 1; k <= 4; ++k)
    obs.push_back({"ends=" + std::to_string(k), [=](const Current&) { return *last == k ? 1.0 : 0.0; }});
  obs.push_back({"ends>=5", [=](const Current&) { return *last >= 5 ? 1.0 : 0.0; }});

  const std::uint64_t seed = cell_seed(mc.seed, out.scan_id, 0);
  const auto res = sample_double_current(inst.free_host, inst.ghost_host, beta, with_seed(mc, seed), obs);
  for (const auto& e : res.estimates) out.rows.push_back(make_row(out.scan_id, family, size, beta, e.name, e.estimate, seed));
  out.metadata["exploratory"] = true;
  out.metadata["inner_radius"] = inner_radius;
  out.metadata["outer_radius"] = outer_radius;
  return out;
}

std::string to_csv(const ScanResult& scan) {
  std::ostringstream out;
  out << "scan_id,family,dimension_or_degree,size,beta,observable,mean,stderr,n_samples,seed\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : scan.rows) {
    out << r.scan_id << ',' << r.family << ',' << r.dimension_or_degree << ',' << r.size << ',' << num(r.beta) << ','
        << r.observable << ',' << num(r.estimate.mean) << ',' << num(r.estimate.stderr_) << ','
        << r.estimate.n_samples << ',' << r.seed << '\n';
  }
  return out.str();
}

void write_csv(const ScanResult& scan, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path);
  out << to_csv(scan);
  if (!out) fail(ErrorCode::io, "failed writing " + path);
}

}  // namespace rci
