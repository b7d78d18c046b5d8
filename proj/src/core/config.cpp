#include "rcising/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rcising/error.hpp"

namespace rci {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"graph", {"family", "dimension", "side", "degree", "depth", "length", "exponent", "J0", "tail_tol", "vertices",
                 "pairs"}},
      {"model", {"beta", "cap"}},
      {"mc", {"seed", "chains", "sweeps", "burn_in", "thinning"}},
      {"experiment", {"name", "sizes", "betas", "estimator", "inner_radius", "outer_radius", "distances", "m_radius",
                      "draws", "verify_betas", "block_cap", "max_vertices", "double_cap", "increment_cap"}},
      {"output", {"dir", "formats"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end)
    fail(ErrorCode::config, "key '" + key + "': cannot parse '" + raw + "'");
  return value;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
  std::vector<T> out;
  for (const auto& item : split(raw, ',')) out.push_back(parse_number<T>(key, item));
  return out;
}

std::map<VertexPair, double> parse_pairs(const std::string& raw) {
  std::map<VertexPair, double> out;
  for (const auto& item : split(raw, ',')) {
    const auto colon = item.find(':');
    const auto dash = item.find('-');
    if (colon == std::string::npos || dash == std::string::npos || dash > colon)
      fail(ErrorCode::config, "key 'pairs': entries look like 'u-v:J', got '" + item + "'");
    const auto u = parse_number<int>("pairs", item.substr(0, dash));
    const auto v = parse_number<int>("pairs", item.substr(dash + 1, colon - dash - 1));
    const auto j = parse_number<double>("pairs", item.substr(colon + 1));
    if (u == v) fail(ErrorCode::config, "key 'pairs': self-pair " + item);
    if (!out.emplace(VertexPair::of(u, v), j).second) fail(ErrorCode::config, "key 'pairs': duplicate pair " + item);
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, double>) {
      out += fmt(items[i]);
    } else if constexpr (std::is_same_v<T, std::string>) {
      out += items[i];
    } else {
      out += std::to_string(items[i]);
    }
  }
  return out;
}

const std::set<std::string> kScans = {"gap_scan",           "event_frequency_scan", "flow_scan",
                                      "fk_uniqueness_scan", "magnetization_curve",  "ends_scan"};

void check_semantics(const RunConfig& c) {
  family_from_string(c.graph.family);
  if (c.model.cap < 1) fail(ErrorCode::config, "model.cap must be >= 1");
  if (!(c.model.beta >= 0.0)) fail(ErrorCode::config, "model.beta must be non-negative");
  if (c.mc.chains < 1) fail(ErrorCode::config, "mc.chains must be >= 1");
  if (c.mc.sweeps < 1) fail(ErrorCode::config, "mc.sweeps must be >= 1");
  if (c.mc.thinning < 1) fail(ErrorCode::config, "mc.thinning must be >= 1");
  if (c.mc.burn_in < -1) fail(ErrorCode::config, "mc.burn_in must be >= 0, or -1 for the default");
  for (const auto& n : c.experiment.names)
    if (!kScans.count(n)) fail(ErrorCode::config, "experiment.name: unknown scan '" + n + "'");
  if (c.experiment.estimator != "fk" && c.experiment.estimator != "heat_bath")
    fail(ErrorCode::config, "experiment.estimator must be fk or heat_bath");
  for (const auto& f : c.output.formats)
    if (f != "csv" && f != "json" && f != "series")
      fail(ErrorCode::config, "output.formats: unknown format '" + f + "'");
  if (c.output.dir.empty()) fail(ErrorCode::config, "output.dir must not be empty");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::config, std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  const auto& known = schema();
  for (const auto& [section, body] : tree) {
    auto it = known.find(section);
    if (it == known.end()) fail(ErrorCode::config, "unknown section or top-level key '" + section + "'");
    for (const auto& [key, value] : body) {
      (void)value;
      if (!it->second.count(key)) fail(ErrorCode::config, "unknown key '" + key + "' in [" + section + "]");
    }
  }

  RunConfig c;
  auto get = [&](const char* path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return trim(*v);
    return std::nullopt;
  };
  auto set_int = [&](const char* path, auto& target) {
    using T = std::remove_reference_t<decltype(target)>;
    if (auto v = get(path)) target = parse_number<T>(path, *v);
  };
  auto set_double = [&](const char* path, double& target) {
    if (auto v = get(path)) target = parse_number<double>(path, *v);
  };

  if (auto v = get("graph.family")) c.graph.family = *v;
  set_int("graph.dimension", c.graph.dimension);
  set_int("graph.side", c.graph.side);
  set_int("graph.degree", c.graph.degree);
  set_int("graph.depth", c.graph.depth);
  set_int("graph.length", c.graph.length);
  set_double("graph.exponent", c.graph.exponent);
  set_double("graph.J0", c.graph.j0);
  set_double("graph.tail_tol", c.graph.tail_tol);
  set_int("graph.vertices", c.graph.vertices);
  if (auto v = get("graph.pairs")) c.graph.pairs = parse_pairs(*v);

  set_double("model.beta", c.model.beta);
  set_int("model.cap", c.model.cap);

  set_int("mc.seed", c.mc.seed);
  set_int("mc.chains", c.mc.chains);
  set_int("mc.sweeps", c.mc.sweeps);
  set_int("mc.burn_in", c.mc.burn_in);
  set_int("mc.thinning", c.mc.thinning);

  if (auto v = get("experiment.name")) c.experiment.names = split(*v, ',');
  if (auto v = get("experiment.sizes")) c.experiment.sizes = parse_list<int>("experiment.sizes", *v);
  if (auto v = get("experiment.betas")) c.experiment.betas = parse_list<double>("experiment.betas", *v);
  if (auto v = get("experiment.estimator")) c.experiment.estimator = *v;
  set_int("experiment.inner_radius", c.experiment.inner_radius);
  set_int("experiment.outer_radius", c.experiment.outer_radius);
  if (auto v = get("experiment.distances")) c.experiment.distances = parse_list<int>("experiment.distances", *v);
  set_int("experiment.m_radius", c.experiment.m_radius);
  set_int("experiment.draws", c.experiment.draws);
  if (auto v = get("experiment.verify_betas"))
    c.experiment.verify_betas = parse_list<double>("experiment.verify_betas", *v);
  set_int("experiment.block_cap", c.experiment.block_cap);
  set_int("experiment.max_vertices", c.experiment.max_vertices);
  set_int("experiment.double_cap", c.experiment.double_cap);
  set_int("experiment.increment_cap", c.experiment.increment_cap);

  if (auto v = get("output.dir")) c.output.dir = *v;
  if (auto v = get("output.formats")) c.output.formats = split(*v, ',');

  check_semantics(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::missing_input, "cannot read config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream out;
  out << "[graph]\n"
      << "family = " << c.graph.family << '\n'
      << "dimension = " << c.graph.dimension << '\n'
      << "side = " << c.graph.side << '\n'
      << "degree = " << c.graph.degree << '\n'
      << "depth = " << c.graph.depth << '\n'
      << "length = " << c.graph.length << '\n'
      << "exponent = " << fmt(c.graph.exponent) << '\n'
      << "J0 = " << fmt(c.graph.j0) << '\n'
      << "tail_tol = " << fmt(c.graph.tail_tol) << '\n'
      << "vertices = " << c.graph.vertices << '\n';
  out << "pairs = ";
  bool first = true;
  for (const auto& [p, j] : c.graph.pairs) {
    out << (first ? "" : ", ") << p.u << '-' << p.v << ':' << fmt(j);
    first = false;
  }
  out << "\n\n[model]\n"
      << "beta = " << fmt(c.model.beta) << '\n'
      << "cap = " << c.model.cap << "\n\n"
      << "[mc]\n"
      << "seed = " << c.mc.seed << '\n'
      << "chains = " << c.mc.chains << '\n'
      << "sweeps = " << c.mc.sweeps << '\n'
      << "burn_in = " << c.mc.burn_in << '\n'
      << "thinning = " << c.mc.thinning << "\n\n"
      << "[experiment]\n"
      << "name = " << join(c.experiment.names) << '\n'
      << "sizes = " << join(c.experiment.sizes) << '\n'
      << "betas = " << join(c.experiment.betas) << '\n'
      << "estimator = " << c.experiment.estimator << '\n'
      << "inner_radius = " << c.experiment.inner_radius << '\n'
      << "outer_radius = " << c.experiment.outer_radius << '\n'
      << "distances = " << join(c.experiment.distances) << '\n'
      << "m_radius = " << c.experiment.m_radius << '\n'
      << "draws = " << c.experiment.draws << '\n'
      << "verify_betas = " << join(c.experiment.verify_betas) << '\n'
      << "block_cap = " << c.experiment.block_cap << '\n'
      << "max_vertices = " << c.experiment.max_vertices << '\n'
      << "double_cap = " << c.experiment.double_cap << '\n'
      << "increment_cap = " << c.experiment.increment_cap << "\n\n"
      << "[output]\n"
      << "dir = " << c.output.dir << '\n'
      << "formats = " << join(c.output.formats) << '\n';
  return out.str();
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [p, j] : c.graph.pairs) pairs.push_back({p.u, p.v, j});
  return {
      {"graph",
       {{"family", c.graph.family},
        {"dimension", c.graph.dimension},
        {"side", c.graph.side},
        {"degree", c.graph.degree},
        {"depth", c.graph.depth},
        {"length", c.graph.length},
        {"exponent", c.graph.exponent},
        {"J0", c.graph.j0},
        {"tail_tol", c.graph.tail_tol},
        {"vertices", c.graph.vertices},
        {"pairs", pairs}}},
      {"model", {{"beta", c.model.beta}, {"cap", c.model.cap}}},
      {"mc",
       {{"seed", c.mc.seed},
        {"chains", c.mc.chains},
        {"sweeps", c.mc.sweeps},
        {"burn_in", c.mc.burn_in},
        {"thinning", c.mc.thinning}}},
      {"experiment",
       {{"name", c.experiment.names},
        {"sizes", c.experiment.sizes},
        {"betas", c.experiment.betas},
        {"estimator", c.experiment.estimator},
        {"inner_radius", c.experiment.inner_radius},
        {"outer_radius", c.experiment.outer_radius},
        {"distances", c.experiment.distances},
        {"m_radius", c.experiment.m_radius},
        {"draws", c.experiment.draws},
        {"verify_betas", c.experiment.verify_betas},
        {"block_cap", c.experiment.block_cap},
        {"max_vertices", c.experiment.max_vertices},
        {"double_cap", c.experiment.double_cap},
        {"increment_cap", c.experiment.increment_cap}}},
      {"output", {{"dir", c.output.dir}, {"formats", c.output.formats}}},
      {"ini", to_ini(c)},
  };
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_ini(a) == to_ini(b); }

ConfiguredGraph build_configured_graph(const RunConfig& config) {
  const auto& g = config.graph;
  ConfiguredGraph out;
  switch (family_from_string(g.family)) {
    case FamilyKind::box:
    case FamilyKind::torus:
      out.graph = build_box(g.dimension, g.side, g.family == "torus");
      out.coupling = CouplingField::nearest_neighbor(out.graph, g.j0);
      break;
    case FamilyKind::tree:
      out.graph = build_tree_ball(g.degree, g.depth);
      out.coupling = CouplingField::nearest_neighbor(out.graph, g.j0);
      break;
    case FamilyKind::long_range: {
      // Exponents <= 1 are still built so that validation can report C4.
      auto chain = build_long_range_chain(g.length, g.exponent > 1.0 ? g.exponent : 2.0, g.j0);
      out.graph = std::move(chain.graph);
      out.graph.family.exponent = g.exponent;
      out.coupling = CouplingField::power_law(out.graph, g.exponent, g.j0);
      break;
    }
    case FamilyKind::table:
      out.graph = build_table_graph(g.vertices, g.pairs);
      out.coupling = CouplingField::table(g.pairs);
      break;
  }
  return out;
}

FamilySpec family_spec(const RunConfig& config) {
  FamilySpec f;
  f.kind = family_from_string(config.graph.family);
  f.dimension = config.graph.dimension;
  f.degree = config.graph.degree;
  f.j0 = config.graph.j0;
  f.exponent = config.graph.exponent;
  f.tail_tol = config.graph.tail_tol;
  return f;
}

McOptions mc_options(const RunConfig& config, int workers) {
  McOptions o;
  o.seed = config.mc.seed;
  o.chains = config.mc.chains;
  o.sweeps = config.mc.sweeps;
  o.burn_in = config.mc.burn_in;
  o.thinning = config.mc.thinning;
  o.workers = workers > 0 ? workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return o;
}

}  // namespace rci
