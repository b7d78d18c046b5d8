#include "rcising/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "rcising/verify.hpp"

namespace rci {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool has_format(const RunConfig& c, const std::string& f) {
  return std::find(c.output.formats.begin(), c.output.formats.end(), f) != c.output.formats.end();
}

// First cell keeps the configured seed, later cells get derived ones.
std::uint64_t loop_seed(std::uint64_t base, std::uint64_t k) { return k == 0 ? base : derive_seed(base, k); }

void append_rows(ScanResult& into, ScanResult&& part, const std::string& key) {
  if (into.scan_id.empty()) into.scan_id = part.scan_id;
  for (auto& r : part.rows) into.rows.push_back(std::move(r));
  into.metadata[key] = std::move(part.metadata);
}

std::string beta_key(double beta) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "beta=%.17g", beta);
  return buf;
}

std::string beta_key(double beta, int size) { return beta_key(beta) + ",size=" + std::to_string(size); }

ScanResult run_one(const std::string& name, const RunConfig& c, const McOptions& base, const std::string& series) {
  const FamilySpec family = family_spec(c);
  const auto& e = c.experiment;
  const std::vector<double> betas = e.betas.empty() ? std::vector<double>{c.model.beta} : e.betas;
  McOptions mc = base;
  mc.series_path = series;

  if (name == "fk_uniqueness_scan") return fk_uniqueness_scan(family, betas, e.sizes, mc);

  ScanResult out;
  std::uint64_t k = 0;
  if (name == "gap_scan") {
    for (double beta : betas) {
      mc.seed = loop_seed(base.seed, k++);
      append_rows(out, gap_scan(family, beta, e.sizes, mc,
                                e.estimator == "fk" ? GapEstimator::fk : GapEstimator::heat_bath),
                  beta_key(beta));
    }
    return out;
  }
  if (name == "magnetization_curve") {
    for (int size : e.sizes) {
      mc.seed = loop_seed(base.seed, k++);
      append_rows(out, magnetization_curve(family, betas, size, mc), "size=" + std::to_string(size));
    }
    return out;
  }
  for (double beta : betas) {
    for (int size : e.sizes) {
      mc.seed = loop_seed(base.seed, k++);
      if (name == "event_frequency_scan") {
        append_rows(out, event_frequency_scan(family, beta, size, {e.inner_radius, e.outer_radius}, mc),
                    beta_key(beta, size));
      } else if (name == "flow_scan") {
        append_rows(out, flow_scan(family, beta, size, e.distances, e.m_radius, mc), beta_key(beta, size));
      } else if (name == "ends_scan") {
        const int outer = e.outer_radius >= 0 ? e.outer_radius : std::max(1, size / 2);
        append_rows(out, ends_scan(family, beta, size, e.inner_radius, outer, mc), beta_key(beta, size));
      } else {
        fail(ErrorCode::config, "unknown scan '" + name + "'");
      }
    }
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::io, "failed writing " + path.string());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string pad(const std::string& s, std::size_t width, bool right) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

std::string number(const std::string& raw, const char* format) {
  try {
    std::size_t used = 0;
    const double v = std::stod(raw, &used);
    if (used != raw.size()) return raw;
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
  } catch (const std::exception&) {
    return raw;
  }
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::condition:
    case ErrorCode::domain:
    case ErrorCode::ergodicity:
    case ErrorCode::precision:
      return exit_condition;
    case ErrorCode::io:
      return exit_io;
    case ErrorCode::missing_input:
      return exit_missing_input;
    default:
      return exit_config;
  }
}

ValidateOutcome run_validate(const RunConfig& config) {
  const auto g = build_configured_graph(config);
  const auto report = validate_conditions(g.graph, g.coupling);
  ValidateOutcome out;
  out.report = report.to_json();
  out.report["family"] = config.graph.family;
  out.report["vertex_count"] = g.graph.vertex_count;
  out.report["pair_count"] = g.graph.pairs.size();
  out.exit_code = report.all_pass() ? exit_ok : exit_condition;
  return out;
}

VerifyOutcome run_verify(const RunConfig& config, const std::string& filter, int workers) {
  SweepOptions o;
  o.seed = config.mc.seed;
  o.draws = config.experiment.draws;
  o.betas = config.experiment.verify_betas;
  o.max_vertices = config.experiment.max_vertices;
  o.block_cap = config.experiment.block_cap;
  o.cap = config.model.cap;
  o.double_cap = config.experiment.double_cap;
  o.increment_cap = config.experiment.increment_cap;
  o.workers = std::max(1, workers);
  std::istringstream in(filter);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) o.identities.push_back(item);
  for (const auto& name : o.identities)
    if (std::find(identity_names().begin(), identity_names().end(), name) == identity_names().end())
      fail(ErrorCode::config, "unknown identity filter '" + name + "'");

  const auto start = std::chrono::steady_clock::now();
  const auto records = run_identity_sweep(o);
  VerifyOutcome out;
  std::map<std::string, nlohmann::json> per;
  bool all = true;
  for (const auto& r : records) {
    out.records.push_back(r.to_json());
    auto& s = per[r.identity];
    if (s.is_null()) s = {{"records", 0}, {"failed", 0}, {"max_discrepancy", 0.0}, {"checks", 0}};
    s["records"] = s["records"].get<int>() + 1;
    s["checks"] = s["checks"].get<std::int64_t>() + r.checks;
    if (!r.pass) s["failed"] = s["failed"].get<int>() + 1;
    s["max_discrepancy"] = std::max(s["max_discrepancy"].get<double>(), r.discrepancy);
    all = all && r.pass;
  }
  out.summary = {{"pass", all}, {"elapsed", seconds_since(start)}, {"identities", per}};
  out.exit_code = all ? exit_ok : exit_verify_failed;
  return out;
}

std::vector<ScanResult> run_scans(const RunConfig& config, int workers) {
  std::vector<ScanResult> out;
  const auto mc = mc_options(config, workers);
  for (const auto& name : config.experiment.names) out.push_back(run_one(name, config, mc, {}));
  return out;
}

ScanOutcome run_scan_to_dir(const RunConfig& config, int workers) {
  const fs::path dir(config.output.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorCode::io, "cannot create output directory " + dir.string());
  {
    // Probe writability before spending time on sampling.
    const fs::path probe = dir / ".rci_write_probe";
    std::ofstream p(probe);
    if (!p) fail(ErrorCode::io, "output directory " + dir.string() + " is not writable");
    p.close();
    fs::remove(probe, ec);
  }

  const auto start = std::chrono::steady_clock::now();
  const auto mc = mc_options(config, workers);
  ScanOutcome out;
  nlohmann::json scans = nlohmann::json::array();
  for (const auto& name : config.experiment.names) {
    const auto scan_start = std::chrono::steady_clock::now();
    std::string series;
    if (has_format(config, "series")) {
      series = (dir / (name + ".series.bin")).string();
      fs::remove(series, ec);
    }
    const auto result = run_one(name, config, mc, series);
    nlohmann::json entry = {{"scan_id", result.scan_id},
                            {"rows", result.rows.size()},
                            {"metadata", result.metadata},
                            {"wall_clock_seconds", seconds_since(scan_start)}};
    if (has_format(config, "csv")) {
      const auto path = dir / (name + ".csv");
      write_csv(result, path.string());
      out.files.push_back(path.string());
      entry["file"] = path.filename().string();
    }
    if (!series.empty()) entry["series"] = fs::path(series).filename().string();
    scans.push_back(std::move(entry));
  }
  out.manifest = {{"config", to_json(config)},
                  {"workers", mc.workers},
                  {"scans", scans},
                  {"wall_clock_seconds", seconds_since(start)}};
  if (has_format(config, "json")) {
    const auto path = dir / "manifest.json";
    write_text(path, out.manifest.dump(2) + "\n");
    out.files.push_back(path.string());
  }
  return out;
}

std::string run_report(const std::string& dir_name) {
  const fs::path dir(dir_name);
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorCode::missing_input, "no such directory " + dir_name);
  std::vector<fs::path> csvs;
  for (const auto& entry : fs::directory_iterator(dir, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") csvs.push_back(entry.path());
  if (ec) fail(ErrorCode::io, "cannot list " + dir_name);
  if (csvs.empty()) fail(ErrorCode::missing_input, "no scan CSV files in " + dir_name);
  std::sort(csvs.begin(), csvs.end());

  std::ostringstream out;
  const fs::path manifest_path = dir / "manifest.json";
  std::map<std::string, nlohmann::json> scan_info;
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    nlohmann::json manifest;
    try {
      in >> manifest;
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::io, "malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    const auto& mc = manifest.value("config", nlohmann::json::object()).value("mc", nlohmann::json::object());
    const auto& graph = manifest.value("config", nlohmann::json::object()).value("graph", nlohmann::json::object());
    out << "manifest: family=" << graph.value("family", std::string("?")) << " seed=" << mc.value("seed", 0ull)
        << " chains=" << mc.value("chains", 0) << " sweeps=" << mc.value("sweeps", 0ll) << '\n';
    for (const auto& s : manifest.value("scans", nlohmann::json::array()))
      scan_info[s.value("scan_id", std::string())] = s;
  } else {
    out << "manifest: none\n";
  }

  static const std::vector<std::string> header = {"scan_id", "family", "dimension_or_degree", "size", "beta",
                                                  "observable", "mean", "stderr", "n_samples", "seed"};
  // Sections keyed by scan id, in order of first appearance.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::vector<std::string>>> sections;
  std::map<std::string, std::string> source;
  for (const auto& path : csvs) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != header)
      fail(ErrorCode::io, path.filename().string() + ": header does not match the scan CSV schema");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto cells = split_csv_line(line);
      if (cells.size() != header.size())
        fail(ErrorCode::io, path.filename().string() + ": row with " + std::to_string(cells.size()) + " columns");
      if (!sections.count(cells[0])) {
        order.push_back(cells[0]);
        source[cells[0]] = path.filename().string();
      }
      sections[cells[0]].push_back(std::move(cells));
    }
  }

  const std::vector<std::string> titles = {"family", "d/deg", "size", "beta", "observable", "mean", "stderr", "n"};
  for (const auto& id : order) {
    const auto& rows = sections[id];
    out << "\n== " << id << " (" << source[id] << ", " << rows.size() << " rows";
    if (auto it = scan_info.find(id); it != scan_info.end() && it->second.contains("wall_clock_seconds")) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.1f", it->second["wall_clock_seconds"].get<double>());
      out << ", " << buf << " s";
    }
    out << ") ==\n";
    std::vector<std::vector<std::string>> table;
    for (const auto& r : rows)
      table.push_back({r[1], r[2], r[3], number(r[4], "%.6g"), r[5], number(r[6], "%.6f"), number(r[7], "%.2e"), r[8]});
    std::vector<std::size_t> width(titles.size());
    for (std::size_t c = 0; c < titles.size(); ++c) {
      width[c] = titles[c].size();
      for (const auto& t : table) width[c] = std::max(width[c], t[c].size());
    }
    auto emit = [&](const std::vector<std::string>& cells) {
      std::string line;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const bool right = c != 0 && c != 4;
        line += (c ? "  " : "") + pad(cells[c], width[c], right);
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out << line << '\n';
    };
    emit(titles);
    for (const auto& t : table) emit(t);
  }
  return out.str();
}

}  // namespace rci
