// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcising/analysis.hpp"
#include "rcising/config.hpp"
#include "rcising/driver.hpp"
#include "rcising/exact.hpp"
#include "rcising/mc.hpp"
#include "rcising/verify.hpp"

using namespace rci;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double combined(const Estimate& a, const Estimate& b) { return std::hypot(a.stderr_, b.stderr_); }

// Worst record of one identity over the default sweep.
struct SweepSummary {
  bool pass = true;
  double max_discrepancy = 0.0;
  double max_threshold = 0.0;
  std::size_t records = 0;
  std::int64_t checks = 0;
  double seconds = 0.0;
};

SweepSummary sweep(const std::string& identity) {
  SweepOptions o;
  o.identities = {identity};
  o.workers = workers();
  const auto t0 = std::chrono::steady_clock::now();
  const auto records = run_identity_sweep(o);
  SweepSummary s;
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  s.records = records.size();
  for (const auto& r : records) {
    s.pass = s.pass && r.pass;
    s.max_discrepancy = std::max(s.max_discrepancy, r.discrepancy);
    s.max_threshold = std::max(s.max_threshold, r.threshold);
    s.checks += r.checks;
  }
  s.pass = s.pass && s.records > 0;
  return s;
}

Outcome switching() {
  const auto s = sweep("switching");
  const bool ok = s.pass && s.max_discrepancy <= 1e-12 && s.seconds <= 120.0;
  return {ok, fmt("%zu records, %lld checks, max blockwise discrepancy %.3g (tol 1e-12), %.1f s (limit 120 s)",
                  s.records, static_cast<long long>(s.checks), s.max_discrepancy, s.seconds)};
}

Outcome representation() {
  const auto s = sweep("representation");
  // Single pair: tanh(beta J) over the same draw range.
  double worst_pair = 0.0;
  for (double beta : {0.3, 1.0})
    for (double j : {0.05, 0.25, 0.5, 0.75, 1.0}) {
      const auto g = std::make_shared<const WeightedGraph>(2, std::vector<Edge>{{0, 1, j}});
      worst_pair = std::max(worst_pair, std::abs(two_point(g, beta, 0, 1, 12).value - std::tanh(beta * j)));
    }
  const bool ok = s.pass && worst_pair <= 1e-10;
  return {ok, fmt("%zu records within the propagated bound (max |diff| %.3g); single pair vs tanh %.3g (tol 1e-10)",
                  s.records, s.max_discrepancy, worst_pair)};
}

Outcome double_current() {
  const auto s = sweep("double_current");
  const bool ok = s.pass && s.max_discrepancy <= 1e-8;
  return {ok, fmt("%zu records on <= 3 vertices, cap 10, max discrepancy %.3g (tol 1e-8)", s.records,
                  s.max_discrepancy)};
}

Outcome fk_coupling() {
  const auto s = sweep("fk_coupling");
  const bool ok = s.pass && s.max_discrepancy <= 1e-10;
  return {ok, fmt("%zu records, max |fk - spin| %.3g (tol 1e-10)", s.records, s.max_discrepancy)};
}

Outcome increment_parity() {
  const auto inc = sweep("increment");
  const auto par = sweep("parity_bound");
  const bool ok = inc.pass && par.pass && inc.max_discrepancy <= 1e-12 && par.max_discrepancy <= 1e-10;
  return {ok, fmt("increment max rel error %.3g (tol 1e-12); parity bound max violation %.3g (tol 1e-10)",
                  inc.max_discrepancy, par.max_discrepancy)};
}

Outcome mc_vs_oracle() {
  const auto torus = build_box(2, 3, true);
  const auto host = make_weighted(torus, CouplingField::nearest_neighbor(torus, 1.0));
  const double beta = 0.5;
  const Vertex o = vertex_at(torus, {0, 0});
  const Vertex e = vertex_at(torus, {1, 0});
  const auto pair = VertexPair::of(o, e);
  const std::string corr = "corr:" + std::to_string(pair.u) + ":" + std::to_string(pair.v);
  const std::string conn = "conn:" + std::to_string(pair.u) + ":" + std::to_string(pair.v);
  const double exact = spin_oracle(*host, beta, Boundary::free, o, e);

  McOptions mc;
  mc.chains = 4;
  mc.workers = workers();
  bool ok = true;
  std::string detail = fmt("oracle %.6f;", exact);
  auto judge = [&](const char* name, const Estimate& est, double seconds) {
    const bool good = std::abs(est.mean - exact) <= 3.0 * est.stderr_ && est.stderr_ <= 0.005 && seconds <= 60.0;
    ok = ok && good;
    detail += fmt(" %s %.6f+-%.4f (%.1f s)%s;", name, est.mean, est.stderr_, seconds, good ? "" : " FAIL");
  };
  auto timed = [](auto&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = f();
    return std::make_pair(r, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };

  mc.seed = 101;
  mc.sweeps = 60'000;
  auto [hb, t_hb] = timed(
      [&] { return find_estimate(sample_spins(host, beta, Boundary::free, mc, {{pair}, {}, false, false}).estimates, corr); });
  judge("heat-bath", hb, t_hb);
  mc.seed = 102;
  auto [fk, t_fk] =
      timed([&] { return find_estimate(sample_fk(host, beta, FkBoundary::free, mc, {{pair}, {}, {}}).estimates, conn); });
  judge("fk", fk, t_fk);
  mc.seed = 103;
  mc.sweeps = 1'000'000;
  CurrentObservables obs;
  obs.two_point.push_back(pair);
  auto [worm, t_worm] = timed([&] { return find_estimate(sample_current(host, beta, mc, obs).estimates, corr); });
  judge("worm", worm, t_worm);
  detail.pop_back();
  return {ok, detail};
}

std::string state_key(const WormState& s) {
  return std::to_string(s.tail) + "|" + std::to_string(s.head) + "|" + s.n.serialize();
}

double balance_violation(const GraphPtr& g, double beta, std::uint64_t cap, std::size_t& pairs) {
  WormChain chain(g, beta);
  std::map<std::string, WormState> seen;
  std::deque<WormState> queue{WormState{Current(g), 0, 0}};
  seen.emplace(state_key(queue.front()), queue.front());
  double worst = 0.0;
  auto total = [](const Current& n) {
    std::uint64_t t = 0;
    for (auto m : n.multiplicities()) t += m;
    return t;
  };
  while (!queue.empty()) {
    const WormState a = queue.front();
    queue.pop_front();
    const std::string ka = state_key(a);
    std::map<std::string, std::pair<WormState, double>> forward;
    for (const auto& t : chain.transitions(a)) {
      auto [it, fresh] = forward.try_emplace(state_key(t.to), t.to, 0.0);
      it->second.second += t.probability;
    }
    for (const auto& [kb, entry] : forward) {
      const auto& [b, p_ab] = entry;
      if (kb == ka || total(b.n) > cap) continue;
      double p_ba = 0.0;
      for (const auto& t : chain.transitions(b))
        if (state_key(t.to) == ka) p_ba += t.probability;
      const double lhs = std::exp(chain.log_target(a)) * p_ab;
      const double rhs = std::exp(chain.log_target(b)) * p_ba;
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(lhs, rhs));
      ++pairs;
      if (seen.emplace(kb, b).second) queue.push_back(b);
    }
  }
  return worst;
}

Outcome worm_balance() {
  std::size_t pairs = 0;
  const auto single = std::make_shared<const WeightedGraph>(2, std::vector<Edge>{{0, 1, 0.8}});
  const auto triangle =
      std::make_shared<const WeightedGraph>(3, std::vector<Edge>{{0, 1, 0.8}, {1, 2, 0.35}, {0, 2, 1.0}});
  double worst = 0.0;
  for (double beta : {0.3, 1.0}) {
    worst = std::max(worst, balance_violation(single, beta, 10, pairs));
    worst = std::max(worst, balance_violation(triangle, beta, 8, pairs));
  }
  return {worst <= 1e-12, fmt("%zu move pairs, max relative violation %.3g (tol 1e-12)", pairs, worst)};
}

McOptions scan_options(std::uint64_t seed, std::int64_t sweeps) {
  McOptions mc;
  mc.seed = seed;
  mc.chains = 4;
  mc.sweeps = sweeps;
  mc.workers = workers();
  return mc;
}

FamilySpec box2() {
  FamilySpec f;
  f.kind = FamilyKind::box;
  f.dimension = 2;
  return f;
}

Outcome gap_2d() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto scan = gap_scan(box2(), 0.6, {8, 16, 32}, scan_options(11, 20'000));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& d8 = find_row(scan, 8, "gap").estimate;
  const auto& d16 = find_row(scan, 16, "gap").estimate;
  const auto& d32 = find_row(scan, 32, "gap").estimate;
  const bool monotone = d16.mean - d8.mean <= 2.0 * combined(d8, d16) && d32.mean - d16.mean <= 2.0 * combined(d16, d32);
  const bool halved = d32.mean <= 0.5 * d8.mean;
  const double limit = d8.mean / 5.0;
  const bool precise = d8.stderr_ <= limit && d16.stderr_ <= limit && d32.stderr_ <= limit;
  return {monotone && halved && precise && seconds <= 900.0,
          fmt("D8 %.5f+-%.5f, D16 %.5f+-%.5f, D32 %.5f+-%.5f; non-increasing within 2 sigma: %s; D32 <= D8/2: %s; "
              "stderr <= D8/5: %s; %.1f s",
              d8.mean, d8.stderr_, d16.mean, d16.stderr_, d32.mean, d32.stderr_, monotone ? "yes" : "no",
              halved ? "yes" : "no", precise ? "yes" : "no", seconds)};
}

Outcome tree_contrast() {
  std::ifstream in(std::string(RCI_FIXTURES) + "/pilot_thresholds.json");
  if (!in) return {false, "missing pilot_thresholds.json"};
  const double max_drop = nlohmann::json::parse(in).at("tree_contrast").at("max_relative_decrease").get<double>();
  FamilySpec tree;
  tree.kind = FamilyKind::tree;
  tree.degree = 3;
  const auto t0 = std::chrono::steady_clock::now();
  const auto scan = gap_scan(tree, 1.0, {5, 6, 7}, scan_options(13, 20'000));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double d5 = find_row(scan, 5, "gap").estimate.mean;
  const double d6 = find_row(scan, 6, "gap").estimate.mean;
  const double d7 = find_row(scan, 7, "gap").estimate.mean;
  const double drop = (d5 - d7) / d5;
  return {d5 > 0.0 && drop <= max_drop && seconds <= 600.0,
          fmt("D5 %.5f, D6 %.5f, D7 %.5f; relative decrease %.4f (limit %.2f from pilot fixture); %.1f s", d5, d6, d7,
              drop, max_drop, seconds)};
}

Outcome fk_uniqueness() {
  const auto scan = fk_uniqueness_scan(box2(), {0.6}, {8, 16, 32}, scan_options(17, 20'000));
  const auto& d8 = find_row(scan, 8, "open_rb_diff", 0.6).estimate;
  const auto& d16 = find_row(scan, 16, "open_rb_diff", 0.6).estimate;
  const auto& d32 = find_row(scan, 32, "open_rb_diff", 0.6).estimate;
  const bool steps = d16.mean - d8.mean < 2.0 * combined(d8, d16) && d32.mean - d16.mean < 2.0 * combined(d16, d32);
  const bool overall = d8.mean - d32.mean > 2.0 * combined(d8, d32);
  return {steps && overall,
          fmt("wired-free edge marginal D8 %.5f+-%.5f, D16 %.5f+-%.5f, D32 %.5f+-%.5f; no step rises by 2 sigma: %s; "
              "D8 - D32 > 2 sigma: %s",
              d8.mean, d8.stderr_, d16.mean, d16.stderr_, d32.mean, d32.stderr_, steps ? "yes" : "no",
              overall ? "yes" : "no")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome reproducibility() {
  auto config = parse_config(
      "[mc]\nseed = 23\nsweeps = 2000\n[experiment]\n"
      "name = gap_scan, event_frequency_scan, flow_scan, fk_uniqueness_scan, magnetization_curve, ends_scan\n"
      "sizes = 6\nbetas = 0.4, 0.6\n");
  const fs::path base = fs::temp_directory_path() / "rci_acceptance_repro";
  fs::remove_all(base);
  std::vector<std::map<std::string, std::string>> runs;
  for (int w : {1, workers() + 1}) {
    config.output.dir = (base / std::to_string(runs.size())).string();
    const auto out = run_scan_to_dir(config, w);
    std::map<std::string, std::string> files;
    for (const auto& f : out.files)
      if (fs::path(f).extension() == ".csv") files[fs::path(f).filename().string()] = slurp(f);
    runs.push_back(std::move(files));
  }
  fs::remove_all(base);
  const bool ok = runs[0].size() == 6 && runs[0] == runs[1];
  return {ok, fmt("%zu CSV files, byte-identical across reruns with different worker counts: %s", runs[0].size(),
                  runs[0] == runs[1] ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"switching_lemma_sweep", switching},
      {"representation_equivalence", representation},
      {"double_current_identity", double_current},
      {"fk_coupling", fk_coupling},
      {"increment_identity_and_parity_bound", increment_parity},
      {"mc_vs_oracle_torus", mc_vs_oracle},
      {"worm_detailed_balance", worm_balance},
      {"gap_decay_2d", gap_2d},
      {"tree_gap_contrast", tree_contrast},
      {"fk_uniqueness_trend", fk_uniqueness},
      {"scan_reproducibility", reproducibility},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome r;
    try {
      r = run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    if (!r.pass) ++failed;
    std::printf("%s %s: %s\n", r.pass ? "PASS" : "FAIL", name.c_str(), r.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
