#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rci {

/// Small-instance identity sweep over every labelled connected graph with
/// 2..max_vertices vertices, `draws` coupling draws in (0, 1] per graph and
/// each beta.
struct SweepOptions {
  std::uint64_t seed = 1;
  int draws = 20;
  std::vector<double> betas = {0.3, 1.0};
  int max_vertices = 4;
  int block_cap = 5;       // switching blocks
  int cap = 12;            // representation, parity bound, event positivity
  int double_cap = 10;     // double-current identity, instances with <= 3 vertices
  int increment_cap = 4;   // increment identity
  int workers = 1;
  std::vector<std::string> identities;  // empty: all
};

/// Identity names accepted by the filter.
const std::vector<std::string>& identity_names();

/// One record per (identity, graph, beta): the worst discrepancy over the
/// draws and every source/pair/functional choice.
struct VerifyRecord {
  std::string identity;
  std::string instance;
  double discrepancy = 0.0;
  double threshold = 0.0;
  double tail_bound = 0.0;
  double elapsed = 0.0;  // seconds
  std::int64_t checks = 0;
  bool pass = true;

  nlohmann::json to_json() const;
};

/// Records come back in canonical order. `on_record` (optional) sees each one
/// in that order as soon as it and all its predecessors are done.
std::vector<VerifyRecord> run_identity_sweep(const SweepOptions& options,
                                             const std::function<void(const VerifyRecord&)>& on_record = {});

}  // namespace rci
