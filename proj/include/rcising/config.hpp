#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcising/analysis.hpp"
#include "rcising/graph.hpp"

namespace rci {

/// Run configuration. Text form is INI: sections [graph], [model], [mc],
/// [experiment], [output]; lines starting with ';' are comments. Every key has a
/// default and unknown sections or keys are rejected.
struct RunConfig {
  struct Graph {
    std::string family = "box";
    int dimension = 2;
    int side = 3;
    int degree = 3;
    int depth = 2;
    int length = 10;
    double exponent = 2.0;
    double j0 = 1.0;
    double tail_tol = 1e-6;
    int vertices = 0;                        // table family only
    std::map<VertexPair, double> pairs;      // table family only, "u-v:J, ..."
  } graph;

  struct Model {
    double beta = 0.5;
    int cap = 12;
  } model;

  struct Mc {
    std::uint64_t seed = 1;
    int chains = 4;
    std::int64_t sweeps = 10'000;
    std::int64_t burn_in = -1;  // -1: scaled with vertex count and beta
    std::int64_t thinning = 1;
  } mc;

  struct Experiment {
    std::vector<std::string> names = {"gap_scan"};
    std::vector<int> sizes = {3};
    std::vector<double> betas;  // empty: model.beta
    std::string estimator = "fk";
    int inner_radius = 1;
    int outer_radius = -1;
    std::vector<int> distances = {1, 2};
    int m_radius = -1;
    // identity sweep
    int draws = 20;
    std::vector<double> verify_betas = {0.3, 1.0};
    int block_cap = 5;
    int max_vertices = 4;
    int double_cap = 10;
    int increment_cap = 4;
  } experiment;

  struct Output {
    std::string dir = "out";
    std::vector<std::string> formats = {"csv", "json"};
  } output;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// INI text with every value materialized; parse_config(to_ini(c)) == c.
std::string to_ini(const RunConfig& config);
nlohmann::json to_json(const RunConfig& config);
bool operator==(const RunConfig& a, const RunConfig& b);

/// Graph and coupling described by the [graph] section (size keys as given).
struct ConfiguredGraph {
  FiniteGraph graph;
  CouplingField coupling = CouplingField::table({});
};
ConfiguredGraph build_configured_graph(const RunConfig& config);

FamilySpec family_spec(const RunConfig& config);
McOptions mc_options(const RunConfig& config, int workers);

}  // namespace rci
