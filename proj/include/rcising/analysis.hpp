#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcising/current.hpp"
#include "rcising/graph.hpp"
#include "rcising/mc.hpp"

namespace rci {

/// Graph family used by the scans; `size` is the box side, tree depth or
/// chain length of each instance.
struct FamilySpec {
  FamilyKind kind = FamilyKind::box;
  int dimension = 2;  // box, torus
  int degree = 3;     // tree
  double j0 = 1.0;
  double exponent = 2.0;  // long_range
  double tail_tol = 1e-6;

  int dimension_or_degree() const;
};

/// One finite instance with its free and ghost hosts. x is the centre vertex,
/// y its neighbour (next coordinate along the first axis, first child on trees).
struct Instance {
  FiniteGraph graph;
  CouplingField coupling = CouplingField::table({});
  GhostGraph ghost;
  GraphPtr free_host;
  GraphPtr ghost_host;
  Vertex x = 0;
  Vertex y = 0;
};

Instance make_instance(const FamilySpec& family, int size);

struct ScanRow {
  std::string scan_id;
  std::string family;
  int dimension_or_degree = 0;
  int size = 0;
  double beta = 0.0;
  std::string observable;
  Estimate estimate;
  std::uint64_t seed = 0;
};

struct ScanResult {
  std::string scan_id;
  std::vector<ScanRow> rows;
  nlohmann::json metadata = nlohmann::json::object();
};

const ScanRow& find_row(const ScanResult& scan, int size, const std::string& observable, double beta = -1.0);

/// Seed of one scan cell, derived from the base seed and the cell position.
std::uint64_t cell_seed(std::uint64_t base, const std::string& scan_id, std::uint64_t cell);

enum class GapEstimator { fk, heat_bath };

/// Delta_n = <s_x s_y>^+ - <s_x s_y>^0 on each size, one "gap" row per size.
ScanResult gap_scan(const FamilySpec& family, double beta, const std::vector<int>& sizes, const McOptions& mc,
                    GapEstimator estimator = GapEstimator::fk);

struct ProxyParams {
  int inner_radius = 1;   // non-connection region: vertices within this distance of x
  int outer_radius = -1;  // connection target: vertices at distance >= this (and the ghost); -1: size/2
};

/// Frequencies of A^f_xy under the ghost current and of the finite proxy of
/// A_xy under the double current.
ScanResult event_frequency_scan(const FamilySpec& family, double beta, int size, const ProxyParams& proxy,
                                const McOptions& mc);

/// Frequencies of flow(x, y) >= 2 for y at the given distances along the first
/// axis, and of flow(x, boundary of B_m) >= 3, under the double current.
ScanResult flow_scan(const FamilySpec& family, double beta, int size, const std::vector<int>& distances,
                     int m_radius, const McOptions& mc);

/// Wired and free FK open marginal of the centre pair and connection of its
/// endpoints, with wired - free differences. "open_rb_*" rows estimate the same
/// marginal through p_e (1 + 1[x <-> y]) / 2, which has a smaller variance.
ScanResult fk_uniqueness_scan(const FamilySpec& family, const std::vector<double>& betas,
                              const std::vector<int>& sizes, const McOptions& mc);

/// <s_x>^+ on a beta grid plus finite-difference rows between grid points.
ScanResult magnetization_curve(const FamilySpec& family, const std::vector<double>& betas, int size,
                               const McOptions& mc);

/// Exploratory: components of the largest cluster (ghost pairs ignored) left
/// after deleting vertices within distance r of x that reach distance n.
int ends_proxy(const Current& n, const std::vector<int>& distance_from_x, int inner_radius, int outer_radius);

/// Histogram rows "ends=k" (k = 0..4) and "ends>=5" under the double current.
ScanResult ends_scan(const FamilySpec& family, double beta, int size, int inner_radius, int outer_radius,
                     const McOptions& mc);

/// Header plus one line per row, floats with 17 significant digits.
std::string to_csv(const ScanResult& scan);
void write_csv(const ScanResult& scan, const std::string& path);

}  // namespace rci
