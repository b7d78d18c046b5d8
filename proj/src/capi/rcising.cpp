#include "rcising/rcising.h"

#include <cstring>
#include <new>
#include <string>

#include "rcising/config.hpp"
#include "rcising/driver.hpp"
#include "rcising/exact.hpp"
#include "rcising/mc.hpp"

struct rci_config {
  rci::RunConfig value;
};

struct rci_graph {
  rci::GraphPtr host;
};

namespace {

thread_local std::string last_error;

rci_status status_of(rci::ErrorCode code) { return static_cast<rci_status>(static_cast<int>(code)); }

template <class F>
rci_status guard(F&& body) {
  try {
    body();
    last_error.clear();
    return RCI_OK;
  } catch (const rci::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return RCI_ERR_SIZE;
  } catch (const std::exception& e) {
    last_error = e.what();
    return RCI_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return RCI_ERR_INTERNAL;
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) rci::fail(rci::ErrorCode::invalid_argument, what);
}

std::string pair_name(const char* prefix, int x, int y) {
  const auto p = rci::VertexPair::of(x, y);
  return std::string(prefix) + ":" + std::to_string(p.u) + ":" + std::to_string(p.v);
}

}  // namespace

extern "C" {

const char* rci_version(void) { return "1.0.0"; }

const char* rci_last_error(void) { return last_error.c_str(); }

void rci_string_free(char* s) { std::free(s); }

int rci_exit_code(rci_status status) {
  if (status == RCI_OK) return rci::exit_ok;
  if (status == RCI_ERR_INTERNAL) return rci::exit_config;
  return rci::exit_code_for(static_cast<rci::ErrorCode>(static_cast<int>(status)));
}

rci_status rci_config_parse(const char* text, rci_config** out) {
  return guard([&] {
    require(text && out, "null argument");
    *out = new rci_config{rci::parse_config(text)};
  });
}

rci_status rci_config_load(const char* path, rci_config** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = new rci_config{rci::load_config(path)};
  });
}

rci_status rci_config_default(rci_config** out) {
  return guard([&] {
    require(out, "null argument");
    *out = new rci_config{};
  });
}

void rci_config_free(rci_config* config) { delete config; }

rci_status rci_config_set_seed(rci_config* config, uint64_t seed) {
  return guard([&] {
    require(config, "null config");
    config->value.mc.seed = seed;
  });
}

rci_status rci_config_set_output_dir(rci_config* config, const char* dir) {
  return guard([&] {
    require(config && dir, "null argument");
    if (!*dir) rci::fail(rci::ErrorCode::config, "output directory must not be empty");
    config->value.output.dir = dir;
  });
}

rci_status rci_config_echo(const rci_config* config, char** ini) {
  return guard([&] {
    require(config && ini, "null argument");
    *ini = copy_string(rci::to_ini(config->value));
  });
}

rci_status rci_validate(const rci_config* config, int* exit_code, char** report_json) {
  return guard([&] {
    require(config && exit_code && report_json, "null argument");
    const auto r = rci::run_validate(config->value);
    *report_json = copy_string(r.report.dump(2));
    *exit_code = r.exit_code;
  });
}

rci_status rci_verify(const rci_config* config, const char* filter, int workers, int* exit_code,
                      char** result_json) {
  return guard([&] {
    require(config && exit_code && result_json, "null argument");
    const auto r = rci::run_verify(config->value, filter ? filter : "", workers);
    nlohmann::json out = {{"records", r.records}, {"summary", r.summary}};
    *result_json = copy_string(out.dump(2));
    *exit_code = r.exit_code;
  });
}

rci_status rci_scan(const rci_config* config, int workers, int* exit_code, char** manifest_json) {
  return guard([&] {
    require(config && exit_code && manifest_json, "null argument");
    const auto r = rci::run_scan_to_dir(config->value, workers);
    *manifest_json = copy_string(r.manifest.dump(2));
    *exit_code = r.exit_code;
  });
}

rci_status rci_report(const char* dir, char** table) {
  return guard([&] {
    require(dir && table, "null argument");
    *table = copy_string(rci::run_report(dir));
  });
}

rci_status rci_graph_from_pairs(int vertex_count, int pair_count, const int* u, const int* v,
                                const double* coupling, int ghost, rci_graph** out) {
  return guard([&] {
    require(out && pair_count >= 0 && (pair_count == 0 || (u && v && coupling)), "null argument");
    std::vector<rci::Edge> edges;
    for (int i = 0; i < pair_count; ++i) edges.push_back({u[i], v[i], coupling[i]});
    std::optional<rci::Vertex> g;
    if (ghost >= 0) g = ghost;
    *out = new rci_graph{std::make_shared<const rci::WeightedGraph>(vertex_count, std::move(edges), g)};
  });
}

rci_status rci_graph_from_config(const rci_config* config, int with_ghost, rci_graph** out) {
  return guard([&] {
    require(config && out, "null argument");
    const auto g = rci::build_configured_graph(config->value);
    if (with_ghost) {
      const auto ghost = rci::ghost_augment(g.graph, g.coupling, g.graph.family, config->value.graph.tail_tol);
      *out = new rci_graph{rci::make_weighted(ghost)};
    } else {
      *out = new rci_graph{rci::make_weighted(g.graph, g.coupling)};
    }
  });
}

void rci_graph_free(rci_graph* graph) { delete graph; }

int rci_graph_vertex_count(const rci_graph* graph) { return graph ? graph->host->vertex_count() : -1; }

int rci_graph_pair_count(const rci_graph* graph) { return graph ? graph->host->edge_count() : -1; }

int rci_graph_ghost(const rci_graph* graph) {
  if (!graph || !graph->host->ghost()) return -1;
  return *graph->host->ghost();
}

rci_status rci_two_point(const rci_graph* graph, double beta, int x, int y, int cap, double* value,
                         double* error_bound) {
  return guard([&] {
    require(graph && value, "null argument");
    const auto r = rci::two_point(graph->host, beta, x, y, cap);
    *value = r.value;
    if (error_bound) *error_bound = r.error_bound;
  });
}

rci_status rci_spin_correlation(const rci_graph* graph, double beta, rci_boundary boundary, int x, int y,
                                double* value) {
  return guard([&] {
    require(graph && value, "null argument");
    require(boundary >= RCI_BOUNDARY_FREE && boundary <= RCI_BOUNDARY_MINUS, "unknown boundary");
    const rci::Boundary b = boundary == RCI_BOUNDARY_FREE   ? rci::Boundary::free
                            : boundary == RCI_BOUNDARY_PLUS ? rci::Boundary::plus
                                                            : rci::Boundary::minus;
    *value = rci::spin_oracle(*graph->host, beta, b, x, y);
  });
}

rci_status rci_fk_connection(const rci_graph* graph, double beta, int wired, int x, int y, double* value) {
  return guard([&] {
    require(graph && value, "null argument");
    *value = rci::fk_oracle(*graph->host, beta, wired ? rci::FkBoundary::wired : rci::FkBoundary::free, x, y);
  });
}

rci_status rci_mc_two_point(const rci_graph* graph, double beta, rci_sampler sampler, uint64_t seed, int chains,
                            int64_t sweeps, int x, int y, double* mean, double* stderr_out) {
  return guard([&] {
    require(graph && mean, "null argument");
    rci::McOptions o;
    o.seed = seed;
    o.chains = chains;
    o.sweeps = sweeps;
    const bool ghost = graph->host->ghost().has_value();
    const auto pair = rci::VertexPair::of(x, y);
    rci::Estimate e;
    switch (sampler) {
      case RCI_SAMPLER_HEAT_BATH: {
        rci::SpinObservables obs{{pair}, {}, false, false};
        e = rci::find_estimate(
            rci::sample_spins(graph->host, beta, ghost ? rci::Boundary::plus : rci::Boundary::free, o, obs).estimates,
            pair_name("corr", x, y));
        break;
      }
      case RCI_SAMPLER_FK:
        e = rci::find_estimate(rci::sample_fk(graph->host, beta, ghost ? rci::FkBoundary::wired : rci::FkBoundary::free,
                                              o, {{pair}, {}, {}})
                                   .estimates,
                               pair_name("conn", x, y));
        break;
      case RCI_SAMPLER_WORM: {
        rci::CurrentObservables obs;
        obs.two_point.push_back(pair);
        e = rci::find_estimate(rci::sample_current(graph->host, beta, o, obs).estimates, pair_name("corr", x, y));
        break;
      }
      default:
        rci::fail(rci::ErrorCode::invalid_argument, "unknown sampler");
    }
    *mean = e.mean;
    if (stderr_out) *stderr_out = e.stderr_;
  });
}

}  // extern "C"
