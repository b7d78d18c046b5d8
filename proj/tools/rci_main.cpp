// rci: command-line front end over the C API.
#include <cstdint>
#include <cstdio>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "rcising/rcising.h"

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  std::string out;
  std::string filter;
  std::string dir;
};

int report_failure(rci_status status) {
  std::fprintf(stderr, "rci: %s\n", rci_last_error());
  return rci_exit_code(status);
}

// Prints and frees a library-owned string.
void emit(char* text) {
  if (!text) return;
  std::fputs(text, stdout);
  if (*text && text[std::char_traits<char>::length(text) - 1] != '\n') std::fputc('\n', stdout);
  rci_string_free(text);
}

int load(const Flags& f, rci_config** config) {
  rci_status s = f.config.empty() ? rci_config_default(config) : rci_config_load(f.config.c_str(), config);
  if (s != RCI_OK) return report_failure(s);
  if (f.seed_set && (s = rci_config_set_seed(*config, f.seed)) != RCI_OK) return report_failure(s);
  if (!f.out.empty() && (s = rci_config_set_output_dir(*config, f.out.c_str())) != RCI_OK) return report_failure(s);
  return 0;
}

int workers(const Flags& f) {
  if (f.workers > 0) return f.workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

template <class Run>
int with_config(const Flags& f, Run run) {
  rci_config* config = nullptr;
  if (int rc = load(f, &config)) return rc;
  const int rc = run(config);
  rci_config_free(config);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random current representation of the Ising model: exact checks and Monte Carlo scans"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rci_version()));

  Flags f;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "INI configuration file (defaults when omitted)");
    sub->add_option("--seed", f.seed, "override mc.seed")->each([&](const std::string&) { f.seed_set = true; });
    sub->add_option("--workers", f.workers, "worker threads (default: logical cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", f.out, "override output.dir");
  };

  auto* validate = app.add_subcommand("validate", "check conditions C1-C4 on the configured graph");
  common(validate);
  auto* verify = app.add_subcommand("verify", "run the small-instance identity sweep");
  common(verify);
  verify->add_option("--filter", f.filter, "comma-separated identity names");
  auto* scan = app.add_subcommand("scan", "run the configured scans, write CSV files and a manifest");
  common(scan);
  auto* report = app.add_subcommand("report", "summarize a directory of scan output");
  report->add_option("dir", f.dir, "scan output directory");
  report->add_option("--out", f.out, "scan output directory (alternative to the positional)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  if (validate->parsed()) {
    return with_config(f, [&](rci_config* config) {
      int code = 0;
      char* json = nullptr;
      if (rci_status s = rci_validate(config, &code, &json); s != RCI_OK) return report_failure(s);
      emit(json);
      return code;
    });
  }
  if (verify->parsed()) {
    return with_config(f, [&](rci_config* config) {
      int code = 0;
      char* json = nullptr;
      if (rci_status s = rci_verify(config, f.filter.c_str(), workers(f), &code, &json); s != RCI_OK)
        return report_failure(s);
      emit(json);
      return code;
    });
  }
  if (scan->parsed()) {
    return with_config(f, [&](rci_config* config) {
      int code = 0;
      char* json = nullptr;
      if (rci_status s = rci_scan(config, workers(f), &code, &json); s != RCI_OK) return report_failure(s);
      emit(json);
      return code;
    });
  }
  const std::string dir = !f.dir.empty() ? f.dir : f.out;
  if (dir.empty()) {
    std::fprintf(stderr, "rci: report needs a directory\n");
    return 5;
  }
  char* table = nullptr;
  if (rci_status s = rci_report(dir.c_str(), &table); s != RCI_OK) return report_failure(s);
  emit(table);
  return 0;
}
