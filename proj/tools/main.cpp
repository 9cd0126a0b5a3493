// Command-line driver: selects a catalogued study or a custom run from a
// configuration file plus flag overrides, executes it, and writes the
// deterministic artifact set (CSV tables, field snapshots, manifest).
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 solver
// failure. Progress lines go to standard error; result summaries to
// standard output.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "rlogse/config.hpp"
#include "rlogse/errors.hpp"
#include "rlogse/experiments.hpp"
#include "rlogse/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitSolver = 4;

struct Flags {
  std::string study;
  std::string config_path;
  std::string out_dir;
  bool desk_scale = false;
  std::optional<double> tau;
  std::optional<double> t_end;
  std::optional<long> nodes;
  std::optional<int> sweeps;
  std::optional<long> snapshot_every;
  std::optional<int> threads;
};

// Replaces (or appends) one key in the raw key-value map, so that flags
// override file keys before any validation runs.
void override_key(rlogse::ConfigMap& map, const std::string& key, const std::string& value) {
  std::erase_if(map.entries, [&](const auto& kv) { return kv.first == key; });
  map.entries.emplace_back(key, value);
}

rlogse::RunConfig resolve(const Flags& flags) {
  rlogse::ConfigMap map;
  if (!flags.config_path.empty()) {
    map = rlogse::read_config_file(flags.config_path, rlogse::run_config_repeatable_keys());
  }
  if (!flags.study.empty()) {
    if (map.has("dims")) {
      throw rlogse::ConfigError(
          "key 'study': a study flag cannot override a custom run configuration");
    }
    override_key(map, "study", flags.study);
  }
  if (flags.desk_scale) override_key(map, "desk_scale", "true");
  if (flags.tau) override_key(map, "tau", rlogse::format_real(*flags.tau));
  if (flags.t_end) override_key(map, "t_end", rlogse::format_real(*flags.t_end));
  if (flags.nodes) override_key(map, "nodes", std::to_string(*flags.nodes));
  if (flags.sweeps) override_key(map, "sweeps", std::to_string(*flags.sweeps));
  if (flags.snapshot_every) {
    override_key(map, "snapshot_every", std::to_string(*flags.snapshot_every));
  }
  if (flags.threads) override_key(map, "threads", std::to_string(*flags.threads));
  if (!flags.out_dir.empty()) override_key(map, "out", flags.out_dir);

  rlogse::RunConfig rc = rlogse::parse_run_config(map);
  if (rc.options.out_dir.empty()) rc.options.out_dir = ".";
  return rc;
}

void print_summary(const rlogse::StudyResult& r, const std::string& out_dir) {
  using rlogse::format_real;
  std::printf("study: %s\n", r.preset.name.c_str());
  if (r.preset.kind == rlogse::StudyKind::accuracy) {
    std::printf("%-22s %-22s %s\n", "tau", "l2_error", "order");
    for (const rlogse::ConvergenceRow& row : r.convergence) {
      std::printf("%-22s %-22s %s\n", format_real(row.tau).c_str(),
                  format_real(row.l2_error).c_str(),
                  row.order ? format_real(*row.order).c_str() : "-");
    }
  } else {
    double e_mass = 0.0, e_energy = 0.0;
    for (const rlogse::StepRecord& rec : r.records) {
      e_mass = std::max(e_mass, rec.e_mass);
      e_energy = std::max(e_energy, rec.e_energy);
    }
    std::printf("steps: %zu\n", r.records.size());
    std::printf("max relative mass residual:   %s\n", format_real(e_mass).c_str());
    std::printf("max relative energy residual: %s\n", format_real(e_energy).c_str());
  }
  for (const rlogse::Artifact& a : r.artifacts) {
    std::printf("wrote %s/%s\n", out_dir.c_str(), a.name.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conservative solver for the regularized logarithmic Schrodinger equation"};
  app.set_version_flag("--version", "rlogse 0.1.0");

  Flags flags;
  app.add_option("--study", flags.study,
                 "Catalogued study name (accuracy-1d, accuracy-2d, cases-1d/I..IV, "
                 "cases-2d/I..III)");
  app.add_option("--config", flags.config_path, "Run-configuration file (key = value lines)");
  app.add_option("--out", flags.out_dir, "Output directory for artifacts (default: .)");
  app.add_flag("--desk-scale", flags.desk_scale,
               "Use the reduced preset (smaller grid / shorter horizon)");
  app.add_option("--tau", flags.tau, "Time step override (interaction studies)");
  app.add_option("--t-end", flags.t_end, "Final time override");
  app.add_option("--nodes", flags.nodes, "Grid nodes per axis override");
  app.add_option("--sweeps", flags.sweeps, "Prediction sweep count K");
  app.add_option("--snapshot-every", flags.snapshot_every, "Write a snapshot every n steps");
  app.add_option("--threads", flags.threads, "Worker threads for the stage solves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const rlogse::RunConfig rc = resolve(flags);
    rlogse::StudyOptions options = rc.options;
    options.progress = [](const std::string& line) { std::cerr << line << "\n"; };

    const rlogse::StudyResult result = rc.custom
                                           ? rlogse::run_study(*rc.custom, options)
                                           : rlogse::run_study(rc.study, options);
    print_summary(result, options.out_dir);
    return kExitOk;
  } catch (const rlogse::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const rlogse::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const rlogse::Error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
