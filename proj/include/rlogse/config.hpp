#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "rlogse/experiments.hpp"
#include "rlogse/io.hpp"

namespace rlogse {

// A fully validated run request: either a catalogued study by name (with
// optional overrides in `options`) or a self-contained custom preset.
// Exactly one of `study` / `custom` is set. `options.progress` is left for
// the caller; everything else, including `options.out_dir` (the `out` key),
// comes from the configuration.
struct RunConfig {
  std::string study;
  std::optional<ExperimentPreset> custom;
  StudyOptions options;
};

// Keys allowed to repeat in run-configuration files ("gausson").
std::span<const std::string_view> run_config_repeatable_keys();

// Validates every key and value; throws ConfigError naming the offending
// key. Catalogued runs take the keys
//   study, desk_scale, tau, t_end, nodes, sweeps, snapshot_every,
//   snapshot_times, threads, out
// and custom runs (selected by a `dims` key) take
//   dims, x_lo, x_hi, y_lo, y_hi, nodes, nodes_y, lambda, epsilon,
//   gausson (repeatable: amplitude width cx cy vx vy), t_end, sweeps,
//   tau                       -- interaction run, or
//   taus, tau_ref             -- accuracy ladder run,
//   snapshot_every, snapshot_times, threads, out.
RunConfig parse_run_config(const ConfigMap& map);
RunConfig parse_run_config(std::string_view text);

}  // namespace rlogse
