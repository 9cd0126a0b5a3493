#include "rlogse/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "rlogse/errors.hpp"

namespace rlogse {

namespace {

using std::string_view_literals::operator""sv;

constexpr std::array kRepeatable = {"gausson"sv};

constexpr std::array kSharedKeys = {"t_end"sv,          "nodes"sv,
                                    "sweeps"sv,         "snapshot_every"sv,
                                    "snapshot_times"sv, "threads"sv,
                                    "out"sv,            "tau"sv};
constexpr std::array kStudyKeys = {"study"sv, "desk_scale"sv};
constexpr std::array kCustomKeys = {"dims"sv,   "x_lo"sv,    "x_hi"sv,
                                    "y_lo"sv,   "y_hi"sv,    "nodes_y"sv,
                                    "lambda"sv, "epsilon"sv, "gausson"sv,
                                    "taus"sv,   "tau_ref"sv};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view key) {
  return std::ranges::find(set, key) != set.end();
}

[[noreturn]] void fail(std::string_view key, std::string_view why) {
  throw ConfigError("key '" + std::string(key) + "': " + std::string(why));
}

void check_known_keys(const ConfigMap& map, bool custom) {
  for (const auto& [key, value] : map.entries) {
    if (contains(kSharedKeys, key)) continue;
    if (custom) {
      if (contains(kCustomKeys, key)) continue;
      if (contains(kStudyKeys, key)) fail(key, "not valid for a custom run");
    } else {
      if (contains(kStudyKeys, key)) continue;
      if (contains(kCustomKeys, key)) {
        fail(key, "only valid for a custom run (alongside 'dims')");
      }
    }
    fail(key, "unknown configuration key");
  }
}

double required_real(const ConfigMap& map, std::string_view key) {
  return config_real(map, key);  // throws naming the key when absent/mistyped
}

long checked_nodes(const ConfigMap& map, std::string_view key) {
  const long n = config_int(map, key);
  if (n < 4 || n % 2 != 0) fail(key, "node count must be an even integer >= 4");
  return n;
}

int checked_sweeps(const ConfigMap& map) {
  const long k = config_int(map, "sweeps");
  if (k < 1 || k > 64) fail("sweeps", "prediction sweep count must be in 1..64");
  return static_cast<int>(k);
}

double checked_positive_real(const ConfigMap& map, std::string_view key) {
  const double x = config_real(map, key);
  if (!(x > 0.0) || !std::isfinite(x)) fail(key, "must be positive and finite");
  return x;
}

// Shared trailing options: cadence, threading, output directory.
void parse_shared_options(const ConfigMap& map, StudyOptions& opt) {
  if (map.has("snapshot_every")) {
    const long n = config_int(map, "snapshot_every");
    if (n < 0) fail("snapshot_every", "cadence must be >= 0 (0 disables)");
    opt.snapshot_every = n;
  }
  if (map.has("snapshot_times")) {
    auto times = config_real_list(map, "snapshot_times");
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!(times[i] > 0.0) || !std::isfinite(times[i])) {
        fail("snapshot_times", "entries must be positive and finite");
      }
      if (i > 0 && times[i] <= times[i - 1]) {
        fail("snapshot_times", "entries must be strictly increasing");
      }
    }
    opt.snapshot_times = std::move(times);
  }
  if (map.has("threads")) {
    const long t = config_int(map, "threads");
    if (t < 1 || t > 1024) fail("threads", "worker count must be in 1..1024");
    opt.threads = static_cast<int>(t);
  }
  if (const auto out = map.get("out")) opt.out_dir = *out;
}

RunConfig parse_catalogued(const ConfigMap& map) {
  RunConfig rc;
  rc.study = *map.get("study");
  if (map.has("desk_scale")) rc.options.desk_scale = config_bool(map, "desk_scale");
  // Resolve now so a bad name fails here, naming the valid studies.
  const ExperimentPreset preset = catalogued_preset(rc.study, rc.options.desk_scale);

  if (map.has("tau")) {
    if (preset.kind != StudyKind::interaction) {
      fail("tau", "a fixed step only applies to interaction studies");
    }
    rc.options.tau = checked_positive_real(map, "tau");
  }
  if (map.has("t_end")) rc.options.t_end = checked_positive_real(map, "t_end");
  if (map.has("nodes")) rc.options.nodes = checked_nodes(map, "nodes");
  if (map.has("sweeps")) rc.options.sweeps = checked_sweeps(map);
  parse_shared_options(map, rc.options);
  return rc;
}

std::vector<GaussonSpec> parse_gaussons(const ConfigMap& map, int dims) {
  const auto lines = map.get_all("gausson");
  if (lines.empty()) {
    fail("gausson", "a custom run needs at least one wave packet "
                    "(amplitude width cx cy vx vy)");
  }
  std::vector<GaussonSpec> out;
  out.reserve(lines.size());
  for (const std::string& line : lines) {
    const auto vals = parse_real_list(line, "key 'gausson'");
    if (vals.size() != 6) {
      fail("gausson", "expected exactly 6 numbers: amplitude width cx cy vx vy");
    }
    GaussonSpec g{vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]};
    if (!(g.width > 0.0) || !std::isfinite(g.width)) {
      fail("gausson", "width must be positive and finite");
    }
    if (!std::isfinite(g.amplitude) || !std::isfinite(g.cx) || !std::isfinite(g.cy) ||
        !std::isfinite(g.vx) || !std::isfinite(g.vy)) {
      fail("gausson", "all entries must be finite");
    }
    if (dims == 1 && (g.cy != 0.0 || g.vy != 0.0)) {
      fail("gausson", "cy and vy must be 0 in one dimension");
    }
    out.push_back(g);
  }
  return out;
}

RunConfig parse_custom(const ConfigMap& map) {
  ExperimentPreset p;
  p.name = "custom";

  const long dims = config_int(map, "dims");
  if (dims != 1 && dims != 2) fail("dims", "must be 1 or 2");
  p.dims = static_cast<int>(dims);

  p.x_lo = required_real(map, "x_lo");
  p.x_hi = required_real(map, "x_hi");
  if (!(p.x_lo < p.x_hi) || !std::isfinite(p.x_lo) || !std::isfinite(p.x_hi)) {
    fail("x_hi", "domain bounds must be finite with x_lo < x_hi");
  }
  p.nx = checked_nodes(map, "nodes");
  if (p.dims == 2) {
    p.y_lo = required_real(map, "y_lo");
    p.y_hi = required_real(map, "y_hi");
    if (!(p.y_lo < p.y_hi) || !std::isfinite(p.y_lo) || !std::isfinite(p.y_hi)) {
      fail("y_hi", "domain bounds must be finite with y_lo < y_hi");
    }
    p.ny = map.has("nodes_y") ? checked_nodes(map, "nodes_y") : p.nx;
  } else {
    for (const std::string_view key : {"y_lo"sv, "y_hi"sv, "nodes_y"sv}) {
      if (map.has(key)) fail(key, "only valid when dims = 2");
    }
    p.y_lo = 0.0;
    p.y_hi = 1.0;
    p.ny = 1;
  }

  p.params.lambda = required_real(map, "lambda");
  if (p.params.lambda == 0.0 || !std::isfinite(p.params.lambda)) {
    fail("lambda", "must be finite and nonzero");
  }
  p.params.epsilon = required_real(map, "epsilon");
  if (!(p.params.epsilon > 0.0) || !std::isfinite(p.params.epsilon)) {
    fail("epsilon", "regularization must be positive and finite");
  }

  p.data = parse_gaussons(map, p.dims);
  p.t_end = checked_positive_real(map, "t_end");
  p.sweeps = map.has("sweeps") ? checked_sweeps(map) : 3;

  const bool has_tau = map.has("tau");
  const bool has_ladder = map.has("taus") || map.has("tau_ref");
  if (has_tau == has_ladder) {
    fail("tau", "a custom run takes either 'tau' (interaction) or "
                "'taus' + 'tau_ref' (accuracy ladder), not both or neither");
  }
  if (has_tau) {
    p.kind = StudyKind::interaction;
    p.tau = checked_positive_real(map, "tau");
    p.snapshot_horizon = p.t_end;
  } else {
    p.kind = StudyKind::accuracy;
    p.taus = config_real_list(map, "taus");
    for (std::size_t i = 0; i < p.taus.size(); ++i) {
      if (!(p.taus[i] > 0.0) || !std::isfinite(p.taus[i])) {
        fail("taus", "ladder entries must be positive and finite");
      }
      if (i > 0 && std::abs(p.taus[i] - 0.5 * p.taus[i - 1]) > 1e-12 * p.taus[i - 1]) {
        fail("taus", "ladder must descend by exact halving");
      }
    }
    p.tau_ref = checked_positive_real(map, "tau_ref");
    if (p.tau_ref > 0.25 * p.taus.back() * (1.0 + 1e-12)) {
      fail("tau_ref", "must be at least 4x smaller than the finest ladder step");
    }
  }

  RunConfig rc;
  rc.custom = std::move(p);
  parse_shared_options(map, rc.options);
  return rc;
}

}  // namespace

std::span<const std::string_view> run_config_repeatable_keys() { return kRepeatable; }

RunConfig parse_run_config(const ConfigMap& map) {
  const bool has_study = map.has("study");
  const bool has_dims = map.has("dims");
  if (has_study == has_dims) {
    throw ConfigError(
        "a run configuration needs exactly one of 'study' (catalogued) or "
        "'dims' (custom run)");
  }
  check_known_keys(map, has_dims);
  return has_study ? parse_catalogued(map) : parse_custom(map);
}

RunConfig parse_run_config(std::string_view text) {
  return parse_run_config(parse_config_text(text, run_config_repeatable_keys()));
}

}  // namespace rlogse
