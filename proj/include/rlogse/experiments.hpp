#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlogse/field.hpp"
#include "rlogse/grid.hpp"
#include "rlogse/model.hpp"

namespace rlogse {

// One Gaussian wave packet b * exp(-(a/2)|x - c|^2 + i v.x). In one
// dimension the y components are zero and contribute nothing.
struct GaussonSpec {
  double amplitude = 1.0;  // b
  double width = 1.0;      // a
  double cx = 0.0;
  double cy = 0.0;
  double vx = 0.0;
  double vy = 0.0;
};

enum class StudyKind {
  accuracy,     // tau ladder against a fine-step self-reference at t = t_end
  interaction,  // single-tau long run tracking invariant residuals
};

// A fully resolved catalogued experiment (desk scaling already applied).
struct ExperimentPreset {
  std::string name;
  StudyKind kind = StudyKind::interaction;
  int dims = 1;
  double x_lo = 0.0, x_hi = 1.0;
  long nx = 0;
  double y_lo = 0.0, y_hi = 1.0;
  long ny = 1;
  ModelParams params;
  std::vector<GaussonSpec> data;
  int sweeps = 3;
  double t_end = 1.0;
  // accuracy studies
  std::vector<double> taus;  // descending, halving
  double tau_ref = 0.0;
  // interaction studies
  double tau = 0.0;
  double snapshot_horizon = 0.0;  // the longer horizon used for field plots
};

// Catalogue lookup: accuracy-1d, accuracy-2d, cases-1d/{I,II,III,IV},
// cases-2d/{I,II,III}. desk_scale selects the reduced preset used by the
// acceptance runs. Unknown names throw ConfigError listing valid ones.
ExperimentPreset catalogued_preset(std::string_view name, bool desk_scale = false);
std::vector<std::string> study_names();

Grid make_grid(const ExperimentPreset& preset);
ComplexField initial_condition(const Grid& grid, std::span<const GaussonSpec> data);
ComplexField initial_condition(const ExperimentPreset& preset);

// Discrete L2 distance ||u - uref||_h on a shared grid.
double l2_error(const ComplexField& u, const ComplexField& uref);

struct ConvergenceRow {
  double tau = 0.0;
  double l2_error = 0.0;
  std::optional<double> order;  // log2(e(2 tau) / e(tau)); absent on first row
};

// taus must be sorted descending with exact halving; sizes must match.
std::vector<ConvergenceRow> order_table(std::span<const double> taus,
                                        std::span<const double> errors);

struct ResidualSeries {
  std::vector<double> times;
  std::vector<double> e_mass;
  std::vector<double> e_energy;
};

// Relative invariant residuals |Q_n - Q_0| / |Q_0|. Zero initial invariants
// make the normalization undefined and throw ConfigError.
ResidualSeries residual_series(double mass0, double energy0,
                               std::span<const double> times,
                               std::span<const double> masses,
                               std::span<const double> energies);

struct Peak {
  double position = 0.0;  // |u|^2-weighted centroid, wrapped into the domain
  double height = 0.0;    // max |u| inside the peak's support
};

// Connected regions (periodic wrap merged) where |u| >= rel_threshold times
// the global maximum, reported as centroid/height pairs sorted by position.
std::vector<Peak> find_peaks_1d(const ComplexField& u, double rel_threshold = 0.25);

// One per-step row of an interaction run, matching the residuals.csv layout.
struct StepRecord {
  long step = 0;
  double t = 0.0;
  double e_mass = 0.0;
  double e_energy = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  int newton_iters = 0;
};

struct StudyOptions {
  bool desk_scale = false;           // name-based lookup only
  std::optional<double> tau;         // interaction studies only
  std::optional<double> t_end;
  std::optional<long> nodes;         // per-axis node count
  std::optional<int> sweeps;
  long snapshot_every = 0;           // interaction: extra snapshot every n steps
  std::vector<double> snapshot_times;  // interaction: snapshot at first step
                                       // reaching each time (strictly increasing)
  int threads = 1;
  std::string out_dir;               // empty: no artifacts written
  std::function<void(const std::string&)> progress;  // one line per 100 steps
};

struct Artifact {
  std::string name;  // path relative to out_dir
  std::uint64_t fnv1a = 0;
};

struct StudyResult {
  ExperimentPreset preset;  // with overrides applied
  std::vector<ConvergenceRow> convergence;  // accuracy studies
  std::vector<StepRecord> records;          // interaction studies
  ResidualSeries residuals;                 // interaction studies
  std::optional<ComplexField> final_state;
  std::vector<Artifact> artifacts;
};

StudyResult run_study(const ExperimentPreset& preset, const StudyOptions& options);
StudyResult run_study(std::string_view name, const StudyOptions& options);

}  // namespace rlogse
