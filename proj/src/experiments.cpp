#include "rlogse/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <set>
#include <sstream>
#include <system_error>
#include <utility>

#include "rlogse/errors.hpp"
#include "rlogse/integrator.hpp"
#include "rlogse/io.hpp"
#include "rlogse/spectral.hpp"
#include "rlogse/tableau.hpp"

namespace rlogse {

namespace {

constexpr double kPi = std::numbers::pi;

ExperimentPreset accuracy_1d(bool desk) {
  ExperimentPreset p;
  p.name = "accuracy-1d";
  p.kind = StudyKind::accuracy;
  p.dims = 1;
  p.x_lo = -16.0;
  p.x_hi = 16.0;
  p.nx = desk ? 256 : 512;
  p.params = {-1.0, 1e-15};
  p.data = {GaussonSpec{std::sqrt(1.0 / kPi), 1.0, 0.0, 0.0, 1.0, 0.0}};
  p.t_end = 1.0;
  p.taus = {1.0 / 40, 1.0 / 80, 1.0 / 160, 1.0 / 320, 1.0 / 640};
  p.tau_ref = 1e-4;
  return p;
}

ExperimentPreset accuracy_2d(bool desk) {
  ExperimentPreset p;
  p.name = "accuracy-2d";
  p.kind = StudyKind::accuracy;
  p.dims = 2;
  p.x_lo = p.y_lo = -16.0;
  p.x_hi = p.y_hi = 16.0;
  p.nx = p.ny = desk ? 128 : 512;
  p.params = {-1.0, 1e-12};
  p.data = {GaussonSpec{std::pow(kPi, -1.0 / 3.0), 1.0, -2.0, 0.0, 1.0, 1.0}};
  p.t_end = 1.0;
  if (desk) {
    p.taus = {1.0 / 10, 1.0 / 20, 1.0 / 40, 1.0 / 80};
    p.tau_ref = 1.0 / 320;
  } else {
    p.taus = {1.0 / 40, 1.0 / 80, 1.0 / 160, 1.0 / 320, 1.0 / 640};
    p.tau_ref = 2e-4;
  }
  return p;
}

ExperimentPreset cases_1d(char roman, bool desk) {
  ExperimentPreset p;
  p.kind = StudyKind::interaction;
  p.dims = 1;
  p.nx = desk ? 512 : 1024;
  p.params = {-1.0, 1e-15};
  p.tau = 5e-3;
  p.t_end = 100.0;  // horizon of the invariant-residual study
  double half = 0.0;
  double cx = 0.0;
  double v = 0.0;
  switch (roman) {
    case '1':
      p.name = "cases-1d/I";
      half = 16.0;
      cx = 5.0;
      p.snapshot_horizon = 500.0;
      if (desk) p.t_end = 10.0;
      break;
    case '2':
      p.name = "cases-1d/II";
      half = 40.0;
      cx = 3.0;
      p.snapshot_horizon = 100.0;
      if (desk) p.t_end = 10.0;
      break;
    case '3':
      p.name = "cases-1d/III";
      half = 50.0;
      cx = 30.0;
      v = 2.0;
      p.snapshot_horizon = 16.0;
      if (desk) p.t_end = 16.0;
      break;
    case '4':
      p.name = "cases-1d/IV";
      half = 50.0;
      cx = 30.0;
      v = 15.0;
      p.snapshot_horizon = 3.0;
      if (desk) p.t_end = 3.0;
      break;
  }
  p.x_lo = -half;
  p.x_hi = half;
  if (desk) p.snapshot_horizon = p.t_end;
  p.data = {GaussonSpec{1.0, 1.0, -cx, 0.0, v, 0.0},
            GaussonSpec{1.0, 1.0, cx, 0.0, -v, 0.0}};
  return p;
}

ExperimentPreset cases_2d(char roman, bool desk) {
  ExperimentPreset p;
  p.kind = StudyKind::interaction;
  p.dims = 2;
  p.x_lo = p.y_lo = -32.0;
  p.x_hi = p.y_hi = 32.0;
  p.nx = p.ny = desk ? 128 : 512;
  p.params = {-1.0, 1e-12};
  p.tau = 1e-2;
  p.t_end = desk ? 5.0 : 100.0;
  p.snapshot_horizon = p.t_end;
  const double b = std::pow(kPi, -0.25);
  switch (roman) {
    case '1':
      p.name = "cases-2d/I";
      p.data = {GaussonSpec{b, 1.0, -2.0, 0.0, 0.0, 0.0},
                GaussonSpec{b, 1.0, 2.0, 0.0, 0.0, 0.0}};
      break;
    case '2':
      p.name = "cases-2d/II";
      p.data = {GaussonSpec{b, 1.0, 0.0, 0.0, -0.15, 0.0},
                GaussonSpec{b / 1.5, 1.0, 5.0, 0.0, 0.0, 0.0}};
      break;
    case '3':
      p.name = "cases-2d/III";
      p.data = {GaussonSpec{b, 1.0, -2.0, 0.0, 0.0, 0.0},
                GaussonSpec{b, 1.0, 2.0, 0.0, 0.0, 0.85}};
      break;
  }
  return p;
}

void validate_ladder(std::span<const double> taus) {
  if (taus.empty()) {
    throw ConfigError("accuracy study: the tau ladder is empty");
  }
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0) || !std::isfinite(taus[i])) {
      throw ConfigError("accuracy study: tau ladder entries must be positive and finite");
    }
    if (i > 0 && std::abs(taus[i] - 0.5 * taus[i - 1]) > 1e-12 * taus[i - 1]) {
      throw ConfigError(
          "accuracy study: tau ladder must descend by exact halving (study-configuration "
          "error)");
    }
  }
}

std::string study_label(const ExperimentPreset& p) { return p.name.empty() ? "study" : p.name; }

void validate_snapshot_times(std::span<const double> times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || !std::isfinite(times[i])) {
      throw ConfigError("snapshot_times: entries must be positive and finite");
    }
    if (i > 0 && times[i] <= times[i - 1]) {
      throw ConfigError("snapshot_times: entries must be strictly increasing");
    }
  }
}

void apply_overrides(ExperimentPreset& p, const StudyOptions& opt) {
  if (opt.nodes) {
    p.nx = *opt.nodes;
    if (p.dims == 2) p.ny = *opt.nodes;
  }
  if (opt.sweeps) p.sweeps = *opt.sweeps;
  if (opt.t_end) p.t_end = *opt.t_end;
  if (opt.tau) {
    if (p.kind != StudyKind::interaction) {
      throw ConfigError(
          "tau: override applies only to interaction studies (accuracy presets fix a tau "
          "ladder)");
    }
    p.tau = *opt.tau;
  }
}

SolverConfig solver_config(const ExperimentPreset& p, double tau, const StudyOptions& opt) {
  SolverConfig cfg;
  cfg.tau = tau;
  cfg.sweeps = p.sweeps;
  cfg.threads = opt.threads;
  return cfg;
}

long planned_steps(double t_end, double tau) {
  const auto n_full = static_cast<long>(std::floor(t_end / tau + 1e-9));
  const double remainder = t_end - static_cast<double>(n_full) * tau;
  return n_full + (remainder > tau * 1e-9 ? 1 : 0);
}

SvmStepper::Observer progress_observer(const StudyOptions& opt, const std::string& label,
                                       long total_steps) {
  if (!opt.progress) return {};
  auto sink = opt.progress;
  return [sink, label, total_steps](long step, double t, const StepReport&, const ComplexField&) {
    if (step % 100 == 0 || step == total_steps) {
      std::ostringstream os;
      os << label << ": step " << step << "/" << total_steps << " (t = " << t << ")";
      sink(os.str());
    }
  };
}

// Composes observers; either may be empty.
SvmStepper::Observer chain(SvmStepper::Observer a, SvmStepper::Observer b) {
  if (!a) return b;
  if (!b) return a;
  return [a = std::move(a), b = std::move(b)](long step, double t, const StepReport& rep,
                                              const ComplexField& u) {
    a(step, t, rep, u);
    b(step, t, rep, u);
  };
}

struct ArtifactSink {
  std::filesystem::path dir;
  std::vector<Artifact>* artifacts;

  void write(const std::string& name, std::string_view content) const {
    artifacts->push_back({name, fnv1a64(content)});
    write_text_file(dir / name, content);
  }
};

std::string snapshot_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06ld.bin", step);
  return buf;
}

StudyResult run_interaction(const ExperimentPreset& p, const StudyOptions& opt,
                            std::string_view echo) {
  const Grid grid = make_grid(p);
  const ComplexField u0 = initial_condition(grid, p.data);
  const SpectralOperator op(grid);
  const double mass0 = mass(u0);
  const double energy0 = energy(u0, p.params, op);
  if (mass0 == 0.0 || energy0 == 0.0) {
    throw ConfigError(
        "interaction study: initial mass and energy must be nonzero (residual "
        "normalization undefined)");
  }

  StudyResult result;
  result.preset = p;

  const bool writing = !opt.out_dir.empty();
  ArtifactSink sink{opt.out_dir, &result.artifacts};
  if (writing) {
    std::error_code ec;
    std::filesystem::create_directories(sink.dir, ec);
    if (ec) {
      throw IoError("cannot create output directory '" + sink.dir.string() + "': " +
                    ec.message());
    }
  }

  SnapshotMeta meta;
  meta.lambda = p.params.lambda;
  meta.epsilon = p.params.epsilon;
  meta.tau = p.tau;
  meta.sweeps = p.sweeps;

  validate_snapshot_times(opt.snapshot_times);

  std::set<long> snapped;
  auto snap = [&](long step, double t, const ComplexField& u) {
    if (!writing || snapped.contains(step)) return;
    snapped.insert(step);
    SnapshotMeta m = meta;
    m.t = t;
    sink.write(snapshot_name(step), encode_snapshot(u, m));
  };
  snap(0, 0.0, u0);

  const long total = planned_steps(p.t_end, p.tau);
  result.records.reserve(static_cast<std::size_t>(std::max<long>(total, 0)));
  std::size_t next_time = 0;
  SvmStepper::Observer recorder = [&](long step, double t, const StepReport& rep,
                                      const ComplexField& u) {
    StepRecord rec;
    rec.step = step;
    rec.t = t;
    rec.e_mass = std::abs(rep.mass_after - mass0) / std::abs(mass0);
    rec.e_energy = std::abs(rep.energy_after - energy0) / std::abs(energy0);
    rec.beta1 = rep.beta1;
    rec.beta2 = rep.beta2;
    rec.newton_iters = rep.newton_iterations;
    result.records.push_back(rec);
    if (opt.snapshot_every > 0 && step % opt.snapshot_every == 0) snap(step, t, u);
    while (next_time < opt.snapshot_times.size() &&
           t >= opt.snapshot_times[next_time] - p.tau * 1e-9) {
      snap(step, t, u);
      ++next_time;
    }
  };

  SvmStepper stepper(grid, p.params, ButcherTableau::gauss(2),
                     solver_config(p, p.tau, opt));
  ComplexField uT = stepper.integrate(
      u0, p.t_end, chain(std::move(recorder), progress_observer(opt, study_label(p), total)));

  const long last_step = result.records.empty() ? 0 : result.records.back().step;
  snap(last_step, p.t_end, uT);

  result.residuals.times.reserve(result.records.size());
  result.residuals.e_mass.reserve(result.records.size());
  result.residuals.e_energy.reserve(result.records.size());
  for (const StepRecord& rec : result.records) {
    result.residuals.times.push_back(rec.t);
    result.residuals.e_mass.push_back(rec.e_mass);
    result.residuals.e_energy.push_back(rec.e_energy);
  }
  result.final_state = std::move(uT);

  if (writing) {
    sink.write("residuals.csv", encode_residuals_csv(result.records));
    const std::string manifest = encode_manifest(echo, result.artifacts);
    result.artifacts.push_back({"manifest.txt", fnv1a64(manifest)});
    write_text_file(sink.dir / "manifest.txt", manifest);
  }
  return result;
}

StudyResult run_accuracy(const ExperimentPreset& p, const StudyOptions& opt,
                         std::string_view echo) {
  validate_ladder(p.taus);
  const double tau_min = p.taus.back();
  if (!(p.tau_ref > 0.0) || p.tau_ref > 0.25 * tau_min * (1.0 + 1e-12)) {
    throw ConfigError(
        "accuracy study: tau_ref must be positive and at least 4x smaller than the finest "
        "ladder step");
  }

  const Grid grid = make_grid(p);
  const ComplexField u0 = initial_condition(grid, p.data);

  StudyResult result;
  result.preset = p;

  auto solve_at = [&](double tau, const std::string& label) {
    SvmStepper stepper(grid, p.params, ButcherTableau::gauss(2), solver_config(p, tau, opt));
    return stepper.integrate(u0, p.t_end,
                             progress_observer(opt, label, planned_steps(p.t_end, tau)));
  };

  const ComplexField ref =
      solve_at(p.tau_ref, study_label(p) + " reference tau=" + format_real(p.tau_ref));
  std::vector<double> errors;
  errors.reserve(p.taus.size());
  std::optional<ComplexField> finest;
  for (const double tau : p.taus) {
    ComplexField u = solve_at(tau, study_label(p) + " tau=" + format_real(tau));
    errors.push_back(l2_error(u, ref));
    finest = std::move(u);
  }
  result.convergence = order_table(p.taus, errors);
  result.final_state = std::move(finest);

  if (!opt.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    if (ec) {
      throw IoError("cannot create output directory '" + opt.out_dir + "': " + ec.message());
    }
    ArtifactSink sink{opt.out_dir, &result.artifacts};
    sink.write("convergence.csv", encode_convergence_csv(result.convergence));
    const std::string manifest = encode_manifest(echo, result.artifacts);
    result.artifacts.push_back({"manifest.txt", fnv1a64(manifest)});
    write_text_file(sink.dir / "manifest.txt", manifest);
  }
  return result;
}

void echo_common(std::ostringstream& os, const ExperimentPreset& p, const StudyOptions& opt) {
  os << "nodes = " << p.nx << '\n';
  os << "sweeps = " << p.sweeps << '\n';
  os << "t_end = " << format_real(p.t_end) << '\n';
  if (p.kind == StudyKind::interaction) {
    os << "tau = " << format_real(p.tau) << '\n';
  }
  os << "snapshot_every = " << opt.snapshot_every << '\n';
  if (!opt.snapshot_times.empty()) {
    os << "snapshot_times =";
    for (const double t : opt.snapshot_times) os << ' ' << format_real(t);
    os << '\n';
  }
  os << "threads = " << opt.threads << '\n';
}

std::string catalogued_echo(const ExperimentPreset& p, const StudyOptions& opt,
                            std::string_view name, bool desk) {
  std::ostringstream os;
  os << "study = " << name << '\n';
  os << "desk_scale = " << (desk ? "true" : "false") << '\n';
  echo_common(os, p, opt);
  return std::move(os).str();
}

std::string custom_echo(const ExperimentPreset& p, const StudyOptions& opt) {
  std::ostringstream os;
  os << "dims = " << p.dims << '\n';
  os << "x_lo = " << format_real(p.x_lo) << '\n';
  os << "x_hi = " << format_real(p.x_hi) << '\n';
  if (p.dims == 2) {
    os << "y_lo = " << format_real(p.y_lo) << '\n';
    os << "y_hi = " << format_real(p.y_hi) << '\n';
    if (p.ny != p.nx) os << "nodes_y = " << p.ny << '\n';
  }
  os << "lambda = " << format_real(p.params.lambda) << '\n';
  os << "epsilon = " << format_real(p.params.epsilon) << '\n';
  for (const GaussonSpec& g : p.data) {
    os << "gausson = " << format_real(g.amplitude) << ' ' << format_real(g.width) << ' '
       << format_real(g.cx) << ' ' << format_real(g.cy) << ' ' << format_real(g.vx) << ' '
       << format_real(g.vy) << '\n';
  }
  if (p.kind == StudyKind::accuracy) {
    os << "taus =";
    for (const double t : p.taus) os << ' ' << format_real(t);
    os << '\n';
    os << "tau_ref = " << format_real(p.tau_ref) << '\n';
  }
  echo_common(os, p, opt);
  return std::move(os).str();
}

StudyResult dispatch(const ExperimentPreset& p, const StudyOptions& opt, std::string_view echo) {
  if (p.kind == StudyKind::accuracy) return run_accuracy(p, opt, echo);
  return run_interaction(p, opt, echo);
}

}  // namespace

ExperimentPreset catalogued_preset(std::string_view name, bool desk_scale) {
  if (name == "accuracy-1d") return accuracy_1d(desk_scale);
  if (name == "accuracy-2d") return accuracy_2d(desk_scale);
  if (name == "cases-1d/I") return cases_1d('1', desk_scale);
  if (name == "cases-1d/II") return cases_1d('2', desk_scale);
  if (name == "cases-1d/III") return cases_1d('3', desk_scale);
  if (name == "cases-1d/IV") return cases_1d('4', desk_scale);
  if (name == "cases-2d/I") return cases_2d('1', desk_scale);
  if (name == "cases-2d/II") return cases_2d('2', desk_scale);
  if (name == "cases-2d/III") return cases_2d('3', desk_scale);
  std::ostringstream os;
  os << "unknown study '" << name << "'; available studies:";
  for (const std::string& s : study_names()) os << ' ' << s;
  throw ConfigError(os.str());
}

std::vector<std::string> study_names() {
  return {"accuracy-1d", "accuracy-2d", "cases-1d/I", "cases-1d/II", "cases-1d/III",
          "cases-1d/IV", "cases-2d/I", "cases-2d/II", "cases-2d/III"};
}

Grid make_grid(const ExperimentPreset& preset) {
  const int nx = static_cast<int>(preset.nx);
  const int ny = static_cast<int>(preset.ny);
  if (preset.dims == 1) return Grid::make_1d(preset.x_lo, preset.x_hi, nx);
  if (preset.dims == 2) {
    return Grid::make_2d(preset.x_lo, preset.x_hi, nx, preset.y_lo, preset.y_hi, ny);
  }
  throw ConfigError("preset dims must be 1 or 2");
}

ComplexField initial_condition(const Grid& grid, std::span<const GaussonSpec> data) {
  if (data.empty()) {
    throw ConfigError("initial condition needs at least one wave packet");
  }
  for (const GaussonSpec& g : data) {
    if (!(g.width > 0.0) || !std::isfinite(g.width)) {
      throw ConfigError("gausson width must be positive and finite");
    }
    if (!std::isfinite(g.amplitude) || !std::isfinite(g.cx) || !std::isfinite(g.cy) ||
        !std::isfinite(g.vx) || !std::isfinite(g.vy)) {
      throw ConfigError("gausson parameters must be finite");
    }
  }
  ComplexField f(grid);
  for (int j = 0; j < grid.nx(); ++j) {
    const double x = grid.x(j);
    for (int k = 0; k < grid.ny(); ++k) {
      const double y = grid.y(k);
      Complex sum{0.0, 0.0};
      for (const GaussonSpec& g : data) {
        const double dx = x - g.cx;
        const double dy = y - g.cy;
        const double mag = g.amplitude * std::exp(-0.5 * g.width * (dx * dx + dy * dy));
        sum += std::polar(mag, g.vx * x + g.vy * y);
      }
      f.at(j, k) = sum;
    }
  }
  return f;
}

ComplexField initial_condition(const ExperimentPreset& preset) {
  return initial_condition(make_grid(preset), preset.data);
}

double l2_error(const ComplexField& u, const ComplexField& uref) {
  require_same_grid(u.grid(), uref.grid(), "l2_error");
  return std::sqrt(norm_sq(u - uref));
}

std::vector<ConvergenceRow> order_table(std::span<const double> taus,
                                        std::span<const double> errors) {
  if (taus.size() != errors.size()) {
    throw DimensionError("order_table: tau and error lists differ in length");
  }
  validate_ladder(taus);
  std::vector<ConvergenceRow> rows;
  rows.reserve(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    ConvergenceRow row;
    row.tau = taus[i];
    row.l2_error = errors[i];
    if (i > 0 && errors[i - 1] > 0.0 && errors[i] > 0.0) {
      row.order = std::log2(errors[i - 1] / errors[i]);
    }
    rows.push_back(row);
  }
  return rows;
}

ResidualSeries residual_series(double mass0, double energy0, std::span<const double> times,
                               std::span<const double> masses,
                               std::span<const double> energies) {
  if (times.size() != masses.size() || times.size() != energies.size()) {
    throw DimensionError("residual_series: input series differ in length");
  }
  if (mass0 == 0.0 || !std::isfinite(mass0)) {
    throw ConfigError("residual_series: initial mass must be nonzero and finite");
  }
  if (energy0 == 0.0 || !std::isfinite(energy0)) {
    throw ConfigError("residual_series: initial energy must be nonzero and finite");
  }
  ResidualSeries s;
  s.times.assign(times.begin(), times.end());
  s.e_mass.reserve(times.size());
  s.e_energy.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    s.e_mass.push_back(std::abs(masses[i] - mass0) / std::abs(mass0));
    s.e_energy.push_back(std::abs(energies[i] - energy0) / std::abs(energy0));
  }
  return s;
}

std::vector<Peak> find_peaks_1d(const ComplexField& u, double rel_threshold) {
  const Grid& g = u.grid();
  if (g.dims() != 1) {
    throw DimensionError("find_peaks_1d: expected a one-dimensional field");
  }
  if (!(rel_threshold > 0.0) || !(rel_threshold < 1.0)) {
    throw ConfigError("find_peaks_1d: relative threshold must lie in (0, 1)");
  }
  const long n = g.nx();
  const auto vals = u.values();
  double maxabs = 0.0;
  for (const Complex z : vals) maxabs = std::max(maxabs, std::abs(z));
  std::vector<Peak> peaks;
  if (maxabs == 0.0) return peaks;
  const double thr = rel_threshold * maxabs;

  std::vector<char> mask(static_cast<std::size_t>(n));
  long above = 0;
  for (long j = 0; j < n; ++j) {
    mask[static_cast<std::size_t>(j)] = std::abs(vals[static_cast<std::size_t>(j)]) >= thr;
    above += mask[static_cast<std::size_t>(j)] ? 1 : 0;
  }

  const double box = g.x_hi() - g.x_lo();
  auto emit = [&](long start, long length) {
    KahanSum wsum;
    KahanSum xsum;
    double height = 0.0;
    for (long i = 0; i < length; ++i) {
      const long j = (start + i) % n;
      const double a = std::abs(vals[static_cast<std::size_t>(j)]);
      const double w = a * a;
      const double x_unwrapped = g.x_lo() + static_cast<double>(start + i) * g.hx();
      wsum.add(w);
      xsum.add(static_cast<long double>(w) * x_unwrapped);
      height = std::max(height, a);
    }
    double pos = static_cast<double>(xsum.value() / wsum.value());
    pos = g.x_lo() + std::fmod(pos - g.x_lo(), box);
    if (pos < g.x_lo()) pos += box;
    peaks.push_back({pos, height});
  };

  if (above == n) {
    emit(0, n);
    return peaks;
  }
  // Walk components starting just after gaps so wrap-around regions merge.
  for (long j = 0; j < n; ++j) {
    const bool prev = mask[static_cast<std::size_t>((j + n - 1) % n)];
    if (!mask[static_cast<std::size_t>(j)] || prev) continue;
    long length = 0;
    while (mask[static_cast<std::size_t>((j + length) % n)]) ++length;
    emit(j, length);
  }
  std::ranges::sort(peaks, {}, &Peak::position);
  return peaks;
}

StudyResult run_study(const ExperimentPreset& preset, const StudyOptions& options) {
  ExperimentPreset p = preset;
  apply_overrides(p, options);
  return dispatch(p, options, custom_echo(p, options));
}

StudyResult run_study(std::string_view name, const StudyOptions& options) {
  ExperimentPreset p = catalogued_preset(name, options.desk_scale);
  apply_overrides(p, options);
  return dispatch(p, options, catalogued_echo(p, options, name, options.desk_scale));
}

}  // namespace rlogse
