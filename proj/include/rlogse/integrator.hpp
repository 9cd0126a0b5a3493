#pragma once

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "rlogse/field.hpp"
#include "rlogse/grid.hpp"
#include "rlogse/model.hpp"
#include "rlogse/spectral.hpp"
#include "rlogse/tableau.hpp"

namespace rlogse {

struct SolverConfig {
  double tau = 1e-2;          // step size, > 0
  int sweeps = 3;             // frozen-nonlinearity prediction sweeps K >= 1
  double newton_tol = 1e-13;  // accept when |F|_inf <= newton_tol * scale,
                              // scale = max(1, |E_ref|, M_ref) of the
                              // conservation targets
  int newton_max_iter = 25;
  bool fd_jacobian = false;   // use finite-difference Jacobian throughout
  int threads = 1;            // worker threads for the per-mode stage solves
};

// One completed step of the corrected scheme.
struct StepReport {
  double tau = 0.0;            // size of the step actually taken
  double beta1 = 0.0;          // energy-direction multiplier
  double beta2 = 0.0;          // mass-direction multiplier
  int newton_iterations = 0;
  double mass_after = 0.0;
  double energy_after = 0.0;
  double correction_residual = 0.0;  // |F|_inf / scale at acceptance
  bool shortened = false;            // true for a final partial step
};

// Prediction-correction stepper for
//   i u_t + Lap u = lambda * u * ln((eps+|u|)^2)
// with an s-stage implicit Runge-Kutta base method. Each step predicts the
// stage values by K frozen-nonlinearity sweeps, then corrects the update
// along the discrete energy- and mass-gradient directions so that both
// invariants of the initial state are reproduced to Newton tolerance.
//
// Instances are not safe for concurrent use; the underlying spectral
// operator is.
class SvmStepper {
 public:
  SvmStepper(Grid grid, ModelParams params, ButcherTableau tableau,
             SolverConfig config);

  const Grid& grid() const noexcept { return grid_; }
  const SpectralOperator& spectral() const noexcept { return op_; }
  const ModelParams& params() const noexcept { return params_; }
  const ButcherTableau& tableau() const noexcept { return tableau_; }
  const SolverConfig& config() const noexcept { return config_; }

  // K frozen-nonlinearity sweeps of the implicit stage system at the
  // configured step size; returns the predicted stage values u*_i.
  std::vector<ComplexField> predict(const ComplexField& un) const;

  // Correction using previously predicted stage values. The conservation
  // targets of a standalone correction are the incoming state's invariants.
  std::pair<ComplexField, StepReport> correct(
      const ComplexField& un, std::span<const ComplexField> stages) const;

  // predict + correct at the configured step size.
  std::pair<ComplexField, StepReport> step(const ComplexField& un) const;

  // Repeated steps covering [0, t_end]; a final shorter step is taken (and
  // flagged in its report) when t_end is not a multiple of tau. The observer
  // runs after every completed step with the 1-based step index and the new
  // time. Solver failures are rethrown with step/time context attached.
  // The conservation targets stay pinned to the initial state's invariants
  // for the whole run, so per-step acceptance tolerances bound the total
  // drift at any horizon instead of compounding step over step.
  using Observer = std::function<void(long step, double t, const StepReport&,
                                      const ComplexField& state)>;
  ComplexField integrate(const ComplexField& u0, double t_end,
                         const Observer& observer = {}) const;

 private:
  struct InvariantRefs {
    double mass = 0.0;
    double energy = 0.0;
  };

  const StageSolver& solver_for(double tau) const;
  std::vector<ComplexField> predict_impl(const ComplexField& un,
                                         const StageSolver& solver) const;
  // pinned == nullptr anchors the conservation targets to un's invariants.
  std::pair<ComplexField, StepReport> correct_impl(
      const ComplexField& un, std::span<const ComplexField> stages,
      const StageSolver& solver, const InvariantRefs* pinned = nullptr) const;

  Grid grid_;
  ModelParams params_;
  ButcherTableau tableau_;
  SolverConfig config_;
  SpectralOperator op_;
  // Factorizations are keyed by exact step size; integrate() uses at most
  // two (the nominal tau and one trailing remainder).
  mutable std::vector<std::pair<double, std::unique_ptr<StageSolver>>> solvers_;
};

}  // namespace rlogse
