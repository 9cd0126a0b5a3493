// Python bindings for the conservative logarithmic-Schrodinger solver:
// grids, complex fields (numpy-backed), model functionals, the
// prediction-correction stepper, and the catalogued study driver.

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <complex>
#include <cstring>
#include <utility>

#include "rlogse/config.hpp"
#include "rlogse/errors.hpp"
#include "rlogse/experiments.hpp"
#include "rlogse/field.hpp"
#include "rlogse/grid.hpp"
#include "rlogse/integrator.hpp"
#include "rlogse/io.hpp"
#include "rlogse/model.hpp"
#include "rlogse/spectral.hpp"
#include "rlogse/tableau.hpp"

namespace py = pybind11;
using namespace rlogse;

namespace {

using NpComplex = py::array_t<std::complex<double>>;

NpComplex field_to_numpy(const ComplexField& u) {
  const Grid& g = u.grid();
  NpComplex out = g.dims() == 1
                      ? NpComplex(py::array::ShapeContainer{static_cast<py::ssize_t>(g.nx())})
                      : NpComplex({static_cast<py::ssize_t>(g.nx()),
                                   static_cast<py::ssize_t>(g.ny())});
  std::memcpy(out.mutable_data(), u.values().data(), u.size() * sizeof(Complex));
  return out;
}

ComplexField field_from_numpy(const Grid& grid, const NpComplex& array) {
  const auto buf = py::array_t<std::complex<double>,
                               py::array::c_style | py::array::forcecast>::ensure(array);
  if (!buf) throw DimensionError("expected a complex128 array");
  bool shape_ok = false;
  if (grid.dims() == 1) {
    shape_ok = buf.ndim() == 1 && buf.shape(0) == grid.nx();
  } else {
    shape_ok = buf.ndim() == 2 && buf.shape(0) == grid.nx() && buf.shape(1) == grid.ny();
  }
  if (!shape_ok) {
    throw DimensionError("array shape does not match the grid");
  }
  ComplexField u(grid);
  std::memcpy(u.values().data(), buf.data(), u.size() * sizeof(Complex));
  return u;
}

}  // namespace

PYBIND11_MODULE(_rlogse, m) {
  m.doc() =
      "Mass- and energy-conserving pseudo-spectral solver for the regularized "
      "logarithmic Schrodinger equation on periodic domains.";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const SolverError& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    } catch (const Error& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::class_<Grid>(m, "Grid", "Uniform periodic grid (1-D or 2-D, even node counts)")
      .def_static("make_1d", &Grid::make_1d, py::arg("x_lo"), py::arg("x_hi"),
                  py::arg("nx"))
      .def_static("make_2d", &Grid::make_2d, py::arg("x_lo"), py::arg("x_hi"),
                  py::arg("nx"), py::arg("y_lo"), py::arg("y_hi"), py::arg("ny"))
      .def_property_readonly("dims", &Grid::dims)
      .def_property_readonly("nx", &Grid::nx)
      .def_property_readonly("ny", &Grid::ny)
      .def_property_readonly("x_lo", &Grid::x_lo)
      .def_property_readonly("x_hi", &Grid::x_hi)
      .def_property_readonly("y_lo", &Grid::y_lo)
      .def_property_readonly("y_hi", &Grid::y_hi)
      .def_property_readonly("hx", &Grid::hx)
      .def_property_readonly("hy", &Grid::hy)
      .def("__len__", &Grid::size)
      .def("x", &Grid::x, py::arg("j"))
      .def("y", &Grid::y, py::arg("k"))
      .def(py::self == py::self)
      .def(py::self != py::self)
      .def("__repr__", [](const Grid& g) {
        if (g.dims() == 1) {
          return "Grid(1d, [" + format_real(g.x_lo()) + ", " + format_real(g.x_hi()) +
                 "), nx=" + std::to_string(g.nx()) + ")";
        }
        return "Grid(2d, [" + format_real(g.x_lo()) + ", " + format_real(g.x_hi()) +
               ")x[" + format_real(g.y_lo()) + ", " + format_real(g.y_hi()) +
               "), nx=" + std::to_string(g.nx()) + ", ny=" + std::to_string(g.ny()) + ")";
      });

  py::class_<ComplexField>(m, "ComplexField",
                           "Complex samples on a Grid (row-major, numpy-convertible)")
      .def(py::init<Grid>(), py::arg("grid"))
      .def(py::init(&field_from_numpy), py::arg("grid"), py::arg("values"))
      .def_property_readonly("grid", &ComplexField::grid)
      .def("__len__", &ComplexField::size)
      .def("to_numpy", &field_to_numpy,
           "Copy the samples into a complex128 array (1-D: (nx,), 2-D: (nx, ny))");

  m.def("field_from_numpy", &field_from_numpy, py::arg("grid"), py::arg("values"));

  py::class_<ModelParams>(m, "ModelParams",
                          "lambda (exposed as 'lam') and regularization epsilon of "
                          "i u_t + Lap u = lam * u * ln((eps+|u|)^2)")
      .def(py::init([](double lam, double epsilon) {
             ModelParams p;
             p.lambda = lam;
             p.epsilon = epsilon;
             validate(p);
             return p;
           }),
           py::arg("lam") = -1.0, py::arg("epsilon") = 1e-12)
      .def_readwrite("lam", &ModelParams::lambda)
      .def_readwrite("epsilon", &ModelParams::epsilon);

  py::class_<ButcherTableau>(m, "ButcherTableau", "Implicit Runge-Kutta coefficients")
      .def_static("gauss", &ButcherTableau::gauss, py::arg("stages"),
                  "Gauss collocation tableau (classical order 2*stages)")
      .def_readonly("name", &ButcherTableau::name)
      .def_readonly("stages", &ButcherTableau::stages)
      .def_readonly("a", &ButcherTableau::a)
      .def_readonly("b", &ButcherTableau::b)
      .def_readonly("c", &ButcherTableau::c);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init([](double tau, int sweeps, double newton_tol, int newton_max_iter,
                       bool fd_jacobian, int threads) {
             SolverConfig c;
             c.tau = tau;
             c.sweeps = sweeps;
             c.newton_tol = newton_tol;
             c.newton_max_iter = newton_max_iter;
             c.fd_jacobian = fd_jacobian;
             c.threads = threads;
             return c;
           }),
           py::arg("tau") = 1e-2, py::arg("sweeps") = 3, py::arg("newton_tol") = 1e-13,
           py::arg("newton_max_iter") = 25, py::arg("fd_jacobian") = false,
           py::arg("threads") = 1)
      .def_readwrite("tau", &SolverConfig::tau)
      .def_readwrite("sweeps", &SolverConfig::sweeps)
      .def_readwrite("newton_tol", &SolverConfig::newton_tol)
      .def_readwrite("newton_max_iter", &SolverConfig::newton_max_iter)
      .def_readwrite("fd_jacobian", &SolverConfig::fd_jacobian)
      .def_readwrite("threads", &SolverConfig::threads);

  py::class_<StepReport>(m, "StepReport", "Diagnostics of one corrected step")
      .def_readonly("tau", &StepReport::tau)
      .def_readonly("beta1", &StepReport::beta1)
      .def_readonly("beta2", &StepReport::beta2)
      .def_readonly("newton_iterations", &StepReport::newton_iterations)
      .def_readonly("mass_after", &StepReport::mass_after)
      .def_readonly("energy_after", &StepReport::energy_after)
      .def_readonly("correction_residual", &StepReport::correction_residual)
      .def_readonly("shortened", &StepReport::shortened);

  py::class_<SpectralOperator>(m, "SpectralOperator",
                               "Fourier differentiation on one grid")
      .def(py::init<Grid>(), py::arg("grid"))
      .def("laplacian", &SpectralOperator::laplacian, py::arg("u"));

  m.def("mass", &mass, py::arg("u"), "Discrete mass <u, u>_h");
  m.def("energy", &energy, py::arg("u"), py::arg("params"), py::arg("op"),
        "Discrete energy (spectral kinetic part + regularized potential)");
  m.def("nonlinear_term", &nonlinear_term, py::arg("u"), py::arg("params"),
        "lam * u * ln((eps+|u|)^2)");
  m.def("grad_mass", &grad_mass, py::arg("u"));
  m.def("grad_energy", &grad_energy, py::arg("u"), py::arg("params"), py::arg("op"));
  m.def("l2_error", &l2_error, py::arg("u"), py::arg("uref"),
        "Discrete L2 distance on a shared grid");

  py::class_<SvmStepper>(m, "SvmStepper",
                         "Prediction-correction stepper conserving mass and energy")
      .def(py::init<Grid, ModelParams, ButcherTableau, SolverConfig>(), py::arg("grid"),
           py::arg("params"), py::arg("tableau"), py::arg("config"))
      .def_property_readonly("grid", &SvmStepper::grid)
      .def("step", &SvmStepper::step, py::arg("u"),
           "One step at the configured tau; returns (field, StepReport)")
      .def(
          "integrate",
          [](const SvmStepper& s, const ComplexField& u0, double t_end,
             const py::object& observer) {
            if (observer.is_none()) return s.integrate(u0, t_end);
            auto cb = observer.cast<std::function<void(long, double, const StepReport&,
                                                       const ComplexField&)>>();
            return s.integrate(u0, t_end, cb);
          },
          py::arg("u0"), py::arg("t_end"), py::arg("observer") = py::none(),
          "Repeated steps covering [0, t_end]; observer(step, t, report, state) runs "
          "after each step");

  py::class_<GaussonSpec>(m, "GaussonSpec",
                          "One packet b*exp(-(a/2)|x-c|^2 + i v.x)")
      .def(py::init([](double amplitude, double width, double cx, double cy, double vx,
                       double vy) {
             return GaussonSpec{amplitude, width, cx, cy, vx, vy};
           }),
           py::arg("amplitude") = 1.0, py::arg("width") = 1.0, py::arg("cx") = 0.0,
           py::arg("cy") = 0.0, py::arg("vx") = 0.0, py::arg("vy") = 0.0)
      .def_readwrite("amplitude", &GaussonSpec::amplitude)
      .def_readwrite("width", &GaussonSpec::width)
      .def_readwrite("cx", &GaussonSpec::cx)
      .def_readwrite("cy", &GaussonSpec::cy)
      .def_readwrite("vx", &GaussonSpec::vx)
      .def_readwrite("vy", &GaussonSpec::vy);

  py::enum_<StudyKind>(m, "StudyKind")
      .value("accuracy", StudyKind::accuracy)
      .value("interaction", StudyKind::interaction);

  py::class_<ExperimentPreset>(m, "ExperimentPreset")
      .def(py::init<>())
      .def_readwrite("name", &ExperimentPreset::name)
      .def_readwrite("kind", &ExperimentPreset::kind)
      .def_readwrite("dims", &ExperimentPreset::dims)
      .def_readwrite("x_lo", &ExperimentPreset::x_lo)
      .def_readwrite("x_hi", &ExperimentPreset::x_hi)
      .def_readwrite("nx", &ExperimentPreset::nx)
      .def_readwrite("y_lo", &ExperimentPreset::y_lo)
      .def_readwrite("y_hi", &ExperimentPreset::y_hi)
      .def_readwrite("ny", &ExperimentPreset::ny)
      .def_readwrite("params", &ExperimentPreset::params)
      .def_readwrite("data", &ExperimentPreset::data)
      .def_readwrite("sweeps", &ExperimentPreset::sweeps)
      .def_readwrite("t_end", &ExperimentPreset::t_end)
      .def_readwrite("taus", &ExperimentPreset::taus)
      .def_readwrite("tau_ref", &ExperimentPreset::tau_ref)
      .def_readwrite("tau", &ExperimentPreset::tau)
      .def_readwrite("snapshot_horizon", &ExperimentPreset::snapshot_horizon);

  m.def("study_names", &study_names, "Names of the catalogued studies");
  m.def("catalogued_preset", &catalogued_preset, py::arg("name"),
        py::arg("desk_scale") = false);
  m.def("make_grid", &make_grid, py::arg("preset"));
  m.def("initial_condition",
        [](const Grid& grid, const std::vector<GaussonSpec>& data) {
          return initial_condition(grid, data);
        },
        py::arg("grid"), py::arg("data"));
  m.def("initial_condition",
        py::overload_cast<const ExperimentPreset&>(&initial_condition), py::arg("preset"));

  py::class_<Peak>(m, "Peak")
      .def_readonly("position", &Peak::position)
      .def_readonly("height", &Peak::height);

  m.def("find_peaks_1d", &find_peaks_1d, py::arg("u"), py::arg("rel_threshold") = 0.25,
        "Connected |u| maxima above a relative threshold (periodic wrap merged)");

  py::class_<ConvergenceRow>(m, "ConvergenceRow")
      .def_readonly("tau", &ConvergenceRow::tau)
      .def_readonly("l2_error", &ConvergenceRow::l2_error)
      .def_readonly("order", &ConvergenceRow::order);

  py::class_<ResidualSeries>(m, "ResidualSeries")
      .def_readonly("times", &ResidualSeries::times)
      .def_readonly("e_mass", &ResidualSeries::e_mass)
      .def_readonly("e_energy", &ResidualSeries::e_energy);

  py::class_<StepRecord>(m, "StepRecord")
      .def_readonly("step", &StepRecord::step)
      .def_readonly("t", &StepRecord::t)
      .def_readonly("e_mass", &StepRecord::e_mass)
      .def_readonly("e_energy", &StepRecord::e_energy)
      .def_readonly("beta1", &StepRecord::beta1)
      .def_readonly("beta2", &StepRecord::beta2)
      .def_readonly("newton_iters", &StepRecord::newton_iters);

  py::class_<StudyOptions>(m, "StudyOptions")
      .def(py::init<>())
      .def_readwrite("desk_scale", &StudyOptions::desk_scale)
      .def_readwrite("tau", &StudyOptions::tau)
      .def_readwrite("t_end", &StudyOptions::t_end)
      .def_readwrite("nodes", &StudyOptions::nodes)
      .def_readwrite("sweeps", &StudyOptions::sweeps)
      .def_readwrite("snapshot_every", &StudyOptions::snapshot_every)
      .def_readwrite("snapshot_times", &StudyOptions::snapshot_times)
      .def_readwrite("threads", &StudyOptions::threads)
      .def_readwrite("out_dir", &StudyOptions::out_dir)
      .def_readwrite("progress", &StudyOptions::progress);

  py::class_<Artifact>(m, "Artifact")
      .def_readonly("name", &Artifact::name)
      .def_readonly("fnv1a", &Artifact::fnv1a);

  py::class_<StudyResult>(m, "StudyResult")
      .def_readonly("preset", &StudyResult::preset)
      .def_readonly("convergence", &StudyResult::convergence)
      .def_readonly("records", &StudyResult::records)
      .def_readonly("residuals", &StudyResult::residuals)
      .def_readonly("final_state", &StudyResult::final_state)
      .def_readonly("artifacts", &StudyResult::artifacts);

  m.def("run_study",
        py::overload_cast<const ExperimentPreset&, const StudyOptions&>(&run_study),
        py::arg("preset"), py::arg("options") = StudyOptions{});
  m.def("run_study",
        py::overload_cast<std::string_view, const StudyOptions&>(&run_study),
        py::arg("name"), py::arg("options") = StudyOptions{});

  // Snapshot I/O round-trips the exact on-disk artifact format.
  py::class_<SnapshotMeta>(m, "SnapshotMeta")
      .def(py::init<>())
      .def_readwrite("t", &SnapshotMeta::t)
      .def_readwrite("lam", &SnapshotMeta::lambda)
      .def_readwrite("epsilon", &SnapshotMeta::epsilon)
      .def_readwrite("tau", &SnapshotMeta::tau)
      .def_readwrite("sweeps", &SnapshotMeta::sweeps);

  py::class_<Snapshot>(m, "Snapshot")
      .def_readonly("field", &Snapshot::field)
      .def_readonly("meta", &Snapshot::meta);

  m.def("write_snapshot", &write_snapshot, py::arg("path"), py::arg("field"),
        py::arg("meta"));
  m.def("read_snapshot", &read_snapshot, py::arg("path"));

  m.attr("__version__") = "0.1.0";
}
