#include "rlogse/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <new>
#include <sstream>
#include <thread>

#include "rlogse/errors.hpp"

namespace rlogse {

namespace {

// FFTW's planner (and plan destruction) is not thread-safe; executions are.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// RAII wrapper over fftw_malloc so transform workspaces can be allocated per
// call (reentrancy) while keeping FFTW's alignment guarantees.
struct FftwBuffer {
  fftw_complex* p;
  explicit FftwBuffer(std::size_t n)
      : p(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (p == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(p); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Chunked deterministic parallel loop: f(begin, end) over disjoint ranges.
template <class F>
void parallel_ranges(std::size_t n, int threads, F f) {
  if (threads <= 1 || n < 4096) {
    f(std::size_t{0}, n);
    return;
  }
  const auto t = static_cast<std::size_t>(threads);
  std::vector<std::thread> pool;
  pool.reserve(t);
  const std::size_t chunk = (n + t - 1) / t;
  for (std::size_t b = 0; b < n; b += chunk) {
    const std::size_t e = std::min(n, b + chunk);
    pool.emplace_back([&f, b, e] { f(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

int signed_mode(int index, int n) {
  return index <= n / 2 ? index : index - n;
}

std::vector<Complex> derivative_symbols(int n, double mu, int order) {
  if (order < 1) throw ConfigError("derivative order must be >= 1");
  std::vector<Complex> sym(static_cast<std::size_t>(n));
  // i^order cycles with period 4
  static constexpr Complex cycle[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  const Complex iord = cycle[order % 4];
  for (int l = 0; l < n; ++l) {
    if (order % 2 == 1 && l == n / 2) {
      sym[l] = {0.0, 0.0};  // odd derivative of the Nyquist mode is dropped
      continue;
    }
    const double k = mu * signed_mode(l, n);
    sym[l] = iord * ipow(k, order);
  }
  return sym;
}

SpectralOperator::SpectralOperator(Grid grid) : grid_(std::move(grid)) {
  const std::size_t n = grid_.size();
  FftwBuffer in(n), out(n);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_2d(grid_.nx(), grid_.ny(), in.p, out.p, FFTW_FORWARD,
                            FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(grid_.nx(), grid_.ny(), in.p, out.p, FFTW_BACKWARD,
                            FFTW_ESTIMATE);
  }
  if (fwd_ == nullptr || bwd_ == nullptr) {
    throw Error("failed to create FFT plans");
  }

  sigma_.resize(n);
  for (int j = 0; j < grid_.nx(); ++j) {
    const double kx = grid_.mu_x() * signed_mode(j, grid_.nx());
    for (int k = 0; k < grid_.ny(); ++k) {
      const double ky = grid_.mu_y() * signed_mode(k, grid_.ny());
      sigma_[grid_.index(j, k)] = -(kx * kx + ky * ky);
    }
  }
}

SpectralOperator::~SpectralOperator() {
  if (fwd_ != nullptr || bwd_ != nullptr) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd_ != nullptr) fftw_destroy_plan(fwd_);
    if (bwd_ != nullptr) fftw_destroy_plan(bwd_);
  }
}

SpectralOperator::SpectralOperator(SpectralOperator&& other) noexcept
    : grid_(std::move(other.grid_)),
      fwd_(other.fwd_),
      bwd_(other.bwd_),
      sigma_(std::move(other.sigma_)) {
  other.fwd_ = nullptr;
  other.bwd_ = nullptr;
}

SpectralOperator& SpectralOperator::operator=(SpectralOperator&& other) noexcept {
  if (this != &other) {
    if (fwd_ != nullptr || bwd_ != nullptr) {
      std::lock_guard<std::mutex> lock(planner_mutex());
      if (fwd_ != nullptr) fftw_destroy_plan(fwd_);
      if (bwd_ != nullptr) fftw_destroy_plan(bwd_);
    }
    grid_ = std::move(other.grid_);
    fwd_ = other.fwd_;
    bwd_ = other.bwd_;
    sigma_ = std::move(other.sigma_);
    other.fwd_ = nullptr;
    other.bwd_ = nullptr;
  }
  return *this;
}

void SpectralOperator::forward(std::span<const Complex> in,
                               std::span<Complex> out) const {
  const std::size_t n = grid_.size();
  if (in.size() != n || out.size() != n) {
    throw DimensionError("forward transform: buffer size does not match grid");
  }
  FftwBuffer a(n), b(n);
  std::memcpy(static_cast<void*>(a.p), in.data(), n * sizeof(Complex));
  fftw_execute_dft(fwd_, a.p, b.p);
  std::memcpy(static_cast<void*>(out.data()), b.p, n * sizeof(Complex));
}

void SpectralOperator::inverse(std::span<const Complex> in,
                               std::span<Complex> out) const {
  const std::size_t n = grid_.size();
  if (in.size() != n || out.size() != n) {
    throw DimensionError("inverse transform: buffer size does not match grid");
  }
  FftwBuffer a(n), b(n);
  std::memcpy(static_cast<void*>(a.p), in.data(), n * sizeof(Complex));
  fftw_execute_dft(bwd_, a.p, b.p);
  const double scale = 1.0 / static_cast<double>(n);
  const auto* src = reinterpret_cast<const Complex*>(b.p);
  for (std::size_t i = 0; i < n; ++i) out[i] = scale * src[i];
}

std::vector<Complex> SpectralOperator::forward(const ComplexField& u) const {
  require_same_grid(u.grid(), grid_, "forward transform");
  std::vector<Complex> spec(grid_.size());
  forward(u.values(), spec);
  return spec;
}

ComplexField SpectralOperator::inverse_to_field(std::span<const Complex> spectrum) const {
  ComplexField out(grid_);
  inverse(spectrum, out.values());
  return out;
}

ComplexField SpectralOperator::laplacian(const ComplexField& u) const {
  require_same_grid(u.grid(), grid_, "laplacian");
  std::vector<Complex> spec = forward(u);
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= sigma_[m];
  return inverse_to_field(spec);
}

StageSolver::StageSolver(const SpectralOperator& op, const ButcherTableau& tableau,
                         double tau, int threads)
    : op_(&op), stages_(tableau.stages), tau_(tau), threads_(threads) {
  tableau.validate();
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw ConfigError("stage solver: tau must be finite and >= 0");
  }
  const std::size_t modes = op.grid().size();
  const auto s = static_cast<std::size_t>(stages_);
  lu_.resize(modes * s * s);
  piv_.resize(modes * s);
  const std::span<const double> sigma = op.laplacian_symbols();

  for (std::size_t m = 0; m < modes; ++m) {
    Complex* M = &lu_[m * s * s];
    std::uint8_t* pv = &piv_[m * s];
    const Complex z{0.0, tau * sigma[m]};  // i*tau*sigma_m
    double scale = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) {
        M[i * s + j] = (i == j ? Complex{1.0, 0.0} : Complex{0.0, 0.0}) -
                       z * tableau.a[i * s + j];
        scale = std::max(scale, std::abs(M[i * s + j]));
      }
    }
    // LU with partial pivoting; multipliers stored below the diagonal.
    for (std::size_t col = 0; col < s; ++col) {
      std::size_t pr = col;
      double best = std::abs(M[col * s + col]);
      for (std::size_t r = col + 1; r < s; ++r) {
        const double mag = std::abs(M[r * s + col]);
        if (mag > best) {
          best = mag;
          pr = r;
        }
      }
      if (!(best > 1e-14 * scale)) {
        std::ostringstream os;
        os << "stage system is numerically singular at mode " << m
           << " (tau=" << tau << ", sigma=" << sigma[m] << ")";
        throw SingularModeError(os.str(), static_cast<long>(m));
      }
      pv[col] = static_cast<std::uint8_t>(pr);
      if (pr != col) {
        for (std::size_t c = 0; c < s; ++c) std::swap(M[col * s + c], M[pr * s + c]);
      }
      for (std::size_t r = col + 1; r < s; ++r) {
        const Complex f = M[r * s + col] / M[col * s + col];
        M[r * s + col] = f;
        for (std::size_t c = col + 1; c < s; ++c) M[r * s + c] -= f * M[col * s + c];
      }
    }
  }
}

void StageSolver::substitute_mode(std::size_t m, Complex* x) const {
  const auto s = static_cast<std::size_t>(stages_);
  const Complex* M = &lu_[m * s * s];
  const std::uint8_t* pv = &piv_[m * s];
  for (std::size_t col = 0; col < s; ++col) {
    if (pv[col] != col) std::swap(x[col], x[pv[col]]);
  }
  for (std::size_t r = 1; r < s; ++r) {
    Complex acc = x[r];
    for (std::size_t c = 0; c < r; ++c) acc -= M[r * s + c] * x[c];
    x[r] = acc;
  }
  for (std::size_t r = s; r-- > 0;) {
    Complex acc = x[r];
    for (std::size_t c = r + 1; c < s; ++c) acc -= M[r * s + c] * x[c];
    x[r] = acc / M[r * s + r];
  }
}

namespace {

void check_stage_rhs(std::span<const ComplexField> rhs, std::size_t s,
                     const Grid& grid) {
  if (rhs.size() != s) {
    throw DimensionError("stage solver: wrong number of right-hand sides");
  }
  for (const ComplexField& f : rhs) {
    require_same_grid(f.grid(), grid, "stage solver");
  }
}

}  // namespace

std::vector<ComplexField> StageSolver::solve(std::span<const ComplexField> rhs) const {
  const auto s = static_cast<std::size_t>(stages_);
  check_stage_rhs(rhs, s, op_->grid());
  const std::size_t modes = op_->grid().size();

  std::vector<std::vector<Complex>> spec;
  spec.reserve(s);
  for (const ComplexField& f : rhs) spec.push_back(op_->forward(f));

  parallel_ranges(modes, threads_, [&](std::size_t mb, std::size_t me) {
    Complex x[4];
    for (std::size_t m = mb; m < me; ++m) {
      for (std::size_t i = 0; i < s; ++i) x[i] = spec[i][m];
      substitute_mode(m, x);
      for (std::size_t i = 0; i < s; ++i) spec[i][m] = x[i];
    }
  });

  std::vector<ComplexField> out;
  out.reserve(s);
  for (std::size_t i = 0; i < s; ++i) out.push_back(op_->inverse_to_field(spec[i]));
  return out;
}

StageSolver::Combined StageSolver::solve_weighted(
    std::span<const ComplexField> rhs, std::span<const double> weights) const {
  const auto s = static_cast<std::size_t>(stages_);
  check_stage_rhs(rhs, s, op_->grid());
  if (weights.size() != s) {
    throw DimensionError("stage solver: wrong number of combination weights");
  }
  const std::size_t modes = op_->grid().size();

  std::vector<std::vector<Complex>> spec;
  spec.reserve(s);
  for (const ComplexField& f : rhs) spec.push_back(op_->forward(f));

  std::vector<Complex> combined(modes);
  parallel_ranges(modes, threads_, [&](std::size_t mb, std::size_t me) {
    Complex x[4];
    for (std::size_t m = mb; m < me; ++m) {
      for (std::size_t i = 0; i < s; ++i) x[i] = spec[i][m];
      substitute_mode(m, x);
      Complex acc{0.0, 0.0};
      for (std::size_t i = 0; i < s; ++i) acc += weights[i] * x[i];
      combined[m] = acc;
    }
  });

  Combined result{op_->inverse_to_field(combined), std::move(combined)};
  return result;
}

}  // namespace rlogse
