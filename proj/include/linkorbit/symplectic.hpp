#pragma once

// Symplectic linear algebra, matrix paths, fundamental solutions of linear
// periodic Hamiltonian systems -J z' = B(t) z and their iteration.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "linkorbit/errors.hpp"

namespace linkorbit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultTolSp = 1e-8;
inline constexpr double kDefaultTolSym = 1e-10;

/// J = [[0, -I_n], [I_n, 0]].
inline Matrix standard_J(int n) {
  if (n < 1) throw InputError("standard_J: half-dimension must be >= 1");
  Matrix J = Matrix::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = -Matrix::Identity(n, n);
  J.bottomLeftCorner(n, n) = Matrix::Identity(n, n);
  return J;
}

inline int half_dimension(const Matrix& M, const char* who) {
  if (M.rows() != M.cols() || M.rows() % 2 != 0 || M.rows() == 0)
    throw DimensionError(std::string(who) + ": expected a square matrix of even dimension, got " +
                         std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
  return static_cast<int>(M.rows() / 2);
}

/// Frobenius norm of M^T J M - J.
inline double symplectic_residual(const Matrix& M) {
  const Matrix J = standard_J(half_dimension(M, "symplectic_residual"));
  return (M.transpose() * J * M - J).norm();
}

inline bool is_symplectic(const Matrix& M, double tol) {
  return symplectic_residual(M) <= tol;
}

/// Nearest-in-the-symplectic-polar-sense element of Sp(2n): M (M^+ M)^{-1/2}
/// with M^+ = -J M^T J. Valid for M close to Sp(2n).
inline Matrix project_to_symplectic(const Matrix& M) {
  const Matrix J = standard_J(half_dimension(M, "project_to_symplectic"));
  const Matrix N = -J * M.transpose() * J * M;
  // Denman-Beavers: Y -> N^{1/2}, Z -> N^{-1/2}.
  Matrix Y = N;
  Matrix Z = Matrix::Identity(N.rows(), N.cols());
  for (int it = 0; it < 8; ++it) {
    Matrix Yn = 0.5 * (Y + Z.inverse());
    Matrix Zn = 0.5 * (Z + Y.inverse());
    const double change = (Zn - Z).norm();
    Y = std::move(Yn);
    Z = std::move(Zn);
    if (change < 1e-15 * std::max(1.0, Z.norm())) break;
  }
  return M * Z;
}

/// Anything that evaluates a symmetric 2n x 2n matrix at time t and knows its
/// period and half-dimension.
template <class F>
concept PeriodicMatrixFunction = requires(const F& f, double t) {
  { f(t) } -> std::convertible_to<Matrix>;
  { f.period() } -> std::convertible_to<double>;
  { f.n() } -> std::convertible_to<int>;
};

/// A smooth matrix function given by a callable; used for linearisations
/// along loops and for property tests.
class SmoothMatrixFunction {
 public:
  SmoothMatrixFunction(int n, double period, std::function<Matrix(double)> fn)
      : n_(n), period_(period), fn_(std::move(fn)) {
    if (n < 1) throw InputError("SmoothMatrixFunction: n must be >= 1");
    if (!(period > 0.0)) throw InputError("SmoothMatrixFunction: period must be positive");
  }

  Matrix operator()(double t) const { return fn_(t); }
  int n() const { return n_; }
  double period() const { return period_; }

  /// The same function regarded as (k * period)-periodic.
  SmoothMatrixFunction repeated(int k) const { return {n_, k * period_, fn_}; }

  /// t -> B(t + s).
  SmoothMatrixFunction shifted(double s) const {
    auto fn = fn_;
    return {n_, period_, [fn, s](double t) { return fn(t + s); }};
  }

 private:
  int n_;
  double period_;
  std::function<Matrix(double)> fn_;
};

/// Sampled tau-periodic symmetric matrix path, linearly interpolated
/// between samples.
class MatrixPath {
 public:
  MatrixPath(std::vector<double> times, std::vector<Matrix> values, double tol_sym = kDefaultTolSym)
      : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size())
      throw InputError("MatrixPath: number of times and matrices differ");
    if (times_.size() < 2) throw InputError("MatrixPath: at least two samples are required");
    if (times_.front() != 0.0) throw InputError("MatrixPath: first sample must be at t = 0");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (!(times_[i] > times_[i - 1])) throw InputError("MatrixPath: sample times must increase strictly");
    n_ = half_dimension(values_.front(), "MatrixPath");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const Matrix& B = values_[i];
      if (B.rows() != 2 * n_ || B.cols() != 2 * n_)
        throw DimensionError("MatrixPath: sample " + std::to_string(i) + " has the wrong shape");
      if (!B.allFinite()) throw InputError("MatrixPath: sample " + std::to_string(i) + " is not finite");
      if ((B - B.transpose()).norm() > tol_sym)
        throw InputError("MatrixPath: sample " + std::to_string(i) + " is not symmetric");
    }
    if ((values_.front() - values_.back()).norm() > tol_sym)
      throw InputError("MatrixPath: B(0) != B(tau); the stored path is not periodic");
  }

  /// B(t) == B on [0, period].
  static MatrixPath constant(const Matrix& B, double period) {
    if (!(period > 0.0)) throw InputError("MatrixPath: period must be positive");
    return MatrixPath({0.0, period}, {B, B});
  }

  /// Uniform sampling of a callable with `intervals` subintervals. The last
  /// sample repeats the first so periodicity holds exactly.
  template <class F>
  static MatrixPath sample(F&& fn, double period, int intervals) {
    if (intervals < 1) throw InputError("MatrixPath::sample: need at least one interval");
    std::vector<double> times;
    std::vector<Matrix> values;
    for (int i = 0; i <= intervals; ++i) {
      times.push_back(period * i / intervals);
      Matrix B = i == intervals ? values.front() : Matrix(fn(times.back()));
      values.push_back(0.5 * (B + B.transpose()));
    }
    times.back() = period;
    return MatrixPath(std::move(times), std::move(values));
  }

  int n() const { return n_; }
  double period() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Matrix>& values() const { return values_; }

  /// Piecewise-linear interpolation, t taken modulo the period.
  Matrix operator()(double t) const {
    const double tau = period();
    double s = std::fmod(t, tau);
    if (s < 0) s += tau;
    auto it = std::upper_bound(times_.begin(), times_.end(), s);
    if (it == times_.end()) return values_.back();
    const auto hi = static_cast<std::size_t>(it - times_.begin());
    const std::size_t lo = hi - 1;
    const double w = (s - times_[lo]) / (times_[hi] - times_[lo]);
    return (1.0 - w) * values_[lo] + w * values_[hi];
  }

 private:
  std::vector<double> times_;
  std::vector<Matrix> values_;
  int n_ = 0;
};

static_assert(PeriodicMatrixFunction<MatrixPath>);
static_assert(PeriodicMatrixFunction<SmoothMatrixFunction>);

/// Reads the plain-text matrix-series format: a header line `n tau samples`
/// followed by one row per sample holding the time and the (2n)^2 entries
/// in row-major order.
inline MatrixPath read_matrix_path(std::istream& in) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line()) throw InputError("matrix series: missing header line `n tau samples`");
  int n = 0;
  double tau = 0.0;
  long samples = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> n >> tau >> samples)) throw InputError("matrix series: malformed header line: " + line);
  }
  if (n < 1 || !(tau > 0.0) || samples < 2) throw InputError("matrix series: header values out of range");
  const int dim = 2 * n;
  std::vector<double> times;
  std::vector<Matrix> values;
  for (long s = 0; s < samples; ++s) {
    if (!next_line()) throw InputError("matrix series: expected " + std::to_string(samples) + " rows, got " + std::to_string(s));
    std::istringstream rs(line);
    double t = 0.0;
    if (!(rs >> t)) throw InputError("matrix series: row " + std::to_string(s + 1) + " has no time value");
    Matrix B(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c)
        if (!(rs >> B(r, c)))
          throw InputError("matrix series: row " + std::to_string(s + 1) + " has fewer than " +
                           std::to_string(dim * dim) + " entries");
    times.push_back(t);
    values.push_back(std::move(B));
  }
  if (std::abs(times.back() - tau) > 1e-12 * std::max(1.0, tau))
    throw InputError("matrix series: last sample time differs from the header period");
  times.back() = tau;
  return MatrixPath(std::move(times), std::move(values));
}

inline void write_matrix_path(std::ostream& out, const MatrixPath& path) {
  out.precision(17);
  out << path.n() << ' ' << path.period() << ' ' << path.times().size() << '\n';
  for (std::size_t s = 0; s < path.times().size(); ++s) {
    out << path.times()[s];
    const Matrix& B = path.values()[s];
    for (Eigen::Index r = 0; r < B.rows(); ++r)
      for (Eigen::Index c = 0; c < B.cols(); ++c) out << ' ' << B(r, c);
    out << '\n';
  }
}

/// Time-discretised path gamma: [0, tau] -> Sp(2n) with gamma(0) = I.
class SymplecticPath {
 public:
  SymplecticPath(std::vector<double> times, std::vector<Matrix> values, double tol_sp = kDefaultTolSp)
      : times_(std::move(times)), values_(std::move(values)) {
    if (times_.empty() || times_.size() != values_.size())
      throw InputError("SymplecticPath: need matching, non-empty time and matrix lists");
    if (times_.front() != 0.0) throw InputError("SymplecticPath: path must start at t = 0");
    n_ = half_dimension(values_.front(), "SymplecticPath");
    if (values_.front() != Matrix::Identity(2 * n_, 2 * n_))
      throw InputError("SymplecticPath: gamma(0) must be the identity");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double r = symplectic_residual(values_[i]);
      max_residual_ = std::max(max_residual_, r);
      // M^T J M carries round-off of order eps |M|^2; scale the bound accordingly
      const double scale = std::max(1.0, values_[i].squaredNorm());
      if (r > tol_sp * scale) {
        std::ostringstream os;
        os << "SymplecticPath: sample " << i << " has symplectic residual " << std::scientific << r << " above tolerance "
           << tol_sp * scale;
        throw IntegrationError(os.str());
      }
    }
  }

  int n() const { return n_; }
  double period() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Matrix>& values() const { return values_; }
  const Matrix& end() const { return values_.back(); }
  double max_residual() const { return max_residual_; }
  double end_residual() const { return symplectic_residual(values_.back()); }

 private:
  std::vector<double> times_;
  std::vector<Matrix> values_;
  int n_ = 0;
  double max_residual_ = 0.0;
};

struct FundamentalSolutionOptions {
  int steps = 4096;
  bool reproject = false;  ///< polar projection onto Sp(2n) after every step
  double tol_sp = kDefaultTolSp;
};

namespace detail {

inline void rk4_step(const Matrix& J, const Matrix& B0, const Matrix& Bh, const Matrix& B1, double h, Matrix& G) {
  const Matrix A0 = J * B0;
  const Matrix Ah = J * Bh;
  const Matrix A1 = J * B1;
  const Matrix k1 = A0 * G;
  const Matrix k2 = Ah * (G + 0.5 * h * k1);
  const Matrix k3 = Ah * (G + 0.5 * h * k2);
  const Matrix k4 = A1 * (G + h * k3);
  G += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <class F>
SymplecticPath integrate_on_grid(const F& B, int n, const std::vector<double>& grid,
                                 const FundamentalSolutionOptions& opts) {
  const Matrix J = standard_J(n);
  Matrix G = Matrix::Identity(2 * n, 2 * n);
  std::vector<Matrix> values{G};
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double t0 = grid[i - 1];
    const double h = grid[i] - t0;
    rk4_step(J, B(t0), B(t0 + 0.5 * h), B(grid[i]), h, G);
    if (!G.allFinite())
      throw IntegrationError("fundamental_solution: non-finite entries at t = " + std::to_string(grid[i]));
    if (opts.reproject) G = project_to_symplectic(G);
    values.push_back(G);
  }
  return SymplecticPath(grid, std::move(values), opts.tol_sp);
}

}  // namespace detail

/// Fundamental solution of gamma' = J B(t) gamma, gamma(0) = I, on [0, period]
/// by the classical fourth-order Runge-Kutta method on a uniform grid.
template <PeriodicMatrixFunction F>
SymplecticPath fundamental_solution(const F& B, const FundamentalSolutionOptions& opts = {}) {
  if (opts.steps < 2) throw InputError("fundamental_solution: steps must be >= 2");
  const double tau = B.period();
  std::vector<double> grid(static_cast<std::size_t>(opts.steps) + 1);
  for (int i = 0; i <= opts.steps; ++i) grid[static_cast<std::size_t>(i)] = tau * i / opts.steps;
  grid.back() = tau;
  return detail::integrate_on_grid(B, B.n(), grid, opts);
}

/// MatrixPath specialisation: the step grid refines every sample interval so
/// that B is linear on each step and the scheme keeps its order.
inline SymplecticPath fundamental_solution(const MatrixPath& B, const FundamentalSolutionOptions& opts = {}) {
  if (opts.steps < 2) throw InputError("fundamental_solution: steps must be >= 2");
  const auto& ts = B.times();
  const double tau = B.period();
  std::vector<double> grid{0.0};
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double dt = ts[i] - ts[i - 1];
    const int sub = std::max(1, static_cast<int>(std::ceil(opts.steps * dt / tau - 1e-9)));
    for (int s = 1; s <= sub; ++s) grid.push_back(s == sub ? ts[i] : ts[i - 1] + dt * s / sub);
  }
  // Evaluate inside the interval to avoid the wrap of the periodic lookup at t = tau.
  auto eval = [&B, tau](double t) { return t >= tau ? B.values().back() : B(t); };
  return detail::integrate_on_grid(eval, B.n(), grid, opts);
}

/// gamma^k on [0, k tau]: gamma^k(t) = gamma(t - j tau) gamma(tau)^j.
inline SymplecticPath iterate_path(const SymplecticPath& gamma, int k, double tol_sp = kDefaultTolSp) {
  if (k < 1) throw InputError("iterate_path: k must be >= 1");
  if (k == 1) return gamma;
  const double tau = gamma.period();
  std::vector<double> times;
  std::vector<Matrix> values;
  Matrix power = Matrix::Identity(2 * gamma.n(), 2 * gamma.n());
  for (int j = 0; j < k; ++j) {
    for (std::size_t s = (j == 0 ? 0 : 1); s < gamma.times().size(); ++s) {
      times.push_back(gamma.times()[s] + j * tau);
      values.push_back(gamma.values()[s] * power);
    }
    power = gamma.end() * power;
  }
  times.back() = k * tau;
  // Residuals grow with the powers; the iterated path inherits the caller's tolerance scaled by k.
  return SymplecticPath(std::move(times), std::move(values), tol_sp * k * std::max(1.0, power.norm()));
}

/// V(a, b) = diag(a_1..a_n, b_1..b_n) acting on z = (p, q).
struct DiagonalScaling {
  Vector a;
  Vector b;

  DiagonalScaling(Vector a_, Vector b_) : a(std::move(a_)), b(std::move(b_)) {
    if (a.size() != b.size() || a.size() == 0) throw DimensionError("DiagonalScaling: a and b must have equal, positive length");
    if ((a.array() <= 0.0).any() || (b.array() <= 0.0).any())
      throw InputError("DiagonalScaling: all entries must be strictly positive");
  }

  /// V(alpha, beta) with alpha_i + beta_i = 1, as required of V_1, V_2.
  static DiagonalScaling convex(const Vector& alpha, const Vector& beta) {
    DiagonalScaling V(alpha, beta);
    if (((alpha + beta).array() - 1.0).abs().maxCoeff() > 1e-12)
      throw InputError("DiagonalScaling::convex: alpha_i + beta_i must equal 1");
    return V;
  }

  int n() const { return static_cast<int>(a.size()); }

  Matrix matrix() const {
    Vector d(2 * a.size());
    d << a, b;
    return d.asDiagonal();
  }
};

inline Vector apply_diagonal_scaling(const DiagonalScaling& V, const Vector& z) {
  if (z.size() != 2 * V.a.size()) throw DimensionError("apply_diagonal_scaling: dimension mismatch");
  const Eigen::Index n = V.a.size();
  Vector out(z.size());
  out.head(n) = V.a.cwiseProduct(z.head(n));
  out.tail(n) = V.b.cwiseProduct(z.tail(n));
  return out;
}

}  // namespace linkorbit
