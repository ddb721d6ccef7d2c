#pragma once

// Truncated loop space E_m: loops z(t) = sum_{|k|<=m} exp((2 k pi t / T) J) a_k
// with the fractional Sobolev inner product
//   <z, w> = T (a_0, b_0) + T sum_k |k| a_k . b_k
// and the bilinear form of A, <Az, w> = 2 pi sum_k k a_k . b_k.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "linkorbit/errors.hpp"
#include "linkorbit/symplectic.hpp"

namespace linkorbit {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

class FourierLoop {
 public:
  FourierLoop(int n, int m, double period) : FourierLoop(n, m, period, Matrix::Zero(2 * n, 2 * m + 1)) {}

  /// coeffs is 2n x (2m+1); column j holds a_k for k = j - m.
  FourierLoop(int n, int m, double period, Matrix coeffs) : n_(n), m_(m), period_(period), coeffs_(std::move(coeffs)) {
    if (n < 1 || m < 0) throw InputError("FourierLoop: need n >= 1 and m >= 0");
    if (!(period > 0.0)) throw InputError("FourierLoop: period must be positive");
    if (coeffs_.rows() != 2 * n || coeffs_.cols() != 2 * m + 1)
      throw DimensionError("FourierLoop: coefficient matrix must be 2n x (2m+1)");
  }

  int n() const { return n_; }
  int m() const { return m_; }
  double period() const { return period_; }
  const Matrix& coeffs() const { return coeffs_; }
  int dimension() const { return 2 * n_ * (2 * m_ + 1); }

  Vector mode(int k) const {
    if (std::abs(k) > m_) return Vector::Zero(2 * n_);
    return coeffs_.col(k + m_);
  }

  FourierLoop with_mode(int k, const Vector& a) const {
    if (std::abs(k) > m_) throw InputError("FourierLoop::with_mode: |k| exceeds the truncation order");
    if (a.size() != 2 * n_) throw DimensionError("FourierLoop::with_mode: coefficient has the wrong length");
    FourierLoop out = *this;
    out.coeffs_.col(k + m_) = a;
    return out;
  }

  /// Gram weight of mode k in the E inner product.
  double weight(int k) const { return k == 0 ? period_ : period_ * std::abs(k); }

  /// Coordinates in the orthonormal frame exp(theta_k J) e_c / sqrt(weight(k)).
  Vector to_orthonormal() const {
    Vector x(dimension());
    const int d = 2 * n_;
    for (int k = -m_; k <= m_; ++k) x.segment(static_cast<Eigen::Index>(k + m_) * d, d) = std::sqrt(weight(k)) * mode(k);
    return x;
  }

  static FourierLoop from_orthonormal(int n, int m, double period, const Vector& x) {
    FourierLoop z(n, m, period);
    if (x.size() != z.dimension()) throw DimensionError("FourierLoop::from_orthonormal: wrong vector length");
    const int d = 2 * n;
    for (int k = -m; k <= m; ++k) z.coeffs_.col(k + m) = x.segment(static_cast<Eigen::Index>(k + m) * d, d) / std::sqrt(z.weight(k));
    return z;
  }

  /// Zero-padded or truncated copy with order m2.
  FourierLoop resized(int m2) const {
    FourierLoop out(n_, m2, period_);
    const int keep = std::min(m_, m2);
    for (int k = -keep; k <= keep; ++k) out.coeffs_.col(k + m2) = coeffs_.col(k + m_);
    return out;
  }

  /// The same function regarded as (p T)-periodic: mode k becomes mode p k.
  FourierLoop repeated(int p) const {
    if (p < 1) throw InputError("FourierLoop::repeated: p must be >= 1");
    FourierLoop out(n_, p * m_, p * period_);
    for (int k = -m_; k <= m_; ++k) out.coeffs_.col(p * k + p * m_) = coeffs_.col(k + m_);
    return out;
  }

  /// t -> z(t + s).
  FourierLoop shifted(double s) const {
    FourierLoop out = *this;
    for (int k = -m_; k <= m_; ++k) {
      const double th = kTwoPi * k * s / period_;
      out.coeffs_.col(k + m_) = rotate(th, coeffs_.col(k + m_));
    }
    return out;
  }

  /// exp(theta J) v computed blockwise: (cos p - sin q, sin p + cos q).
  static Vector rotate(double theta, const Vector& v) {
    const Eigen::Index n = v.size() / 2;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Vector out(v.size());
    out.head(n) = c * v.head(n) - s * v.tail(n);
    out.tail(n) = s * v.head(n) + c * v.tail(n);
    return out;
  }

  FourierLoop& operator+=(const FourierLoop& o) {
    check_same(o, "operator+=");
    coeffs_ += o.coeffs_;
    return *this;
  }
  FourierLoop& operator-=(const FourierLoop& o) {
    check_same(o, "operator-=");
    coeffs_ -= o.coeffs_;
    return *this;
  }
  FourierLoop& operator*=(double s) {
    coeffs_ *= s;
    return *this;
  }
  friend FourierLoop operator+(FourierLoop a, const FourierLoop& b) { return a += b; }
  friend FourierLoop operator-(FourierLoop a, const FourierLoop& b) { return a -= b; }
  friend FourierLoop operator*(double s, FourierLoop a) { return a *= s; }
  friend FourierLoop operator-(FourierLoop a) { return a *= -1.0; }

  bool same_space(const FourierLoop& o) const {
    return n_ == o.n_ && m_ == o.m_ && std::abs(period_ - o.period_) <= 1e-12 * period_;
  }

  void check_same(const FourierLoop& o, const char* who) const {
    if (!same_space(o)) throw DimensionError(std::string("FourierLoop::") + who + ": loops live in different spaces");
  }

 private:
  int n_;
  int m_;
  double period_;
  Matrix coeffs_;
};

/// <z, w> in E.
inline double inner(const FourierLoop& z, const FourierLoop& w) {
  z.check_same(w, "inner");
  double s = 0.0;
  for (int k = -z.m(); k <= z.m(); ++k) s += z.weight(k) * z.coeffs().col(k + z.m()).dot(w.coeffs().col(k + z.m()));
  return s;
}

inline double norm(const FourierLoop& z) { return std::sqrt(inner(z, z)); }

/// <Az, w> = 2 pi sum_k k a_k . b_k.
inline double a_form(const FourierLoop& z, const FourierLoop& w) {
  z.check_same(w, "a_form");
  double s = 0.0;
  for (int k = -z.m(); k <= z.m(); ++k) s += k * z.coeffs().col(k + z.m()).dot(w.coeffs().col(k + z.m()));
  return kTwoPi * s;
}

enum class Part { plus, minus, zero };

/// Orthogonal projection onto E^+ (k > 0), E^- (k < 0) or E^0 = R^{2n}.
inline FourierLoop project(const FourierLoop& z, Part part) {
  Matrix c = Matrix::Zero(z.coeffs().rows(), z.coeffs().cols());
  for (int k = -z.m(); k <= z.m(); ++k) {
    const bool keep = (part == Part::plus && k > 0) || (part == Part::minus && k < 0) || (part == Part::zero && k == 0);
    if (keep) c.col(k + z.m()) = z.coeffs().col(k + z.m());
  }
  return {z.n(), z.m(), z.period(), std::move(c)};
}

/// Pointwise evaluation at arbitrary times.
inline std::vector<Vector> evaluate(const FourierLoop& z, const std::vector<double>& times) {
  std::vector<Vector> out;
  out.reserve(times.size());
  for (double t : times) {
    Vector v = Vector::Zero(2 * z.n());
    for (int k = -z.m(); k <= z.m(); ++k) v += FourierLoop::rotate(kTwoPi * k * t / z.period(), z.coeffs().col(k + z.m()));
    out.push_back(std::move(v));
  }
  return out;
}

/// Uniform periodic grid t_j = j T / N with cosine/sine tables for the modes
/// 0..m; trapezoidal quadrature on it is exact for trigonometric polynomials
/// of degree < N.
class Quadrature {
 public:
  Quadrature(double period, int m, int points) : period_(period), m_(m), points_(points) {
    if (!(period > 0.0) || m < 0 || points < 2 * m + 1)
      throw InputError("Quadrature: need period > 0 and at least 2m+1 points");
    times_.resize(static_cast<std::size_t>(points));
    cos_.resize(m + 1, points);
    sin_.resize(m + 1, points);
    for (int j = 0; j < points; ++j) {
      const double t = period * j / points;
      times_[static_cast<std::size_t>(j)] = t;
      for (int k = 0; k <= m; ++k) {
        const double th = kTwoPi * static_cast<double>(k) * j / points;
        cos_(k, j) = std::cos(th);
        sin_(k, j) = std::sin(th);
      }
    }
  }

  /// Grid size max(8m, 256).
  static int default_points(int m) { return std::max(8 * m, 256); }

  double period() const { return period_; }
  int m() const { return m_; }
  int points() const { return points_; }
  double step() const { return period_ / points_; }
  const std::vector<double>& times() const { return times_; }
  const Matrix& cos_table() const { return cos_; }
  const Matrix& sin_table() const { return sin_; }

 private:
  double period_;
  int m_;
  int points_;
  std::vector<double> times_;
  Matrix cos_;
  Matrix sin_;
};

/// z on the quadrature grid as a 2n x N matrix.
inline Matrix evaluate_on_grid(const FourierLoop& z, const Quadrature& q) {
  if (z.m() > q.m() || std::abs(z.period() - q.period()) > 1e-12 * q.period())
    throw DimensionError("evaluate_on_grid: quadrature does not match the loop");
  const int n = z.n();
  const int m = z.m();
  const Matrix J = standard_J(n);
  Matrix values = z.mode(0).replicate(1, q.points());
  if (m == 0) return values;
  Matrix P(2 * n, m);
  Matrix Q(2 * n, m);
  for (int k = 1; k <= m; ++k) {
    P.col(k - 1) = z.mode(k) + z.mode(-k);
    Q.col(k - 1) = J * (z.mode(k) - z.mode(-k));
  }
  values.noalias() += P * q.cos_table().middleRows(1, m);
  values.noalias() += Q * q.sin_table().middleRows(1, m);
  return values;
}

/// Dual moments h_k = int_0^T exp(-theta_k J) h(t) dt of a grid function
/// (2n x N), returned as a loop-shaped coefficient array of order m.
inline FourierLoop grid_moments(const Matrix& h, const Quadrature& q, int m) {
  if (m > q.m()) throw DimensionError("grid_moments: order exceeds the quadrature tables");
  const int n = static_cast<int>(h.rows() / 2);
  const Matrix J = standard_J(n);
  const double dt = q.step();
  const Matrix C = h * q.cos_table().topRows(m + 1).transpose();
  const Matrix S = J * (h * q.sin_table().topRows(m + 1).transpose());
  Matrix out(2 * n, 2 * m + 1);
  for (int k = 0; k <= m; ++k) {
    out.col(m + k) = dt * (C.col(k) - S.col(k));
    out.col(m - k) = dt * (C.col(k) + S.col(k));
  }
  return {n, m, q.period(), std::move(out)};
}

/// Discrete Fourier analysis: the loop of order m interpolating a grid function.
inline FourierLoop analyze(const Matrix& h, const Quadrature& q, int m) {
  FourierLoop mom = grid_moments(h, q, m);
  return (1.0 / q.period()) * mom;
}

/// (int_0^T |z(t)|^s dt)^(1/s) by trapezoidal quadrature.
inline double lebesgue_norm(const FourierLoop& z, double s, const Quadrature& q) {
  const Matrix v = evaluate_on_grid(z, q);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) acc += std::pow(v.col(j).norm(), s);
  return std::pow(acc * q.step(), 1.0 / s);
}

/// Anisotropic exponent data: sigma_i, tau_i, eta and the derived
/// tilde_sigma_i = eta sigma_i / (sigma_i + tau_i), tilde_tau_i = eta tau_i / (sigma_i + tau_i).
class ScalingProfile {
 public:
  ScalingProfile(Vector sigma, Vector tau_exp, std::optional<double> eta = std::nullopt)
      : sigma_(std::move(sigma)), tau_(std::move(tau_exp)) {
    if (sigma_.size() == 0 || sigma_.size() != tau_.size())
      throw DimensionError("ScalingProfile: sigma and tau must have equal, positive length");
    if ((sigma_.array() <= 0.0).any() || (tau_.array() <= 0.0).any())
      throw InputError("ScalingProfile: exponents must be positive");
    eta_ = eta ? *eta : minimal_eta(sigma_, tau_);
    tilde_sigma_ = eta_ * sigma_.cwiseQuotient(sigma_ + tau_);
    tilde_tau_ = eta_ * tau_.cwiseQuotient(sigma_ + tau_);
    if ((tilde_sigma_.array() < 1.0 - 1e-12).any() || (tilde_tau_.array() < 1.0 - 1e-12).any())
      throw InputError("ScalingProfile: eta too small, tilde exponents must be >= 1");
  }

  /// Smallest eta with both tilde exponents >= 1.
  static double minimal_eta(const Vector& sigma, const Vector& tau) {
    double eta = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
      eta = std::max({eta, 1.0 + sigma[i] / tau[i], 1.0 + tau[i] / sigma[i]});
    return eta;
  }

  int n() const { return static_cast<int>(sigma_.size()); }
  double eta() const { return eta_; }
  const Vector& sigma() const { return sigma_; }
  const Vector& tau_exp() const { return tau_; }
  const Vector& tilde_sigma() const { return tilde_sigma_; }
  const Vector& tilde_tau() const { return tilde_tau_; }

  /// Diagonal of B_rho: rho^(tilde_tau_i - 1) on p_i, rho^(tilde_sigma_i - 1) on q_i.
  Vector diagonal(double rho) const {
    if (!(rho > 0.0)) throw InputError("ScalingProfile: rho must be positive");
    Vector d(2 * sigma_.size());
    for (Eigen::Index i = 0; i < sigma_.size(); ++i) {
      d[i] = std::pow(rho, tilde_tau_[i] - 1.0);
      d[i + sigma_.size()] = std::pow(rho, tilde_sigma_[i] - 1.0);
    }
    return d;
  }

 private:
  Vector sigma_;
  Vector tau_;
  double eta_ = 0.0;
  Vector tilde_sigma_;
  Vector tilde_tau_;
};

/// B_rho applied to a point of R^{2n}.
inline Vector scaling_operator(const Vector& z, double rho, const ScalingProfile& profile) {
  if (z.size() != 2 * profile.n()) throw DimensionError("scaling_operator: dimension mismatch");
  return profile.diagonal(rho).cwiseProduct(z);
}

/// B_rho applied pointwise in time to a loop. With D = diag(B_rho) and D' the
/// diagonal with its p and q halves swapped, D exp(tJ) = exp(tJ) (D+D')/2 +
/// exp(-tJ) (D-D')/2, so the image stays in E_m and mixes only k and -k.
inline FourierLoop scaling_operator(const FourierLoop& z, double rho, const ScalingProfile& profile) {
  if (z.n() != profile.n()) throw DimensionError("scaling_operator: dimension mismatch");
  const Eigen::Index n = z.n();
  const Vector d = profile.diagonal(rho);
  Vector ds(d.size());
  ds.head(n) = d.tail(n);
  ds.tail(n) = d.head(n);
  const Vector plus = 0.5 * (d + ds);
  const Vector minus = 0.5 * (d - ds);
  Matrix c(z.coeffs().rows(), z.coeffs().cols());
  const int m = z.m();
  c.col(m) = d.cwiseProduct(z.mode(0));
  for (int k = 1; k <= m; ++k) {
    c.col(m + k) = plus.cwiseProduct(z.mode(k)) + minus.cwiseProduct(z.mode(-k));
    c.col(m - k) = minus.cwiseProduct(z.mode(k)) + plus.cwiseProduct(z.mode(-k));
  }
  return {z.n(), z.m(), z.period(), std::move(c)};
}

/// Reference route for B_rho: scale samples on the grid, then analyse.
inline FourierLoop scaling_operator_on_grid(const FourierLoop& z, double rho, const ScalingProfile& profile,
                                            const Quadrature& q) {
  const Matrix v = profile.diagonal(rho).asDiagonal() * evaluate_on_grid(z, q);
  return analyze(v, q, z.m());
}

/// Loop CSV: a comment header `# n=<n> m=<m> period=<T>`, a column header,
/// then one row `k,a_k[1],...,a_k[2n]` per mode.
inline void write_loop_csv(std::ostream& out, const FourierLoop& z) {
  out.precision(17);
  out << "# n=" << z.n() << " m=" << z.m() << " period=" << z.period() << '\n';
  out << 'k';
  for (int c = 1; c <= 2 * z.n(); ++c) out << ",a" << c;
  out << '\n';
  for (int k = -z.m(); k <= z.m(); ++k) {
    out << k;
    const Vector a = z.mode(k);
    for (Eigen::Index c = 0; c < a.size(); ++c) out << ',' << a[c];
    out << '\n';
  }
}

inline FourierLoop read_loop_csv(std::istream& in) {
  std::string line;
  int n = 0;
  int m = -1;
  double period = 0.0;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw InputError("loop csv: missing `# n= m= period=` header");
  {
    std::istringstream hs(line.substr(2));
    std::string tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (key == "n") n = std::stoi(val);
      else if (key == "m") m = std::stoi(val);
      else if (key == "period") period = std::stod(val);
    }
  }
  FourierLoop z(n, m, period);
  Matrix c = Matrix::Zero(2 * n, 2 * m + 1);
  std::getline(in, line);  // column header
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream rs(line);
    std::string cell;
    std::getline(rs, cell, ',');
    const int k = std::stoi(cell);
    if (std::abs(k) > m) throw InputError("loop csv: mode index out of range");
    for (int r = 0; r < 2 * n; ++r) {
      if (!std::getline(rs, cell, ',')) throw InputError("loop csv: short row for k = " + std::to_string(k));
      c(r, k + m) = std::stod(cell);
    }
    ++rows;
  }
  if (rows != 2 * m + 1) throw InputError("loop csv: expected " + std::to_string(2 * m + 1) + " rows");
  return {n, m, period, std::move(c)};
}

}  // namespace linkorbit
