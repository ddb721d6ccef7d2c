#pragma once

// Hamiltonian models H(t, z) with analytic gradient and Hessian, the built-in
// families, the cut-off modification H_K and sample-based hypothesis checks.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "linkorbit/errors.hpp"
#include "linkorbit/loopspace.hpp"
#include "linkorbit/sampling.hpp"
#include "linkorbit/symplectic.hpp"

namespace linkorbit {

/// Constants of the growth hypotheses. Optional blocks belong to the
/// alternative hypothesis sets and are only checked when present.
struct GrowthProfile {
  double beta = 2.0;
  double c1 = 1.0;
  double c2 = 1.0;
  Vector alpha;   ///< V_1 = V(alpha, beta_w)
  Vector beta_w;
  std::optional<Vector> xi;  ///< V_2 = V(xi, eta_w)
  std::optional<Vector> eta_w;
  Vector sigma;
  Vector tau_exp;
  double lambda = 2.0;
  std::optional<Vector> phi;  ///< V_3 = V(1/phi, 1/psi)
  std::optional<Vector> psi;
  std::optional<double> theta;
  std::optional<double> R0;
  std::optional<double> b1;
  std::optional<double> b2;

  int n() const { return static_cast<int>(sigma.size()); }

  double max_exponent_ratio() const {
    double r = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) r = std::max({r, sigma[i] / tau_exp[i], tau_exp[i] / sigma[i]});
    return r;
  }

  /// max over alpha/beta, xi/eta, sigma/tau ratios and beta - 1.
  double gamma() const {
    double g = std::max(max_exponent_ratio(), beta - 1.0);
    for (Eigen::Index i = 0; i < alpha.size(); ++i) g = std::max({g, alpha[i] / beta_w[i], beta_w[i] / alpha[i]});
    if (xi && eta_w)
      for (Eigen::Index i = 0; i < xi->size(); ++i) g = std::max({g, (*xi)[i] / (*eta_w)[i], (*eta_w)[i] / (*xi)[i]});
    return g;
  }

  DiagonalScaling v1() const { return DiagonalScaling(alpha, beta_w); }
  std::optional<DiagonalScaling> v2() const {
    if (!xi || !eta_w) return std::nullopt;
    return DiagonalScaling(*xi, *eta_w);
  }
  std::optional<DiagonalScaling> v3() const {
    if (!phi || !psi) return std::nullopt;
    return DiagonalScaling(phi->cwiseInverse(), psi->cwiseInverse());
  }

  void validate(int n_expected) const {
    auto need = [&](const Vector& v, const char* what) {
      if (v.size() != n_expected)
        throw DimensionError(std::string("GrowthProfile: ") + what + " must have length n = " + std::to_string(n_expected));
    };
    need(sigma, "sigma");
    need(tau_exp, "tau");
    need(alpha, "alpha");
    need(beta_w, "beta_w");
    if ((sigma.array() <= 0).any() || (tau_exp.array() <= 0).any()) throw InputError("GrowthProfile: sigma, tau must be positive");
    if (!(beta > 1.0)) throw InputError("GrowthProfile: beta must exceed 1");
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw InputError("GrowthProfile: c1, c2 must be positive");
    DiagonalScaling::convex(alpha, beta_w);
    if (xi || eta_w) {
      if (!xi || !eta_w) throw InputError("GrowthProfile: xi and eta_w come together");
      need(*xi, "xi");
      need(*eta_w, "eta_w");
      DiagonalScaling::convex(*xi, *eta_w);
    }
    if (!(max_exponent_ratio() < lambda && lambda < 1.0 + beta))
      throw InputError("GrowthProfile: lambda must lie in (max sigma/tau ratio, 1 + beta)");
    if (phi || psi) {
      if (!phi || !psi) throw InputError("GrowthProfile: phi and psi come together");
      need(*phi, "phi");
      need(*psi, "psi");
      if (((phi->cwiseInverse() + psi->cwiseInverse()).array() - 1.0).abs().maxCoeff() > 1e-12)
        throw InputError("GrowthProfile: 1/phi_i + 1/psi_i must equal 1");
    }
    if (theta && !(*theta > 0.0 && *theta < 1.0)) throw InputError("GrowthProfile: theta must lie in (0, 1)");
  }
};

/// tau-periodic symmetric matrix term B^(t) of H = 1/2 (B^ z, z) + H^.
class QuadraticTerm {
 public:
  explicit QuadraticTerm(MatrixPath bhat) : bhat_(std::move(bhat)) {
    // The 2-norm is convex, so its maximum over a linear interpolant sits at a sample.
    for (const Matrix& B : bhat_.values()) omega_ = std::max(omega_, Eigen::JacobiSVD<Matrix>(B).singularValues()[0]);
  }

  const MatrixPath& path() const { return bhat_; }
  double omega() const { return omega_; }
  int n() const { return bhat_.n(); }
  double period() const { return bhat_.period(); }
  Matrix operator()(double t) const { return bhat_(t); }

 private:
  MatrixPath bhat_;
  double omega_ = 0.0;
};

/// Immutable, type-erased Hamiltonian. Evaluation is thread-safe.
class HamiltonianModel {
 public:
  using ValueFn = std::function<double(double, const Vector&)>;
  using GradFn = std::function<Vector(double, const Vector&)>;
  using HessFn = std::function<Matrix(double, const Vector&)>;

  HamiltonianModel(std::string name, int n, double period, bool autonomous, ValueFn value, GradFn grad, HessFn hess,
                   std::optional<GrowthProfile> growth = std::nullopt)
      : impl_(std::make_shared<const Impl>(Impl{std::move(name), n, period, autonomous, std::move(value), std::move(grad),
                                                std::move(hess), std::move(growth), 0.0})) {
    if (n < 1) throw InputError("HamiltonianModel: n must be >= 1");
    if (!(period > 0.0)) throw InputError("HamiltonianModel: period must be positive");
    if (impl_->growth) impl_->growth->validate(n);
  }

  const std::string& name() const { return impl_->name; }
  int n() const { return impl_->n; }
  double period() const { return impl_->period; }
  bool autonomous() const { return impl_->autonomous; }
  const std::optional<GrowthProfile>& growth() const { return impl_->growth; }
  /// max_t |B^(t)| of an embedded quadratic term, 0 if none.
  double omega() const { return impl_->omega; }

  double value(double t, const Vector& z) const { return impl_->value(t, check(z)); }
  Vector gradient(double t, const Vector& z) const { return impl_->grad(t, check(z)); }
  Matrix hessian(double t, const Vector& z) const { return impl_->hess(t, check(z)); }

  /// Same functions, new metadata.
  HamiltonianModel renamed(std::string name, std::optional<GrowthProfile> growth, double omega) const {
    HamiltonianModel out = *this;
    auto impl = std::make_shared<Impl>(*impl_);
    impl->name = std::move(name);
    impl->growth = std::move(growth);
    impl->omega = omega;
    if (impl->growth) impl->growth->validate(impl->n);
    out.impl_ = std::move(impl);
    return out;
  }

 private:
  struct Impl {
    std::string name;
    int n;
    double period;
    bool autonomous;
    ValueFn value;
    GradFn grad;
    HessFn hess;
    std::optional<GrowthProfile> growth;
    double omega;
  };

  const Vector& check(const Vector& z) const {
    if (z.size() != 2 * impl_->n) throw DimensionError("HamiltonianModel: expected a point of R^" + std::to_string(2 * impl_->n));
    return z;
  }

  std::shared_ptr<const Impl> impl_;
};

namespace detail {

// h(x) = |x|^a ln(1 + x^2) and its first two derivatives.
struct LogPower {
  double a;

  double value(double x) const { return x == 0.0 ? 0.0 : std::pow(std::abs(x), a) * std::log1p(x * x); }

  double d1(double x) const {
    if (x == 0.0) return 0.0;
    const double ax = std::abs(x);
    const double L = std::log1p(x * x);
    return a * std::pow(ax, a - 1.0) * (x > 0 ? 1.0 : -1.0) * L + std::pow(ax, a) * 2.0 * x / (1.0 + x * x);
  }

  double d2(double x) const {
    if (x == 0.0) return 0.0;
    const double ax = std::abs(x);
    const double L = std::log1p(x * x);
    const double s = 1.0 + x * x;
    return a * (a - 1.0) * std::pow(ax, a - 2.0) * L + 4.0 * a * std::pow(ax, a) / s +
           std::pow(ax, a) * 2.0 * (1.0 - x * x) / (s * s);
  }
};

}  // namespace detail

/// Exponent-derived growth data: alpha_i = xi_i = tau_i/(sigma_i+tau_i),
/// beta = 1 + min ratio, lambda halfway through (max ratio, 1 + beta), c1 = c2 = 1.
inline GrowthProfile default_growth(const Vector& sigma, const Vector& tau_exp) {
  GrowthProfile g;
  g.sigma = sigma;
  g.tau_exp = tau_exp;
  g.alpha = tau_exp.cwiseQuotient(sigma + tau_exp);
  g.beta_w = sigma.cwiseQuotient(sigma + tau_exp);
  g.xi = g.alpha;
  g.eta_w = g.beta_w;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sigma.size(); ++i) min_ratio = std::min({min_ratio, sigma[i] / tau_exp[i], tau_exp[i] / sigma[i]});
  g.beta = 1.0 + min_ratio;
  g.lambda = 0.5 * (g.max_exponent_ratio() + 1.0 + g.beta);
  return g;
}

/// H = sum_i |p_i|^(1+sigma_i/tau_i) ln(1+p_i^2) + |q_i|^(1+tau_i/sigma_i) ln(1+q_i^2).
///
/// Default growth constants: V_1 = V_2 with alpha_i = tau_i/(sigma_i+tau_i),
/// which makes alpha_i (1 + sigma_i/tau_i) = 1; beta = 1 + min ratio;
/// lambda halfway through the admissible interval; c1, c2 calibrated on a
/// radius ladder.
inline HamiltonianModel example_anisotropic(int n, const Vector& sigma, const Vector& tau_exp, double period = kTwoPi) {
  if (n < 1 || sigma.size() != n || tau_exp.size() != n)
    throw DimensionError("example_anisotropic: sigma and tau must have length n");
  if ((sigma.array() <= 0).any() || (tau_exp.array() <= 0).any())
    throw InputError("example_anisotropic: exponents must be positive");
  std::vector<detail::LogPower> hp;
  std::vector<detail::LogPower> hq;
  for (int i = 0; i < n; ++i) {
    hp.push_back({1.0 + sigma[i] / tau_exp[i]});
    hq.push_back({1.0 + tau_exp[i] / sigma[i]});
  }
  auto value = [n, hp, hq](double, const Vector& z) {
    double h = 0.0;
    for (int i = 0; i < n; ++i) h += hp[static_cast<std::size_t>(i)].value(z[i]) + hq[static_cast<std::size_t>(i)].value(z[n + i]);
    return h;
  };
  auto grad = [n, hp, hq](double, const Vector& z) {
    Vector g(2 * n);
    for (int i = 0; i < n; ++i) {
      g[i] = hp[static_cast<std::size_t>(i)].d1(z[i]);
      g[n + i] = hq[static_cast<std::size_t>(i)].d1(z[n + i]);
    }
    return g;
  };
  auto hess = [n, hp, hq](double, const Vector& z) {
    Matrix h = Matrix::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
      h(i, i) = hp[static_cast<std::size_t>(i)].d2(z[i]);
      h(n + i, n + i) = hq[static_cast<std::size_t>(i)].d2(z[n + i]);
    }
    return h;
  };

  GrowthProfile g = default_growth(sigma, tau_exp);
  // H'.V_1 z - H = sum 2 alpha_i |p_i|^a p_i^2/(1+p_i^2) + (q terms) >= 0. Calibrate
  // c1 from the large-radius ratio to |z|^beta and c2 from the deficit
  // everywhere on the ladder; the Hessian bound (H3) shares c2.
  HamiltonianModel probe("example_anisotropic", n, period, true, value, grad, hess);
  const DiagonalScaling V1(g.alpha, g.beta_w);
  sampling::Rng rng(sampling::kDefaultSeed);
  double ratio_min = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> q_and_r;
  std::vector<std::pair<double, double>> hess_and_r;
  for (double r : sampling::decade_ladder(-4, 4)) {
    for (int s = 0; s < 256; ++s) {
      const Vector z = r * sampling::unit_sphere(rng, 2 * n);
      const double q = probe.gradient(0.0, z).dot(apply_diagonal_scaling(V1, z)) - probe.value(0.0, z);
      q_and_r.emplace_back(q, r);
      hess_and_r.emplace_back(Eigen::SelfAdjointEigenSolver<Matrix>(probe.hessian(0.0, z)).eigenvalues().cwiseAbs().maxCoeff(), r);
      if (r >= 10.0) ratio_min = std::min(ratio_min, q / std::pow(r, g.beta));
    }
  }
  g.c1 = 0.5 * ratio_min;
  double c2 = 0.0;
  for (const auto& [q, r] : q_and_r) c2 = std::max(c2, g.c1 * std::pow(r, g.beta) - q);
  for (const auto& [h, r] : hess_and_r) c2 = std::max(c2, h / (std::pow(r, g.lambda - 1.0) + 1.0));
  g.c2 = 2.0 * c2 + 1.0;
  return probe.renamed("example_anisotropic", g, 0.0);
}

/// H = 1/2 (B^(t) z, z).
inline HamiltonianModel quadratic_model(const QuadraticTerm& bhat, std::optional<GrowthProfile> growth = std::nullopt) {
  const MatrixPath path = bhat.path();
  const bool constant = std::all_of(path.values().begin(), path.values().end(),
                                    [&](const Matrix& B) { return (B - path.values().front()).norm() == 0.0; });
  HamiltonianModel m(
      "quadratic", bhat.n(), bhat.period(), constant,
      [path](double t, const Vector& z) { return 0.5 * z.dot(path(t) * z); },
      [path](double t, const Vector& z) { return Vector(path(t) * z); },
      [path](double t, const Vector&) { return path(t); }, std::move(growth));
  return m.renamed("quadratic", m.growth(), bhat.omega());
}

/// H = 1/2 |z|^2, carrying the sigma_i = tau_i = 1 growth data.
inline HamiltonianModel half_norm_squared(int n, double period = kTwoPi) {
  return quadratic_model(QuadraticTerm(MatrixPath::constant(Matrix::Identity(2 * n, 2 * n), period)),
                         default_growth(Vector::Ones(n), Vector::Ones(n)));
}

/// H == 0.
inline HamiltonianModel zero_model(int n, double period = kTwoPi) {
  return HamiltonianModel(
      "zero", n, period, true, [](double, const Vector&) { return 0.0; },
      [n](double, const Vector&) { return Vector(Vector::Zero(2 * n)); },
      [n](double, const Vector&) { return Matrix(Matrix::Zero(2 * n, 2 * n)); });
}

struct SamplingSpec {
  std::vector<double> radii = sampling::decade_ladder(-4, 4);
  int per_radius = 64;
  int times = 4;  ///< time samples per period for non-autonomous models
  std::uint64_t seed = sampling::kDefaultSeed;
};

/// Point where a sampled inequality failed.
struct Witness {
  double t = 0.0;
  Vector z;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Raised by with_quadratic_term when the combined H is negative somewhere.
class NegativityError : public InputError {
 public:
  NegativityError(const std::string& what, Witness w) : InputError(what), witness_(std::move(w)) {}
  const Witness& witness() const { return witness_; }

 private:
  Witness witness_;
};

namespace detail {

template <class Fn>
void for_each_sample(const HamiltonianModel& model, const SamplingSpec& spec, double min_radius, Fn&& fn) {
  sampling::Rng rng(spec.seed);
  const int nt = model.autonomous() ? 1 : std::max(1, spec.times);
  for (double r : spec.radii) {
    if (r < min_radius) continue;
    for (int s = 0; s < spec.per_radius; ++s) {
      const Vector z = r * sampling::unit_sphere(rng, 2 * model.n());
      for (int j = 0; j < nt; ++j) fn(model.period() * j / nt, z, r);
    }
  }
}

}  // namespace detail

/// H = 1/2 (B^(t) z, z) + H^(t, z), rejected when a sampled value is negative.
inline HamiltonianModel with_quadratic_term(const HamiltonianModel& model, const QuadraticTerm& bhat,
                                            const SamplingSpec& spec = {}) {
  if (bhat.n() != model.n()) throw DimensionError("with_quadratic_term: B^ and model have different n");
  if (std::abs(bhat.period() - model.period()) > 1e-12 * model.period() && !model.autonomous())
    throw InputError("with_quadratic_term: B^ and model have different periods");
  const MatrixPath path = bhat.path();
  const bool trivial = std::all_of(path.values().begin(), path.values().end(), [](const Matrix& B) { return B.isZero(0.0); });
  const bool constant = std::all_of(path.values().begin(), path.values().end(),
                                    [&](const Matrix& B) { return (B - path.values().front()).norm() == 0.0; });
  HamiltonianModel out(
      trivial ? model.name() : model.name() + "+quadratic", model.n(), bhat.period(), model.autonomous() && constant,
      [model, path](double t, const Vector& z) { return 0.5 * z.dot(path(t) * z) + model.value(t, z); },
      [model, path](double t, const Vector& z) { return Vector(path(t) * z + model.gradient(t, z)); },
      [model, path](double t, const Vector& z) { return Matrix(path(t) + model.hessian(t, z)); });
  detail::for_each_sample(out, spec, 0.0, [&](double t, const Vector& z, double) {
    const double h = out.value(t, z);
    if (h < 0.0) throw NegativityError("with_quadratic_term: combined Hamiltonian is negative", Witness{t, z, h, 0.0});
  });
  return out.renamed(out.name(), model.growth(), bhat.omega());
}

namespace detail {

inline double psi(double x) { return x <= 0.0 ? 0.0 : std::exp(-1.0 / x); }
inline double dpsi(double x) { return x <= 0.0 ? 0.0 : psi(x) / (x * x); }
inline double ddpsi(double x) { return x <= 0.0 ? 0.0 : psi(x) * (1.0 / (x * x * x * x) - 2.0 / (x * x * x)); }

}  // namespace detail

/// C^infinity cut-off: 1 on [0, K], 0 on [K+1, inf), strictly decreasing in between.
struct CutoffFunction {
  double K;

  /// (chi, chi', chi'') at s.
  std::array<double, 3> operator()(double s) const {
    const double u = s - K;
    if (u <= 0.0) return {1.0, 0.0, 0.0};
    if (u >= 1.0) return {0.0, 0.0, 0.0};
    const double a = detail::psi(1.0 - u);
    const double da = -detail::dpsi(1.0 - u);
    const double dda = detail::ddpsi(1.0 - u);
    const double b = detail::psi(u);
    const double db = detail::dpsi(u);
    const double ddb = detail::ddpsi(u);
    const double D = a + b;
    const double N = da * b - a * db;
    return {a / D, N / (D * D), (dda * b - a * ddb) / (D * D) - 2.0 * N * (da + db) / (D * D * D)};
  }
};

struct CutoffInfo {
  double K = 0.0;
  double lambda0 = 0.0;
  double C_K = 0.0;
  double shell_max = 0.0;  ///< candidate from max of H/|z|^(lambda0+1) on the shell
  double c1_term = 0.0;    ///< candidate c1 / min_i{alpha_i lambda0 - beta_i, beta_i lambda0 - alpha_i}
  double A1 = 0.0;
};

/// H_K = chi(|z|) H + (1 - chi(|z|)) C_K |z|^(lambda0 + 1). lambda0 defaults to
/// the midpoint of (gamma, 1 + beta).
inline std::pair<HamiltonianModel, CutoffInfo> cutoff(const HamiltonianModel& model, double K,
                                                      std::optional<double> lambda0 = std::nullopt, double A1 = 0.0) {
  if (!model.growth()) throw InputError("cutoff: model has no growth profile");
  if (!(K >= 1.0)) throw InputError("cutoff: K must be >= 1");
  const GrowthProfile& g = *model.growth();
  const double gamma = g.gamma();
  const double lam = lambda0 ? *lambda0 : 0.5 * (gamma + 1.0 + g.beta);
  if (!(gamma < lam && lam < 1.0 + g.beta))
    throw InputError("cutoff: lambda0 = " + std::to_string(lam) + " outside (" + std::to_string(gamma) + ", " +
                     std::to_string(1.0 + g.beta) + ")");
  CutoffInfo info;
  info.K = K;
  info.lambda0 = lam;
  info.A1 = A1;
  const int dim = 2 * model.n();
  const double p = lam + 1.0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto h = sampling::halton(s, std::min(dim + 2, 16));
    const double r = K + h[0];
    const double t = model.autonomous() ? 0.0 : model.period() * h[1];
    const Vector z = r * sampling::halton_sphere(s, dim);
    info.shell_max = std::max(info.shell_max, model.value(t, z) / std::pow(r, p));
  }
  double denom = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < g.alpha.size(); ++i)
    denom = std::min({denom, g.alpha[i] * lam - g.beta_w[i], g.beta_w[i] * lam - g.alpha[i]});
  info.c1_term = g.c1 / denom;
  info.C_K = std::max({info.shell_max, info.c1_term, A1});

  const CutoffFunction chi{K};
  const double C = info.C_K;
  auto G = [C, p](const Vector& z) { return C * std::pow(z.norm(), p); };
  auto dG = [C, p](const Vector& z) {
    const double r = z.norm();
    return Vector(C * p * std::pow(r, p - 2.0) * z);
  };
  auto ddG = [C, p](const Vector& z) {
    const double r = z.norm();
    const auto d = z.size();
    return Matrix(C * p * (std::pow(r, p - 2.0) * Matrix::Identity(d, d) + (p - 2.0) * std::pow(r, p - 4.0) * z * z.transpose()));
  };

  HamiltonianModel base = model;
  auto value = [base, chi, G, K](double t, const Vector& z) {
    const double r = z.norm();
    if (r <= K) return base.value(t, z);
    if (r >= K + 1.0) return G(z);
    const double c = chi(r)[0];
    return c * base.value(t, z) + (1.0 - c) * G(z);
  };
  auto grad = [base, chi, G, dG, K](double t, const Vector& z) {
    const double r = z.norm();
    if (r <= K) return base.gradient(t, z);
    if (r >= K + 1.0) return dG(z);
    const auto c = chi(r);
    const Vector dchi = c[1] * z / r;
    return Vector(c[0] * base.gradient(t, z) + (1.0 - c[0]) * dG(z) + (base.value(t, z) - G(z)) * dchi);
  };
  auto hess = [base, chi, G, dG, ddG, K](double t, const Vector& z) {
    const double r = z.norm();
    if (r <= K) return base.hessian(t, z);
    if (r >= K + 1.0) return ddG(z);
    const auto c = chi(r);
    const auto d = z.size();
    const Vector u = z / r;
    const Vector dchi = c[1] * u;
    const Matrix ddchi = c[2] * u * u.transpose() + (c[1] / r) * (Matrix::Identity(d, d) - u * u.transpose());
    const Vector diff = base.gradient(t, z) - dG(z);
    return Matrix(c[0] * base.hessian(t, z) + (1.0 - c[0]) * ddG(z) + dchi * diff.transpose() + diff * dchi.transpose() +
                  (base.value(t, z) - G(z)) * ddchi);
  };
  HamiltonianModel out(model.name() + "_K", model.n(), model.period(), model.autonomous(), value, grad, hess);
  return {out.renamed(out.name(), model.growth(), model.omega()), info};
}

enum class Verdict { holds, violated, consistent, inconsistent, not_applicable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::violated: return "violated";
    case Verdict::consistent: return "consistent";
    case Verdict::inconsistent: return "inconsistent";
    case Verdict::not_applicable: return "not_applicable";
  }
  return "?";
}

inline bool passed(Verdict v) { return v == Verdict::holds || v == Verdict::consistent; }

struct HypothesisResult {
  std::string name;
  Verdict verdict = Verdict::not_applicable;
  std::string detail;
  std::vector<Witness> witnesses;  ///< at most a handful
  std::vector<double> trend;       ///< per-radius ratio for limit hypotheses
};

struct HypothesisReport {
  std::vector<HypothesisResult> results;

  const HypothesisResult* find(const std::string& name) const {
    for (const auto& r : results)
      if (r.name == name) return &r;
    return nullptr;
  }

  /// Every applicable hypothesis passed.
  bool all_passed() const {
    return std::all_of(results.begin(), results.end(),
                       [](const HypothesisResult& r) { return r.verdict == Verdict::not_applicable || passed(r.verdict); });
  }
};

namespace detail {

// Sampled inequality lhs >= rhs, with tolerance relative to the magnitudes.
template <class Fn>
HypothesisResult check_inequality(const std::string& name, const HamiltonianModel& model, const SamplingSpec& spec,
                                  double min_radius, Fn&& fn) {
  HypothesisResult r;
  r.name = name;
  std::size_t count = 0;
  for_each_sample(model, spec, min_radius, [&](double t, const Vector& z, double) {
    const auto [lhs, rhs] = fn(t, z);
    ++count;
    if (!(lhs >= rhs - 1e-9 * (1.0 + std::abs(lhs) + std::abs(rhs)))) {
      if (r.witnesses.size() < 5) r.witnesses.push_back({t, z, lhs, rhs});
    }
  });
  r.verdict = r.witnesses.empty() ? Verdict::holds : Verdict::violated;
  r.detail = std::to_string(count) + " samples";
  return r;
}

inline double anisotropic_weight(const GrowthProfile& g, const Vector& z) {
  const Eigen::Index n = g.sigma.size();
  double w = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    w += std::pow(std::abs(z[i]), 1.0 + g.sigma[i] / g.tau_exp[i]) + std::pow(std::abs(z[n + i]), 1.0 + g.tau_exp[i] / g.sigma[i]);
  return w;
}

inline double phi_psi_weight(const GrowthProfile& g, const Vector& z) {
  const Eigen::Index n = g.sigma.size();
  double w = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) w += std::pow(std::abs(z[i]), (*g.phi)[i]) + std::pow(std::abs(z[n + i]), (*g.psi)[i]);
  return w;
}

// Ratio H/weight per radius: max (towards 0) or min (towards infinity).
template <class Weight>
std::vector<double> ratio_trend(const HamiltonianModel& model, const SamplingSpec& spec, const std::vector<double>& radii,
                                bool take_max, Weight&& weight) {
  std::vector<double> out;
  for (double r : radii) {
    SamplingSpec one = spec;
    one.radii = {r};
    double acc = take_max ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    for_each_sample(model, one, 0.0, [&](double t, const Vector& z, double) {
      const double ratio = model.value(t, z) / weight(z);
      acc = take_max ? std::max(acc, ratio) : std::min(acc, ratio);
    });
    out.push_back(acc);
  }
  return out;
}

// Ratio -> 0 as |z| -> 0: maxima non-increasing along the shrinking radii and the
// last at most a tenth of the one at radius 1.
template <class Weight>
HypothesisResult check_small_limit(const std::string& name, const HamiltonianModel& model, const SamplingSpec& spec,
                                   Weight&& weight) {
  HypothesisResult r;
  r.name = name;
  std::vector<double> radii;
  for (double x : spec.radii)
    if (x <= 1.0) radii.push_back(x);
  std::sort(radii.rbegin(), radii.rend());
  if (radii.size() < 2) {
    r.detail = "ladder has fewer than two radii <= 1";
    return r;
  }
  r.trend = ratio_trend(model, spec, radii, true, weight);
  bool mono = true;
  for (std::size_t i = 1; i < r.trend.size(); ++i) mono = mono && r.trend[i] <= r.trend[i - 1] * (1.0 + 1e-9) + 1e-300;
  const bool small = r.trend.back() <= 0.1 * r.trend.front();
  r.verdict = mono && small ? Verdict::consistent : Verdict::inconsistent;
  r.detail = "max ratio " + std::to_string(r.trend.front()) + " at r=" + std::to_string(radii.front()) + " -> " +
             std::to_string(r.trend.back()) + " at r=" + std::to_string(radii.back()) + "; trend only, not a proof";
  return r;
}

}  // namespace detail

/// Sample-based verdicts for the named hypotheses: "H1".."H5", "H3'", "H7",
/// "C1".."C4". Limit hypotheses are judged as trends on the radius ladder.
inline HypothesisReport check_hypotheses(const HamiltonianModel& model, const std::vector<std::string>& which,
                                         const SamplingSpec& spec = {}) {
  HypothesisReport rep;
  const auto& g = model.growth();
  auto na = [](const std::string& name, std::string why) {
    HypothesisResult r;
    r.name = name;
    r.detail = std::move(why);
    return r;
  };
  for (const std::string& h : which) {
    if (h == "H1" || h == "C1") {
      HypothesisResult r = detail::check_inequality(h, model, spec, 0.0, [&](double t, const Vector& z) {
        return std::pair{model.value(t, z), 0.0};
      });
      // periodicity in t
      detail::for_each_sample(model, spec, 0.0, [&](double t, const Vector& z, double) {
        const double a = model.value(t, z);
        const double b = model.value(t + model.period(), z);
        if (std::abs(a - b) > 1e-10 * (1.0 + std::abs(a)) && r.witnesses.size() < 5) r.witnesses.push_back({t, z, a, b});
      });
      r.verdict = r.witnesses.empty() ? Verdict::holds : Verdict::violated;
      rep.results.push_back(std::move(r));
    } else if (h == "H2") {
      if (!g) { rep.results.push_back(na(h, "no growth profile")); continue; }
      const DiagonalScaling V1 = g->v1();
      rep.results.push_back(detail::check_inequality(h, model, spec, 0.0, [&](double t, const Vector& z) {
        return std::pair{model.gradient(t, z).dot(apply_diagonal_scaling(V1, z)) - model.value(t, z),
                         g->c1 * std::pow(z.norm(), g->beta) - g->c2};
      }));
    } else if (h == "H3") {
      if (!g) { rep.results.push_back(na(h, "no growth profile")); continue; }
      HypothesisResult r = detail::check_inequality(h, model, spec, 0.0, [&](double t, const Vector& z) {
        const double nrm = Eigen::JacobiSVD<Matrix>(model.hessian(t, z)).singularValues()[0];
        return std::pair{g->c2 * (std::pow(z.norm(), g->lambda - 1.0) + 1.0), nrm};
      });
      if (!(g->max_exponent_ratio() < g->lambda && g->lambda < 1.0 + g->beta)) {
        r.verdict = Verdict::violated;
        r.detail += "; lambda outside its admissible interval";
      }
      rep.results.push_back(std::move(r));
    } else if (h == "H3'") {
      const auto V2 = g ? g->v2() : std::nullopt;
      if (!V2) { rep.results.push_back(na(h, "no xi/eta_w data")); continue; }
      rep.results.push_back(detail::check_inequality(h, model, spec, 0.0, [&](double t, const Vector& z) {
        const Vector dH = model.gradient(t, z);
        return std::pair{dH.dot(apply_diagonal_scaling(*V2, z)) - model.value(t, z), g->c1 * dH.norm() - g->c2};
      }));
    } else if (h == "H4") {
      if (!g) { rep.results.push_back(na(h, "no growth profile")); continue; }
      rep.results.push_back(detail::check_small_limit(h, model, spec, [&](const Vector& z) { return detail::anisotropic_weight(*g, z); }));
    } else if (h == "H5") {
      if (!g) { rep.results.push_back(na(h, "no growth profile")); continue; }
      HypothesisResult r;
      r.name = h;
      std::vector<double> radii;
      for (double x : spec.radii)
        if (x >= 1.0) radii.push_back(x);
      std::sort(radii.begin(), radii.end());
      if (radii.size() < 2) { rep.results.push_back(na(h, "ladder has fewer than two radii >= 1")); continue; }
      r.trend = detail::ratio_trend(model, spec, radii, false, [&](const Vector& z) { return detail::anisotropic_weight(*g, z); });
      bool mono = true;
      for (std::size_t i = 1; i < r.trend.size(); ++i) mono = mono && r.trend[i] >= r.trend[i - 1] * (1.0 - 1e-9);
      const bool grows = r.trend.back() >= 2.0 * r.trend.front();
      r.verdict = mono && grows ? Verdict::consistent : Verdict::inconsistent;
      r.detail = "min ratio " + std::to_string(r.trend.front()) + " at r=" + std::to_string(radii.front()) + " -> " +
                 std::to_string(r.trend.back()) + " at r=" + std::to_string(radii.back()) + "; trend only, not a proof";
      rep.results.push_back(std::move(r));
    } else if (h == "H7") {
      HypothesisResult r;
      r.name = h;
      std::size_t count = 0;
      detail::for_each_sample(model, spec, 1e-6, [&](double t, const Vector& z, double) {
        const Matrix H2 = model.hessian(t, z);
        const double lo = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (H2 + H2.transpose())).eigenvalues()[0];
        ++count;
        if (!(lo > 0.0) && r.witnesses.size() < 5) r.witnesses.push_back({t, z, lo, 0.0});
      });
      r.verdict = r.witnesses.empty() ? Verdict::holds : Verdict::violated;
      r.detail = std::to_string(count) + " sphere samples, |z| >= 1e-6; sample-scale evidence only";
      rep.results.push_back(std::move(r));
    } else if (h == "C2") {
      const auto V3 = g ? g->v3() : std::nullopt;
      if (!V3 || !g->theta || !g->R0) { rep.results.push_back(na(h, "needs phi, psi, theta, R0")); continue; }
      HypothesisResult r;
      r.name = h;
      detail::for_each_sample(model, spec, *g->R0, [&](double t, const Vector& z, double) {
        const double H = model.value(t, z);
        const double lhs = *g->theta * model.gradient(t, z).dot(apply_diagonal_scaling(*V3, z));
        if ((lhs < H - 1e-9 * (1.0 + std::abs(H)) || !(H > 0.0)) && r.witnesses.size() < 5) r.witnesses.push_back({t, z, lhs, H});
      });
      r.verdict = r.witnesses.empty() ? Verdict::holds : Verdict::violated;
      r.detail = "samples with |z| >= R0";
      rep.results.push_back(std::move(r));
    } else if (h == "C3") {
      const auto V3 = g ? g->v3() : std::nullopt;
      if (!V3 || !g->b1 || !g->b2) { rep.results.push_back(na(h, "needs phi, psi, b1, b2")); continue; }
      rep.results.push_back(detail::check_inequality(h, model, spec, 0.0, [&](double t, const Vector& z) {
        const Vector dH = model.gradient(t, z);
        return std::pair{*g->b1 * dH.dot(apply_diagonal_scaling(*V3, z)) + *g->b2, dH.norm()};
      }));
    } else if (h == "C4") {
      if (!g || !g->phi || !g->psi) { rep.results.push_back(na(h, "needs phi, psi")); continue; }
      rep.results.push_back(detail::check_small_limit(h, model, spec, [&](const Vector& z) { return detail::phi_psi_weight(*g, z); }));
    } else {
      throw InputError("check_hypotheses: unknown hypothesis '" + h + "'");
    }
  }
  return rep;
}

struct H6Report {
  bool structural = false;       ///< b_ij == 0 whenever |i - j| != n at every sample
  double bilinear_defect = 0.0;  ///< max |(Bz,z) - 2(Bz,Vz)| / (1 + |B||z|^2)
  bool bilinear_ok = false;
  std::vector<std::pair<double, double>> scaling_defect;  ///< (rho, max relative defect)
  bool scaling_ok = false;
  bool ok() const { return bilinear_ok && scaling_ok; }
};

/// (B^ z, z) = 2 (B^ z, V z) and (B^ B_rho z, B_rho z) = rho^(eta-2) (B^ z, z) on
/// seeded random (t, z), plus the sparsity sufficient condition.
inline H6Report check_h6(const QuadraticTerm& bhat, const DiagonalScaling& V, const ScalingProfile& profile,
                         const std::vector<double>& rhos, int samples = 200, std::uint64_t seed = sampling::kDefaultSeed,
                         double tol = 1e-10) {
  const int n = bhat.n();
  if (V.n() != n || profile.n() != n) throw DimensionError("check_h6: dimensions disagree");
  H6Report rep;
  rep.structural = true;
  for (const Matrix& B : bhat.path().values())
    for (int i = 0; i < 2 * n; ++i)
      for (int j = 0; j < 2 * n; ++j)
        if (std::abs(i - j) != n && B(i, j) != 0.0) rep.structural = false;
  sampling::Rng rng(seed);
  for (double rho : rhos) rep.scaling_defect.emplace_back(rho, 0.0);
  for (int s = 0; s < samples; ++s) {
    const double t = sampling::uniform(rng, 0.0, bhat.period());
    const Vector z = sampling::gaussian_vector(rng, 2 * n);
    const Matrix B = bhat(t);
    const double scale = 1.0 + B.norm() * z.squaredNorm();
    const double bzz = z.dot(B * z);
    rep.bilinear_defect = std::max(rep.bilinear_defect, std::abs(bzz - 2.0 * (B * z).dot(apply_diagonal_scaling(V, z))) / scale);
    for (auto& [rho, defect] : rep.scaling_defect) {
      const Vector bz = scaling_operator(z, rho, profile);
      const double lhs = bz.dot(B * bz);
      const double rhs = std::pow(rho, profile.eta() - 2.0) * bzz;
      defect = std::max(defect, std::abs(lhs - rhs) / (scale * (1.0 + std::pow(rho, profile.eta() - 2.0))));
    }
  }
  rep.bilinear_ok = rep.bilinear_defect <= tol;
  rep.scaling_ok = std::all_of(rep.scaling_defect.begin(), rep.scaling_defect.end(), [tol](const auto& p) { return p.second <= tol; });
  return rep;
}

/// c_s with ||z||_{L^s} >= c_s ||z||_{L^2} on [0, T] for s >= 2 (Hoelder).
inline double lebesgue_constant(double period, double s) {
  if (!(s >= 2.0)) throw InputError("lebesgue_constant: exponent must be >= 2");
  return std::pow(period, 1.0 / s - 0.5);
}

struct H6PrimeReport {
  double commutator_max = 0.0;  ///< max_t |B^ - B^ V - V B^|
  double threshold = 0.0;       ///< c1 * c_s
  bool commutator_ok = false;
  double omega_small = 0.0;  ///< sup of (B^ B_rho z, B_rho z) / rho^(eta-2) at the smallest rho
  double omega_large = 0.0;  ///< inf of the same ratio at the largest rho
  bool limits_ok = false;
  bool ok() const { return commutator_ok && limits_ok; }
};

/// The relaxed conditions: |B^ - B^V - VB^| < c1 c_s and the small/large-rho
/// behaviour of (B^ B_rho z, B_rho z) rho^(2-eta) on the unit sphere. Used with
/// V = V_1, c_s = c_beta for (H6)' and V = V_3, c_s = min c_{phi_i}, c_{psi_i} for (C5)'.
inline H6PrimeReport check_h6_prime(const QuadraticTerm& bhat, const DiagonalScaling& V, const ScalingProfile& profile,
                                    double c1, double c_s, int samples = 200, std::uint64_t seed = sampling::kDefaultSeed) {
  if (V.n() != bhat.n() || profile.n() != bhat.n()) throw DimensionError("check_h6_prime: dimensions disagree");
  H6PrimeReport rep;
  const Matrix Vm = V.matrix();
  for (const Matrix& B : bhat.path().values())
    rep.commutator_max = std::max(rep.commutator_max, Eigen::JacobiSVD<Matrix>(B - B * Vm - Vm * B).singularValues()[0]);
  rep.threshold = c1 * c_s;
  rep.commutator_ok = rep.commutator_max < rep.threshold;
  sampling::Rng rng(seed);
  rep.omega_small = -std::numeric_limits<double>::infinity();
  rep.omega_large = std::numeric_limits<double>::infinity();
  const double rho_small = 1e-3;
  const double rho_large = 1e3;
  for (int s = 0; s < samples; ++s) {
    const double t = sampling::uniform(rng, 0.0, bhat.period());
    const Vector z = sampling::unit_sphere(rng, 2 * bhat.n());
    const Matrix B = bhat(t);
    auto ratio = [&](double rho) {
      const Vector bz = scaling_operator(z, rho, profile);
      return bz.dot(B * bz) / std::pow(rho, profile.eta() - 2.0);
    };
    rep.omega_small = std::max(rep.omega_small, ratio(rho_small));
    rep.omega_large = std::min(rep.omega_large, ratio(rho_large));
  }
  rep.limits_ok = std::isfinite(rep.omega_small) && rep.omega_large >= -1e-12;
  return rep;
}

}  // namespace linkorbit
