#pragma once

// Truncated action functional f_m(z) = 1/2 <Az, z> - int_0^T H(t, z) dt on E_m,
// the linking geometry around it, the saddle search and the certification of
// the orbits it finds.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "linkorbit/errors.hpp"
#include "linkorbit/hamiltonians.hpp"
#include "linkorbit/index.hpp"
#include "linkorbit/loopspace.hpp"
#include "linkorbit/sampling.hpp"
#include "linkorbit/symplectic.hpp"

namespace linkorbit {

/// z(t) for a single time.
inline Vector evaluate_at(const FourierLoop& z, double t) {
  Vector v = Vector::Zero(2 * z.n());
  for (int k = -z.m(); k <= z.m(); ++k) v += FourierLoop::rotate(kTwoPi * k * t / z.period(), z.coeffs().col(k + z.m()));
  return v;
}

class ActionFunctional {
 public:
  /// points = 0 selects max(8m, 256) quadrature nodes.
  ActionFunctional(HamiltonianModel model, int m, double period, int points = 0)
      : model_(std::move(model)), m_(m), period_(period),
        quad_(period, m, points > 0 ? points : Quadrature::default_points(m)) {
    if (m < 1) throw InputError("ActionFunctional: m must be >= 1");
  }

  const HamiltonianModel& model() const { return model_; }
  int n() const { return model_.n(); }
  int m() const { return m_; }
  double period() const { return period_; }
  int points() const { return quad_.points(); }
  const Quadrature& quadrature() const { return quad_; }
  int dimension() const { return 2 * n() * (2 * m_ + 1); }

  FourierLoop zero() const { return FourierLoop(n(), m_, period_); }

  double value(const FourierLoop& z) const {
    check(z);
    const Matrix v = evaluate_on_grid(z, quad_);
    double h = 0.0;
    for (Eigen::Index j = 0; j < v.cols(); ++j) h += model_.value(quad_.times()[static_cast<std::size_t>(j)], v.col(j));
    return 0.5 * a_form(z, z) - quad_.step() * h;
  }

  /// Riesz representative in E_m: g_k = (2 pi k a_k - int exp(-theta_k J) H'(t, z) dt) / w_k.
  FourierLoop gradient(const FourierLoop& z) const {
    check(z);
    const Matrix v = evaluate_on_grid(z, quad_);
    Matrix h(v.rows(), v.cols());
    for (Eigen::Index j = 0; j < v.cols(); ++j) h.col(j) = model_.gradient(quad_.times()[static_cast<std::size_t>(j)], v.col(j));
    const FourierLoop hk = grid_moments(h, quad_, m_);
    Matrix g(v.rows(), 2 * m_ + 1);
    for (int k = -m_; k <= m_; ++k) g.col(k + m_) = (kTwoPi * k * z.mode(k) - hk.mode(k)) / z.weight(k);
    return {n(), m_, period_, std::move(g)};
  }

  /// H''(t_j, z(t_j)) on the quadrature grid.
  std::vector<Matrix> hessian_samples(const FourierLoop& z) const {
    check(z);
    const Matrix v = evaluate_on_grid(z, quad_);
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(v.cols()));
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      const Matrix B = model_.hessian(quad_.times()[static_cast<std::size_t>(j)], v.col(j));
      out.push_back(0.5 * (B + B.transpose()));
    }
    return out;
  }

  /// f_m''(z) in the orthonormal frame: the Galerkin matrix of A - H''(t, z(t)).
  Matrix hessian(const FourierLoop& z) const {
    return galerkin_matrix(moments_from_samples(hessian_samples(z), period_, 2 * m_), m_);
  }

  /// t -> H''(t, z(t)) as a T-periodic matrix function.
  SmoothMatrixFunction linearization(const FourierLoop& z) const {
    check(z);
    HamiltonianModel model = model_;
    return SmoothMatrixFunction(n(), period_, [model, z](double t) {
      const Matrix B = model.hessian(t, evaluate_at(z, t));
      return Matrix(0.5 * (B + B.transpose()));
    });
  }

  void check(const FourierLoop& z) const {
    if (z.n() != n() || z.m() != m_ || std::abs(z.period() - period_) > 1e-12 * period_)
      throw DimensionError("ActionFunctional: loop does not live in E_m of this functional");
  }

 private:
  HamiltonianModel model_;
  int m_;
  double period_;
  Quadrature quad_;
};

inline double action_value(const ActionFunctional& F, const FourierLoop& z) { return F.value(z); }
inline FourierLoop action_gradient(const ActionFunctional& F, const FourierLoop& z) { return F.gradient(z); }

struct MorseData {
  int morse_index = 0;
  int nullity = 0;
  GalerkinSpectrum spectrum;
};

inline MorseData action_hessian_spectrum(const ActionFunctional& F, const FourierLoop& z, const IndexOptions& opts = {}) {
  MorseData d;
  d.spectrum = classify_spectrum(symmetric_eigenvalues(F.hessian(z)), F.m(), F.period(), opts);
  d.morse_index = d.spectrum.dim_minus;
  d.nullity = d.spectrum.dim_zero;
  return d;
}

/// S = B_mu(sphere of radius mu in E^+), Q = [ball_nu in E^- + E^0] + [0, nu] e.
class LinkingGeometry {
 public:
  LinkingGeometry(double mu, double nu, FourierLoop e, ScalingProfile profile)
      : mu_(mu), nu_(nu), e_(std::move(e)), profile_(std::move(profile)) {
    if (!(mu > 0.0 && mu < 1.0)) throw InputError("LinkingGeometry: mu must lie in (0, 1)");
    if (!(nu > mu)) throw InputError("LinkingGeometry: nu must exceed mu");
    if (std::abs(norm(e_) - 1.0) > 1e-10) throw InputError("LinkingGeometry: e must be a unit vector");
    if (norm(project(e_, Part::minus)) + norm(project(e_, Part::zero)) > 1e-12)
      throw InputError("LinkingGeometry: e must lie in E^+");
    if (profile_.n() != e_.n()) throw DimensionError("LinkingGeometry: profile and e disagree on n");
  }

  double mu() const { return mu_; }
  double nu() const { return nu_; }
  double period() const { return e_.period(); }
  const FourierLoop& e() const { return e_; }
  const ScalingProfile& profile() const { return profile_; }
  /// delta = (pi / 3T) mu^eta
  double delta() const { return std::numbers::pi / (3.0 * period()) * std::pow(mu_, profile_.eta()); }
  /// (2 pi / T) nu^eta
  double upper_level() const { return kTwoPi / period() * std::pow(nu_, profile_.eta()); }

  // empirical constants behind mu and nu
  double eps1 = 0.0;
  double A1 = 0.0;
  double A2 = 0.0;

 private:
  double mu_;
  double nu_;
  FourierLoop e_;
  ScalingProfile profile_;
};

/// Unit vector of E_1 cap E^+: mode k = 1 with a_1 = e_c / sqrt(T).
inline FourierLoop unit_mode_one(int n, int m, double period, const Vector& direction) {
  if (direction.size() != 2 * n) throw DimensionError("unit_mode_one: direction has the wrong length");
  FourierLoop e(n, m, period);
  return e.with_mode(1, direction.normalized() / std::sqrt(period));
}

struct GeometryOptions {
  int w_samples = 64;  ///< samples of W for the eps_1 surrogate
  int s_samples = 64;  ///< samples of S_m per mu candidate
  int modes = 4;       ///< Fourier modes used by the random samples
  double mu_max = 0.5;
  int mu_halvings = 30;
  double mu_margin = 2.0;  ///< mu accepted when the sampled min of f on B_mu(S_m) is >= margin * delta
  std::uint64_t seed = sampling::kDefaultSeed;
};

namespace detail {

// Random loop supported on modes k in [lo, hi] (clipped to the truncation).
inline FourierLoop random_loop(sampling::Rng& rng, int n, int m, double period, int lo, int hi) {
  FourierLoop z(n, m, period);
  Matrix c = Matrix::Zero(2 * n, 2 * m + 1);
  for (int k = std::max(lo, -m); k <= std::min(hi, m); ++k)
    c.col(k + m) = sampling::gaussian_vector(rng, 2 * n) / std::sqrt(z.weight(k) * (1.0 + k * k));
  return {n, m, period, std::move(c)};
}

inline FourierLoop normalized(FourierLoop z, double r) {
  const double nz = norm(z);
  if (nz == 0.0) throw InputError("normalized: zero loop");
  return (r / nz) * z;
}

// sup{eps : meas{t : |z(t)| >= eps} >= eps} from grid samples.
inline double measure_level(const FourierLoop& z, const Quadrature& q) {
  const Matrix v = evaluate_on_grid(z, q);
  std::vector<double> mags(static_cast<std::size_t>(v.cols()));
  for (Eigen::Index j = 0; j < v.cols(); ++j) mags[static_cast<std::size_t>(j)] = v.col(j).norm();
  std::sort(mags.rbegin(), mags.rend());
  double best = 0.0;
  for (std::size_t j = 0; j < mags.size(); ++j) best = std::max(best, std::min(mags[j], (j + 1) * q.step()));
  return best;
}

}  // namespace detail

/// Surrogate for eps_1: the minimum over samples z of W of the level
/// sup{eps : meas{|z| >= eps} >= eps}.
inline double estimate_eps1(int n, double period, const FourierLoop& e, const GeometryOptions& opts) {
  const int mw = std::max(1, opts.modes);
  const Quadrature q(period, mw, Quadrature::default_points(mw));
  const FourierLoop ew = e.resized(mw);
  sampling::Rng rng(opts.seed ^ 0x5eedULL);
  double eps = std::numeric_limits<double>::infinity();
  for (int s = 0; s < opts.w_samples; ++s) {
    const double a = sampling::uniform(rng, -1.0, 1.0);
    FourierLoop top = a * ew + detail::random_loop(rng, n, mw, period, 0, 0);
    FourierLoop minus = detail::random_loop(rng, n, mw, period, -mw, -1);
    const double nt = norm(top);
    const double nm = norm(minus);
    if (nm > nt) minus *= sampling::uniform(rng, 0.0, 1.0) * nt / nm;
    const FourierLoop z = detail::normalized(top + minus, sampling::uniform(rng, 1.0, 2.0));
    eps = std::min(eps, detail::measure_level(z, q));
  }
  return eps;
}

/// A_1 from (2 pi / T) sqrt(2n) / A_1 = eps_1 min_i{(eps_1/sqrt(2n))^(1+s_i/t_i), (eps_1/sqrt(2n))^(1+t_i/s_i)}.
inline double compute_A1(double period, int n, double eps1, const GrowthProfile& g) {
  const double base = eps1 / std::sqrt(2.0 * n);
  double mn = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < g.sigma.size(); ++i)
    mn = std::min({mn, std::pow(base, 1.0 + g.sigma[i] / g.tau_exp[i]), std::pow(base, 1.0 + g.tau_exp[i] / g.sigma[i])});
  return kTwoPi / period * std::sqrt(2.0 * n) / (eps1 * mn);
}

/// Smallest radius r on the ladder 2^(j/4) up to r_max such that
/// H(t, z) >= A_1 w(z) at every sample with |z| >= r. Infinity if none.
inline double estimate_A2(const HamiltonianModel& model, double A1, double r_max, int per_radius = 128) {
  const GrowthProfile& g = *model.growth();
  std::vector<double> radii;
  for (int j = -16; std::pow(2.0, j / 4.0) <= r_max; ++j) radii.push_back(std::pow(2.0, j / 4.0));
  std::vector<bool> ok(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    bool all = true;
    for (int s = 0; s < per_radius && all; ++s) {
      const auto h = sampling::halton(static_cast<std::uint64_t>(s), 1);
      const double t = model.autonomous() ? 0.0 : model.period() * h[0];
      const Vector z = radii[i] * sampling::halton_sphere(static_cast<std::uint64_t>(s), 2 * model.n());
      all = model.value(t, z) >= A1 * detail::anisotropic_weight(g, z);
    }
    ok[i] = all;
  }
  double A2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = radii.size(); i-- > 0;) {
    if (!ok[i]) break;
    A2 = radii[i];
  }
  return A2;
}

/// Points of B_mu(S_m), B_nu(dQ_m) and of the segment B_nu([0, nu] e).
struct LinkingSeeds {
  std::vector<FourierLoop> sphere;
  std::vector<FourierLoop> boundary;
  std::vector<FourierLoop> segment;
};

inline LinkingSeeds linking_seed_set(const LinkingGeometry& G, int m, int count, std::uint64_t seed = sampling::kDefaultSeed,
                                     int modes = 4) {
  if (count < 1) throw InputError("linking_seed_set: count must be >= 1");
  const int n = G.e().n();
  const double T = G.period();
  const FourierLoop e = G.e().resized(m);
  sampling::Rng rng(seed);
  LinkingSeeds out;
  for (int s = 0; s < count; ++s) {
    const FourierLoop z = s == 0 ? G.mu() * e : detail::normalized(detail::random_loop(rng, n, m, T, 1, modes), G.mu());
    out.sphere.push_back(scaling_operator(z, G.mu(), G.profile()));
  }
  for (int s = 0; s < count; ++s) {
    const FourierLoop dir = detail::normalized(detail::random_loop(rng, n, m, T, -modes, 0), 1.0);
    double t = 0.0;
    double r = 0.0;
    switch (s % 3) {
      case 0: r = G.nu() * sampling::uniform(rng, 0.0, 1.0); break;  // t = 0 face
      case 1: t = G.nu(); r = G.nu() * sampling::uniform(rng, 0.0, 1.0); break;
      default: t = G.nu() * sampling::uniform(rng, 0.0, 1.0); r = G.nu(); break;
    }
    out.boundary.push_back(scaling_operator(t * e + r * dir, G.nu(), G.profile()));
  }
  for (int s = 0; s < count; ++s) {
    const double t = G.nu() * (s + 0.5) / count;
    out.segment.push_back(scaling_operator(t * e, G.nu(), G.profile()));
  }
  return out;
}

/// mu: the largest value on the halving ladder whose sampled min of f over
/// B_mu(S_m) is at least margin * delta(mu); nu = A_2 / eps_1 + 1.
inline LinkingGeometry build_linking_geometry(const ActionFunctional& F, const ScalingProfile& profile, double eps1,
                                              double A1, double A2, const GeometryOptions& opts = {}) {
  if (!std::isfinite(A2)) throw InputError("linking geometry: no radius A2 found where H >= A1 w");
  const FourierLoop e = unit_mode_one(F.n(), F.m(), F.period(), Vector::Unit(2 * F.n(), 0));
  const double nu = A2 / eps1 + 1.0;
  double mu = opts.mu_max;
  for (int h = 0; h <= opts.mu_halvings; ++h, mu *= 0.5) {
    if (!(nu > mu)) continue;
    LinkingGeometry G(mu, nu, e, profile);
    const LinkingSeeds seeds = linking_seed_set(G, F.m(), opts.s_samples, opts.seed, opts.modes);
    double fmin = std::numeric_limits<double>::infinity();
    for (const auto& z : seeds.sphere) fmin = std::min(fmin, F.value(z));
    if (fmin >= opts.mu_margin * G.delta()) {
      G.eps1 = eps1;
      G.A1 = A1;
      G.A2 = A2;
      return G;
    }
  }
  throw InputError("linking geometry: no admissible mu down to 2^-" + std::to_string(opts.mu_halvings));
}

struct SolverOptions {
  int m = 64;
  int quadrature_points = 0;
  double tol = 1e-9;
  int max_newton = 500;
  int predictor_steps = 5;
  double predictor_step = 0.1;  ///< in units of T / 2 pi
  double trust_radius = 0.5;
  double nonconst_tol = 1e-6;
  double value_slack = 0.1;  ///< fraction of delta
  double dedupe = 1e-4;
  bool deflation = true;
  int seed_count = 4;
  int wave_size = 4;
  std::uint64_t seed = sampling::kDefaultSeed;
  std::vector<double> K_schedule{10.0, 100.0, 1000.0};
  std::optional<double> lambda0;
  double zero_tol_rel = 1e-6;
  double rank_tol = 1e-6;
  bool monodromy_tiebreak = true;
  int monodromy_steps = 4096;
  double reintegration_tol = 1e-4;
  GeometryOptions geometry;
};

struct SaddleResult {
  FourierLoop loop{1, 0, 1.0};
  double value = 0.0;
  double residual = 0.0;
  int morse_index = 0;
  int morse_nullity = 0;
  int half_dimension = 0;  ///< 1/2 dim E_m
  IndexPair maslov;
  int maslov_stabilized_m = 0;
  int monodromy_nullity = 0;
  double period = 0.0;
  int k = 1;
  double cutoff_K = 0.0;
  double sup_norm = 0.0;
  double oscillation = 0.0;
  double reintegration_error = 0.0;
  double cerami = 0.0;  ///< (1 + ||z||) * residual
  int newton_steps = 0;
  int seed_index = 0;
  std::vector<std::string> warnings;

  /// i <= n + 1 <= i + nu
  bool window_ok() const { return maslov.i <= maslov.n + 1 && maslov.n + 1 <= maslov.i + maslov.nu; }
};

struct SeedDiagnostic {
  int seed_index = 0;
  double residual = 0.0;
  double value = 0.0;
  int steps = 0;
  std::string reason;
};

struct SaddleSearch {
  std::vector<SaddleResult> results;
  std::vector<SeedDiagnostic> diagnostics;
};

/// Value window and constants used to accept a critical point.
struct AcceptanceWindow {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double sup_bound = std::numeric_limits<double>::infinity();

  static AcceptanceWindow from(const LinkingGeometry& G, double slack, double K) {
    return {G.delta() - slack * G.delta(), G.upper_level() + slack * G.delta(), K};
  }
};

/// min over shifts s in [0, T) of ||z(. + s) - w|| (grid scan plus golden refinement).
inline double shift_distance(const FourierLoop& z, const FourierLoop& w) {
  z.check_same(w, "shift_distance");
  const double T = z.period();
  const int grid = 8 * (2 * z.m() + 1);
  auto dist = [&](double s) { return norm(z.shifted(s) - w); };
  double best_s = 0.0;
  double best = dist(0.0);
  for (int j = 1; j < grid; ++j) {
    const double d = dist(T * j / grid);
    if (d < best) {
      best = d;
      best_s = T * j / grid;
    }
  }
  double a = best_s - T / grid;
  double b = best_s + T / grid;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = dist(c);
  double fd = dist(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = dist(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = dist(d);
    }
  }
  return std::min({best, fc, fd});
}

namespace detail {

struct SeedOutcome {
  FourierLoop loop{1, 0, 1.0};
  double residual = std::numeric_limits<double>::infinity();
  double value = 0.0;
  int steps = 0;
  bool converged = false;
  std::string reason;
};

inline SeedOutcome run_seed(const ActionFunctional& F, const FourierLoop& seed, const std::vector<FourierLoop>& deflate,
                            const SolverOptions& opts) {
  const int n = F.n();
  const int m = F.m();
  const double T = F.period();
  const int d = 2 * n;
  Vector x = seed.to_orthonormal();
  auto loop_of = [&](const Vector& v) { return FourierLoop::from_orthonormal(n, m, T, v); };
  std::vector<Vector> known;
  for (const auto& z : deflate) known.push_back(z.to_orthonormal());

  // Predictor: ascend on E^- + E^0 + span{z^+}, descend on the rest of E^+.
  const Eigen::Index plus_start = static_cast<Eigen::Index>(m + 1) * d;
  const double h = opts.predictor_step * T / kTwoPi;
  for (int it = 0; it < opts.predictor_steps; ++it) {
    const Vector g = F.gradient(loop_of(x)).to_orthonormal();
    Vector up = g;
    up.tail(up.size() - plus_start).setZero();
    Vector zp = x;
    zp.head(plus_start).setZero();
    Vector gp = g;
    gp.head(plus_start).setZero();
    const double nzp = zp.norm();
    if (nzp > 0) {
      zp /= nzp;
      const double c = zp.dot(g);
      up += c * zp;
      gp -= c * zp;
    }
    x += h * (up - gp);
  }

  SeedOutcome out;
  const int q = 2 * n * m + 2 * n + 1;
  for (int it = 0; it <= opts.max_newton; ++it) {
    const FourierLoop z = loop_of(x);
    const Vector g = F.gradient(z).to_orthonormal();
    out.residual = g.norm();
    out.steps = it;
    if (!std::isfinite(out.residual)) {
      out.reason = "non-finite gradient";
      break;
    }
    if (out.residual <= opts.tol) {
      out.converged = true;
      break;
    }
    if (it == opts.max_newton) {
      out.reason = "Newton step limit reached";
      break;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(F.hessian(z));
    const Vector& lam = es.eigenvalues();
    const Vector gc = es.eigenvectors().transpose() * g;
    Vector sc = Vector::Zero(gc.size());
    for (Eigen::Index i = 0; i < gc.size(); ++i) {
      if (std::abs(lam[i]) < 1e-10) continue;
      sc[i] = (i < q ? 1.0 : -1.0) * gc[i] / std::abs(lam[i]);
    }
    Vector step = es.eigenvectors() * sc;
    if (opts.deflation && !known.empty()) {
      // eta = prod (1/|x - x_i|^2 + 1); scale by 1 / (1 - grad(eta).step / eta)
      double dlog = 0.0;
      for (const Vector& xi : known) {
        const Vector diff = x - xi;
        const double r2 = diff.squaredNorm();
        if (r2 == 0.0) continue;
        dlog += (-2.0 * diff.dot(step) / (r2 * r2)) / (1.0 / r2 + 1.0);
      }
      const double denom = 1.0 - dlog;
      if (std::abs(denom) > 1e-12) step /= denom;
    }
    const double len = step.norm();
    if (len > opts.trust_radius) step *= opts.trust_radius / len;
    x += step;
  }
  out.loop = loop_of(x);
  out.value = F.value(out.loop);
  return out;
}

inline double oscillation(const FourierLoop& z, const Quadrature& q) {
  const Matrix v = evaluate_on_grid(z, q);
  const Vector mean = v.rowwise().mean();
  return (v.colwise() - mean).colwise().norm().maxCoeff();
}

inline double sup_norm(const FourierLoop& z, const Quadrature& q) { return evaluate_on_grid(z, q).colwise().norm().maxCoeff(); }

// RK4 for z' = J H'(t, z) from z(0); max deviation from the spectral loop on the grid.
inline double reintegration_error(const ActionFunctional& F, const FourierLoop& z) {
  const Quadrature& q = F.quadrature();
  const Matrix ref = evaluate_on_grid(z, q);
  const Matrix J = standard_J(F.n());
  const int sub = 16;
  const double h = q.step() / sub;
  const HamiltonianModel& H = F.model();
  auto rhs = [&](double t, const Vector& y) { return Vector(J * H.gradient(t, y)); };
  Vector y = ref.col(0);
  double err = 0.0;
  double t = 0.0;
  for (int j = 1; j <= q.points(); ++j) {
    for (int s = 0; s < sub; ++s) {
      const Vector k1 = rhs(t, y);
      const Vector k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
      const Vector k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
      const Vector k4 = rhs(t + h, y + h * k3);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += h;
    }
    if (!y.allFinite()) return std::numeric_limits<double>::infinity();
    const Vector& target = j == q.points() ? ref.col(0) : ref.col(j);
    err = std::max(err, (y - target).norm());
  }
  return err;
}

}  // namespace detail

/// Morse data, Maslov pair of the linearisation (stabilised over m, 2m, 4m),
/// monodromy nullity and the re-integration cross-check for a critical point.
inline void certify(const ActionFunctional& F, SaddleResult& r, const SolverOptions& opts) {
  IndexOptions iopts;
  iopts.zero_tol_rel = opts.zero_tol_rel;
  iopts.m_schedule = {F.m(), 2 * F.m(), 4 * F.m()};
  const MorseData md = action_hessian_spectrum(F, r.loop, iopts);
  r.morse_index = md.morse_index;
  r.morse_nullity = md.nullity;
  r.half_dimension = F.n() * (2 * F.m() + 1);
  const SmoothMatrixFunction B = F.linearization(r.loop);
  GalerkinIndex gi = index_pair_galerkin(B, iopts);
  FundamentalSolutionOptions fo;
  fo.steps = opts.monodromy_steps;
  fo.tol_sp = 1e-6;
  const SymplecticPath gamma = fundamental_solution(B, fo);
  r.monodromy_nullity = nullity_from_monodromy(gamma, opts.rank_tol * std::max(1.0, gamma.end().norm()));
  if (opts.monodromy_tiebreak) reconcile_with_monodromy(gi, r.monodromy_nullity);
  r.maslov = gi.pair;
  r.maslov_stabilized_m = gi.stabilized_m;
  for (auto& w : gi.warnings) r.warnings.push_back(std::move(w));
  r.reintegration_error = detail::reintegration_error(F, r.loop);
  r.cerami = (1.0 + norm(r.loop)) * r.residual;
}

/// Two-phase search from every seed: split gradient predictor, then Newton
/// with eigen-partitioned ascent/descent, trust region and deflation against
/// solutions already accepted. Seeds run in waves of opts.wave_size; the merge
/// follows seed order, so results do not depend on thread timing.
inline SaddleSearch find_saddle(const ActionFunctional& F, const std::vector<FourierLoop>& seeds, const AcceptanceWindow& window,
                                const SolverOptions& opts, std::vector<FourierLoop> deflate = {}) {
  if (seeds.empty()) throw InputError("find_saddle: no seeds");
  SaddleSearch out;
  const int wave = std::max(1, opts.wave_size);
  std::vector<FourierLoop> accepted = std::move(deflate);
  for (std::size_t start = 0; start < seeds.size(); start += static_cast<std::size_t>(wave)) {
    const std::size_t stop = std::min(seeds.size(), start + static_cast<std::size_t>(wave));
    std::vector<std::future<detail::SeedOutcome>> jobs;
    for (std::size_t s = start; s < stop; ++s)
      jobs.push_back(std::async(std::launch::async, [&F, &opts, seed = seeds[s], snapshot = accepted]() {
        return detail::run_seed(F, seed, snapshot, opts);
      }));
    for (std::size_t s = start; s < stop; ++s) {
      detail::SeedOutcome o = jobs[s - start].get();
      SeedDiagnostic diag{static_cast<int>(s), o.residual, o.value, o.steps, o.reason};
      auto reject = [&](std::string why) {
        diag.reason = std::move(why);
        out.diagnostics.push_back(diag);
      };
      if (!o.converged) { reject(o.reason.empty() ? "not converged" : o.reason); continue; }
      const double osc = detail::oscillation(o.loop, F.quadrature());
      const double sup = detail::sup_norm(o.loop, F.quadrature());
      if (osc < opts.nonconst_tol * (1.0 + norm(o.loop))) { reject("constant critical point"); continue; }
      if (o.value < window.lo || o.value > window.hi) { reject("value outside the linking window"); continue; }
      if (sup > window.sup_bound) { reject("sup |z| exceeds the cut-off radius"); continue; }
      bool dup = false;
      for (const auto& z : accepted) {
        const double dist = F.model().autonomous() ? shift_distance(o.loop, z) : norm(o.loop - z);
        if (dist <= opts.dedupe) dup = true;
      }
      if (dup) { reject("duplicate of an accepted solution"); continue; }
      SaddleResult r;
      r.loop = o.loop;
      r.value = o.value;
      r.residual = o.residual;
      r.period = F.period();
      r.sup_norm = sup;
      r.oscillation = osc;
      r.newton_steps = o.steps;
      r.seed_index = static_cast<int>(s);
      certify(F, r, opts);
      accepted.push_back(o.loop);
      out.results.push_back(std::move(r));
      diag.reason = "accepted";
      out.diagnostics.push_back(diag);
    }
  }
  return out;
}

/// Seeds at the maximum of f along rays s d, d in E_1 cap E^+: the coordinate
/// directions first, then seeded random ones.
inline std::vector<FourierLoop> default_seeds(const ActionFunctional& F, int count, std::uint64_t seed) {
  const int n = F.n();
  sampling::Rng rng(seed);
  std::vector<FourierLoop> out;
  for (int c = 0; c < count; ++c) {
    const Vector dir = c < 2 * n ? Vector(Vector::Unit(2 * n, c)) : sampling::unit_sphere(rng, 2 * n);
    const FourierLoop e = unit_mode_one(n, F.m(), F.period(), dir);
    auto f = [&](double s) { return F.value(s * e); };
    double best_s = 0.0;
    double best = 0.0;
    double prev_s = 0.0;
    double next_s = 0.0;
    double s = 1e-3;
    for (; s < 1e4; s *= 1.2) {
      const double v = f(s);
      if (v > best) {
        best = v;
        prev_s = best_s > 0 ? best_s : s / 1.2;
        best_s = s;
        next_s = s * 1.2;
      }
      if (v < 0.0 && best > 0.0) break;
    }
    if (best_s == 0.0) {
      out.push_back(e);
      continue;
    }
    double a = prev_s;
    double b = next_s;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 60; ++it) {
      const double c1 = b - gr * (b - a);
      const double c2 = a + gr * (b - a);
      if (f(c1) > f(c2)) b = c2;
      else a = c1;
    }
    out.push_back((0.5 * (a + b)) * e);
  }
  return out;
}

struct PeriodicSolve {
  double period = 0.0;
  int k = 1;
  std::optional<LinkingGeometry> geometry;
  std::optional<CutoffInfo> cutoff;
  SaddleSearch search;
  std::vector<std::string> notes;
};

/// Full pipeline at period T = k tau on the cut-off H_K, escalating K until a
/// solution with sup |z| <= K is accepted.
inline PeriodicSolve solve_periodic(const HamiltonianModel& model, int k, const SolverOptions& opts) {
  if (k < 1) throw InputError("solve_periodic: k must be >= 1");
  if (!model.growth()) throw InputError("solve_periodic: model '" + model.name() + "' has no growth profile");
  const GrowthProfile& g = *model.growth();
  const double T = k * model.period();
  const ScalingProfile profile(g.sigma, g.tau_exp);
  PeriodicSolve out;
  out.period = T;
  out.k = k;
  const FourierLoop e = unit_mode_one(model.n(), opts.m, T, Vector::Unit(2 * model.n(), 0));
  const double eps1 = estimate_eps1(model.n(), T, e, opts.geometry);
  const double A1 = compute_A1(T, model.n(), eps1, g);
  for (double K : opts.K_schedule) {
    auto [HK, info] = cutoff(model, K, opts.lambda0, A1);
    const ActionFunctional F(HK, opts.m, T, opts.quadrature_points);
    const double A2 = estimate_A2(HK, A1, 4.0 * (K + 1.0));
    LinkingGeometry G = build_linking_geometry(F, profile, eps1, A1, A2, opts.geometry);
    const auto seeds = default_seeds(F, opts.seed_count, opts.seed);
    SaddleSearch search = find_saddle(F, seeds, AcceptanceWindow::from(G, opts.value_slack, K), opts);
    for (auto& r : search.results) {
      r.k = k;
      r.cutoff_K = K;
    }
    out.geometry = G;
    out.cutoff = info;
    out.search = std::move(search);
    if (!out.search.results.empty()) return out;
    out.notes.push_back("no solution accepted at K = " + std::to_string(K));
  }
  return out;
}

struct ScanEntry {
  int k = 1;
  bool skipped = false;
  std::string reason;
  PeriodicSolve solve;
};

/// Solutions at periods k tau for each k; for models with a quadratic term
/// only k < 2 pi / (omega tau) are admissible.
inline std::vector<ScanEntry> subharmonic_scan(const HamiltonianModel& model, const std::vector<int>& k_list,
                                               const SolverOptions& opts) {
  if (k_list.empty()) throw InputError("subharmonic_scan: k_list is empty");
  std::vector<ScanEntry> out;
  for (int k : k_list) {
    if (k < 1) throw InputError("subharmonic_scan: k must be >= 1");
    ScanEntry entry;
    entry.k = k;
    if (model.omega() > 0.0 && !(k < kTwoPi / (model.omega() * model.period()))) {
      entry.skipped = true;
      entry.reason = "k >= 2 pi / (omega tau)";
      out.push_back(std::move(entry));
      continue;
    }
    entry.solve = solve_periodic(model, k, opts);
    out.push_back(std::move(entry));
  }
  return out;
}

struct DistinctnessVerdict {
  bool index_certified = false;
  std::string index_reason;
  double shift_gap = 0.0;
  int best_shift = 0;
  bool direct_distinct = false;
};

/// z_k against z_pk: the index route (p > 2n + 1 with both windows, or both
/// nondegenerate with i = n + 1 and p > 1) and the direct minimum over integer
/// shifts j tau of the distance between j * z_k (repeated p times) and z_pk.
inline DistinctnessVerdict distinctness_check(const SaddleResult& zk, const SaddleResult& zpk, int p, int n,
                                              double gap_tol = 1e-3) {
  if (p < 1) throw InputError("distinctness_check: p must be >= 1");
  if (std::abs(zpk.period - p * zk.period) > 1e-9 * zpk.period)
    throw InputError("distinctness_check: z_pk period is not p times the z_k period");
  DistinctnessVerdict v;
  const bool windows = zk.window_ok() && zpk.window_ok();
  if (p > 2 * n + 1 && windows) {
    v.index_certified = true;
    v.index_reason = "certified distinct by index contradiction";
  } else if (p > 1 && zk.maslov.nu == 0 && zpk.maslov.nu == 0 && zk.maslov.i == n + 1 && zpk.maslov.i == n + 1) {
    v.index_certified = true;
    v.index_reason = "certified distinct: both nondegenerate";
  } else {
    v.index_reason = "not certified by index";
  }
  const double tau = zk.period / zk.k;
  FourierLoop a = zk.loop.repeated(p);
  FourierLoop b = zpk.loop;
  const int M = std::max(a.m(), b.m());
  a = a.resized(M);
  b = b.resized(M);
  const int shifts = p * zk.k;
  v.shift_gap = std::numeric_limits<double>::infinity();
  for (int j = 0; j < shifts; ++j) {
    const double d = norm(a.shifted(j * tau) - b);
    if (d < v.shift_gap) {
      v.shift_gap = d;
      v.best_shift = j;
    }
  }
  v.direct_distinct = v.shift_gap > gap_tol;
  return v;
}

struct MinimalPeriodVerdict {
  int divisor = 1;  ///< largest k with z(. + T/k) = z numerically
  double minimal_period = 0.0;
  double shift_defect = 0.0;  ///< relative defect ||z(. + T/2) - z|| / ||z|| (1 when k = 1 and T/2 fails)
  std::map<int, IndexPair> pairs;
  MinimalPeriodCertificate certificate;
  bool h7_holds = false;
  bool consistent = false;  ///< both routes give the full period T
  std::string note;
};

/// Numerical route plus the index certificate built on the base period T / divisor.
inline MinimalPeriodVerdict minimal_period_check(const SaddleResult& res, const HamiltonianModel& model, double tol = 1e-6,
                                                 const SamplingSpec& h7_samples = {}) {
  if (!model.autonomous()) throw InapplicableError("minimal_period_check: the model is not autonomous");
  MinimalPeriodVerdict v;
  const FourierLoop& z = res.loop;
  const double T = z.period();
  const double nz = norm(z);
  if (nz == 0.0) throw InputError("minimal_period_check: zero loop");
  v.shift_defect = std::numeric_limits<double>::infinity();
  for (int k = 2; k <= std::max(2, z.m()); ++k) {
    const double rel = norm(z.shifted(T / k) - z) / nz;
    if (k == 2) v.shift_defect = rel;
    if (rel <= tol) v.divisor = k;
  }
  v.minimal_period = T / v.divisor;

  const HypothesisReport h7 = check_hypotheses(model, {"H7"}, h7_samples);
  v.h7_holds = h7.all_passed();

  const int k0 = v.divisor;
  const int n = model.n();
  HamiltonianModel H = model;
  const FourierLoop zc = z;
  const SmoothMatrixFunction base(n, T / k0, [H, zc](double t) {
    const Matrix B = H.hessian(t, evaluate_at(zc, t));
    return Matrix(0.5 * (B + B.transpose()));
  });
  IndexOptions iopts;
  const int mb = std::max(16, z.m() / k0);
  iopts.m_schedule = {mb, 2 * mb, 4 * mb};
  for (int j = 1; j <= k0; ++j) v.pairs[j] = index_pair_iterated(base, j, iopts).pair;
  v.certificate = minimal_period_certificate(v.pairs, n);
  v.consistent = v.divisor == 1 && v.certificate.certified_k == 1;
  if (!v.h7_holds) v.note = "(H7) not confirmed on samples; the index route is not authoritative";
  else if (v.certificate.contradiction) v.note = "index certificate met by some k > 1: numerical contradiction";
  else if (v.divisor > 1) v.note = "loop is numerically T/" + std::to_string(v.divisor) + "-periodic";
  return v;
}

}  // namespace linkorbit
