#pragma once

// Maslov-type index pairs (i, nu) of tau-periodic symmetric matrix paths.
//
// Two engines are provided:
//  * Galerkin: the quadratic form of P_m (A - B) P_m on E_m is assembled in the
//    orthonormal Fourier frame and its eigenvalues are counted,
//      dim M^-_d = n(2m+1) + i,   dim M^0_d = nu,   dim M^+_d = n(2m+1) - i - nu.
//  * Monodromy: nu = dim ker(gamma(tau) - I) by singular value thresholding.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "linkorbit/errors.hpp"
#include "linkorbit/loopspace.hpp"
#include "linkorbit/symplectic.hpp"

namespace linkorbit {

struct IndexPair {
  int i = 0;
  int nu = 0;
  double period = 0.0;
  int n = 1;

  IndexPair() = default;
  IndexPair(int i_, int nu_, double period_, int n_) : i(i_), nu(nu_), period(period_), n(n_) {
    if (n < 1) throw InputError("IndexPair: n must be >= 1");
    if (nu < 0 || nu > 2 * n)
      throw InputError("IndexPair: nullity " + std::to_string(nu) + " outside [0, 2n]");
  }

  friend bool operator==(const IndexPair& a, const IndexPair& b) { return a.i == b.i && a.nu == b.nu && a.n == b.n; }
};

struct GalerkinSpectrum {
  int m = 0;
  int dim_plus = 0;
  int dim_minus = 0;
  int dim_zero = 0;
  double d = 0.0;
  std::vector<double> eigenvalues;  // ascending
};

/// The two candidate pairs of an m-escalation that never settled.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, IndexPair previous, IndexPair last)
      : Error(what), previous_(previous), last_(last) {}
  const IndexPair& previous() const { return previous_; }
  const IndexPair& last() const { return last_; }

 private:
  IndexPair previous_;
  IndexPair last_;
};

struct IndexOptions {
  std::vector<int> m_schedule{16, 32, 64, 128, 256};
  /// eigenvalues with |lambda| <= zero_tol_rel * 2pi/T are treated as zero
  double zero_tol_rel = 1e-6;
  /// fixed gap d; adaptive when empty
  std::optional<double> gap;
  /// trapezoid points for smooth paths at order m; 0 selects max(8m, 256)
  int quadrature_points = 0;
};

/// C(f) = int_0^T B cos(2 pi f t / T) dt and S(f) = int_0^T B sin(...) dt for
/// f = 0..max_freq.
struct FourierMoments {
  int n = 1;
  double period = 0.0;
  std::vector<Matrix> cos;
  std::vector<Matrix> sin;

  int max_freq() const { return static_cast<int>(cos.size()) - 1; }

  Matrix C(int f) const { return cos.at(static_cast<std::size_t>(std::abs(f))); }
  Matrix S(int f) const {
    const Matrix& s = sin.at(static_cast<std::size_t>(std::abs(f)));
    return f < 0 ? Matrix(-s) : s;
  }
};

namespace detail {

// int_0^1 e^{ixs} ds and int_0^1 s e^{ixs} ds.
inline std::pair<std::complex<double>, std::complex<double>> segment_kernels(double x) {
  using cd = std::complex<double>;
  const cd ix(0.0, x);
  if (std::abs(x) < 0.5) {
    cd e0 = 0.0;
    cd e1 = 0.0;
    cd term = 1.0;  // (ix)^j / j!
    for (int j = 0; j < 30; ++j) {
      e0 += term / static_cast<double>(j + 1);
      e1 += term / static_cast<double>(j + 2);
      term *= ix / static_cast<double>(j + 1);
    }
    return {e0, e1};
  }
  const cd ex = std::exp(ix);
  const cd e0 = (ex - 1.0) / ix;
  const cd e1 = ex / ix + (ex - 1.0) / (x * x);
  return {e0, e1};
}

}  // namespace detail

/// Exact moments of the piecewise-linear interpolant of a sampled path.
inline FourierMoments moments_of(const MatrixPath& B, int max_freq) {
  FourierMoments mom;
  mom.n = B.n();
  mom.period = B.period();
  const int dim = 2 * B.n();
  mom.cos.assign(static_cast<std::size_t>(max_freq) + 1, Matrix::Zero(dim, dim));
  mom.sin.assign(static_cast<std::size_t>(max_freq) + 1, Matrix::Zero(dim, dim));
  const auto& ts = B.times();
  const auto& vs = B.values();
  for (std::size_t s = 1; s < ts.size(); ++s) {
    const double t0 = ts[s - 1];
    const double h = ts[s] - t0;
    const Matrix& B0 = vs[s - 1];
    const Matrix dB = vs[s] - vs[s - 1];
    for (int f = 0; f <= max_freq; ++f) {
      const double w = kTwoPi * f / B.period();
      const auto [e0, e1] = detail::segment_kernels(w * h);
      const std::complex<double> phase = std::polar(1.0, w * t0);
      const std::complex<double> i0 = h * phase * e0;
      const std::complex<double> i1 = h * phase * e1;  // int (t - t0)/h e^{iwt} dt
      mom.cos[static_cast<std::size_t>(f)] += i0.real() * B0 + i1.real() * dB;
      mom.sin[static_cast<std::size_t>(f)] += i0.imag() * B0 + i1.imag() * dB;
    }
  }
  return mom;
}

/// Trapezoidal moments from samples B(j T / N), j = 0..N-1.
inline FourierMoments moments_from_samples(const std::vector<Matrix>& samples, double period, int max_freq) {
  if (samples.empty()) throw InputError("moments_from_samples: need at least one sample");
  const int points = static_cast<int>(samples.size());
  FourierMoments mom;
  mom.n = half_dimension(samples.front(), "moments_from_samples");
  mom.period = period;
  const int dim = 2 * mom.n;
  mom.cos.assign(static_cast<std::size_t>(max_freq) + 1, Matrix::Zero(dim, dim));
  mom.sin.assign(static_cast<std::size_t>(max_freq) + 1, Matrix::Zero(dim, dim));
  const double dt = period / points;
  std::vector<double> c(static_cast<std::size_t>(points));
  std::vector<double> s(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) {
    c[static_cast<std::size_t>(j)] = dt * std::cos(kTwoPi * j / points);
    s[static_cast<std::size_t>(j)] = dt * std::sin(kTwoPi * j / points);
  }
  for (int j = 0; j < points; ++j) {
    const Matrix& Bj = samples[static_cast<std::size_t>(j)];
    for (int f = 0; f <= max_freq; ++f) {
      const auto r = static_cast<std::size_t>((static_cast<long long>(f) * j) % points);
      mom.cos[static_cast<std::size_t>(f)] += c[r] * Bj;
      mom.sin[static_cast<std::size_t>(f)] += s[r] * Bj;
    }
  }
  return mom;
}

/// Trapezoidal moments of a smooth periodic matrix function on `points` nodes.
template <PeriodicMatrixFunction F>
FourierMoments moments_of(const F& B, int max_freq, int points) {
  if (points < 1) throw InputError("moments_of: need at least one quadrature point");
  std::vector<Matrix> samples;
  samples.reserve(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) samples.emplace_back(B(B.period() * j / points));
  return moments_from_samples(samples, B.period(), max_freq);
}

/// Moments of the k-fold periodic extension: a frequency f at period kT is
/// k times the base moment at f/k when k divides f, and zero otherwise.
inline FourierMoments iterate_moments(const FourierMoments& base, int k, int max_freq) {
  if (k < 1) throw InputError("iterate_moments: k must be >= 1");
  if (max_freq / k > base.max_freq()) throw InputError("iterate_moments: base moments are too short");
  FourierMoments mom;
  mom.n = base.n;
  mom.period = k * base.period;
  const int dim = 2 * base.n;
  mom.cos.assign(static_cast<std::size_t>(max_freq) + 1, Matrix::Zero(dim, dim));
  mom.sin.assign(static_cast<std::size_t>(max_freq) + 1, Matrix::Zero(dim, dim));
  for (int f = 0; f <= max_freq; f += k) {
    mom.cos[static_cast<std::size_t>(f)] = k * base.cos[static_cast<std::size_t>(f / k)];
    mom.sin[static_cast<std::size_t>(f)] = k * base.sin[static_cast<std::size_t>(f / k)];
  }
  return mom;
}

/// Matrix of the quadratic form <(A - B) x, y> on E_m in the orthonormal
/// frame exp(theta_k J) e_c / sqrt(w_k); blocks ordered k = -m..m.
inline Matrix galerkin_matrix(const FourierMoments& mom, int m) {
  if (mom.max_freq() < 2 * m) throw InputError("galerkin_matrix: moments must reach frequency 2m");
  const int d = 2 * mom.n;
  const double T = mom.period;
  const Matrix J = standard_J(mom.n);
  const int blocks = 2 * m + 1;
  Matrix G = Matrix::Zero(static_cast<Eigen::Index>(blocks) * d, static_cast<Eigen::Index>(blocks) * d);
  auto weight = [T](int k) { return k == 0 ? T : T * std::abs(k); };
  for (int l = -m; l <= m; ++l) {
    for (int k = -m; k <= m; ++k) {
      const Matrix Cd = mom.C(k - l);
      const Matrix Cs = mom.C(k + l);
      const Matrix Sd = mom.S(k - l);
      const Matrix Ss = mom.S(k + l);
      // int exp(-theta_l J) B exp(theta_k J) dt
      const Matrix M = 0.5 * (Cd + Cs + (Ss + Sd) * J - J * (Ss - Sd) - J * (Cd - Cs) * J);
      G.block(static_cast<Eigen::Index>(l + m) * d, static_cast<Eigen::Index>(k + m) * d, d, d) =
          -M / std::sqrt(weight(k) * weight(l));
    }
    if (l != 0) {
      const double a = (kTwoPi / T) * (l > 0 ? 1.0 : -1.0);
      G.block(static_cast<Eigen::Index>(l + m) * d, static_cast<Eigen::Index>(l + m) * d, d, d).diagonal().array() += a;
    }
  }
  return 0.5 * (G + G.transpose());
}

/// Splits eigenvalues into (d, inf), (-inf, -d) and [-d, d]. With no fixed
/// gap, d is half the smallest |lambda| above the zero threshold, clamped to
/// [1e-10, 0.1 * 2pi/T].
inline GalerkinSpectrum classify_spectrum(std::vector<double> eigenvalues, int m, double period,
                                          const IndexOptions& opts) {
  std::sort(eigenvalues.begin(), eigenvalues.end());
  const double scale = kTwoPi / period;
  const double zero_tol = opts.zero_tol_rel * scale;
  double d = 0.0;
  if (opts.gap) {
    d = *opts.gap;
  } else {
    double smallest = std::numeric_limits<double>::infinity();
    for (double v : eigenvalues)
      if (std::abs(v) > zero_tol) smallest = std::min(smallest, std::abs(v));
    d = std::clamp(0.5 * smallest, 1e-10, 0.1 * scale);
    d = std::max(d, zero_tol);
  }
  GalerkinSpectrum spec;
  spec.m = m;
  spec.d = d;
  for (double v : eigenvalues) {
    if (v > d) ++spec.dim_plus;
    else if (v < -d) ++spec.dim_minus;
    else ++spec.dim_zero;
  }
  spec.eigenvalues = std::move(eigenvalues);
  return spec;
}

inline std::vector<double> symmetric_eigenvalues(const Matrix& G) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("eigenvalue solver did not converge");
  const Vector& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

inline GalerkinSpectrum galerkin_spectrum(const FourierMoments& mom, int m, const IndexOptions& opts = {}) {
  return classify_spectrum(symmetric_eigenvalues(galerkin_matrix(mom, m)), m, mom.period, opts);
}

/// i = dim M^- - dim(E_m)/2, nu = dim M^0.
inline IndexPair pair_from_spectrum(const GalerkinSpectrum& spec, int n, double period) {
  return IndexPair(spec.dim_minus - n * (2 * spec.m + 1), spec.dim_zero, period, n);
}

struct GalerkinIndex {
  IndexPair pair;
  GalerkinSpectrum spectrum;  ///< at the stabilised order
  int stabilized_m = 0;       ///< pair(m) == pair(2m) first held here
  std::vector<std::pair<int, IndexPair>> history;
  std::vector<std::string> warnings;
};

namespace detail {

inline FourierMoments moments_at(const MatrixPath& B, int k, int max_freq, const IndexOptions&, int) {
  return iterate_moments(moments_of(B, max_freq / k), k, max_freq);
}

template <PeriodicMatrixFunction F>
FourierMoments moments_at(const F& B, int k, int max_freq, const IndexOptions& opts, int m) {
  const int points = opts.quadrature_points > 0 ? opts.quadrature_points : Quadrature::default_points(m);
  // Base-period nodes: points/k per period keeps the kT grid at `points` nodes.
  const int base_points = std::max(1, (points + k - 1) / k);
  return iterate_moments(moments_of(B, max_freq / k, base_points), k, max_freq);
}

}  // namespace detail

/// Index pair of B regarded as (k tau)-periodic, escalating m along the
/// schedule until two consecutive orders agree.
template <class F>
GalerkinIndex index_pair_iterated(const F& B, int k, const IndexOptions& opts = {}) {
  if (k < 1) throw InputError("index_pair_iterated: k must be >= 1");
  if (opts.m_schedule.size() < 2) throw InputError("index_pair: the m schedule needs at least two levels");
  const double period = k * B.period();
  GalerkinIndex out;
  std::optional<GalerkinSpectrum> prev;
  for (int m : opts.m_schedule) {
    const FourierMoments mom = detail::moments_at(B, k, 2 * m, opts, m);
    GalerkinSpectrum spec = galerkin_spectrum(mom, m, opts);
    const IndexPair pair = pair_from_spectrum(spec, B.n(), period);
    if (!out.history.empty() && out.history.back().second == pair) {
      out.pair = pair;
      out.spectrum = std::move(*prev);
      out.stabilized_m = out.history.back().first;
      out.history.emplace_back(m, pair);
      return out;
    }
    out.history.emplace_back(m, pair);
    prev = std::move(spec);
  }
  const auto& h = out.history;
  throw InstabilityError("index pair did not stabilise up to m = " + std::to_string(h.back().first),
                         h[h.size() - 2].second, h.back().second);
}

template <class F>
GalerkinIndex index_pair_galerkin(const F& B, const IndexOptions& opts = {}) {
  return index_pair_iterated(B, 1, opts);
}

/// Number of singular values of gamma(tau) - I not exceeding rank_tol.
inline int nullity_from_monodromy(const SymplecticPath& gamma, double rank_tol) {
  const Matrix D = gamma.end() - Matrix::Identity(2 * gamma.n(), 2 * gamma.n());
  Eigen::JacobiSVD<Matrix> svd(D);
  const Vector& s = svd.singularValues();
  return static_cast<int>((s.array() <= rank_tol).count());
}

/// When the Galerkin nullity disagrees with the monodromy nullity, take the
/// `monodromy_nu` eigenvalues of smallest modulus as the kernel and recount.
inline void reconcile_with_monodromy(GalerkinIndex& result, int monodromy_nu) {
  if (result.pair.nu == monodromy_nu) return;
  GalerkinSpectrum& spec = result.spectrum;
  std::vector<double> mags;
  for (double v : spec.eigenvalues) mags.push_back(std::abs(v));
  std::vector<double> sorted = mags;
  std::sort(sorted.begin(), sorted.end());
  const double cut = monodromy_nu > 0 ? sorted[static_cast<std::size_t>(monodromy_nu - 1)] : -1.0;
  int minus = 0;
  int zero = 0;
  for (std::size_t j = 0; j < mags.size(); ++j) {
    if (mags[j] <= cut && zero < monodromy_nu) ++zero;
    else if (spec.eigenvalues[j] < 0) ++minus;
  }
  const int plus = static_cast<int>(mags.size()) - minus - zero;
  result.warnings.push_back("Galerkin nullity " + std::to_string(result.pair.nu) + " disagrees with monodromy nullity " +
                            std::to_string(monodromy_nu) + "; kernel reassigned to the smallest eigenvalues");
  spec.dim_minus = minus;
  spec.dim_zero = zero;
  spec.dim_plus = plus;
  result.pair = pair_from_spectrum(spec, result.pair.n, result.pair.period);
}

struct IterationBoundsReport {
  int k = 1;
  int loose_lo = 0;
  int loose_hi = 0;
  bool loose_ok = false;
  int sharp_lo = 0;
  int sharp_hi = 0;
  bool sharp_ok = false;
  bool ok() const { return loose_ok && sharp_ok; }
};

/// The two-sided iteration inequalities
///   loose: k(i + nu - n) - n <= i_k <= k(i + n) + n - nu_k
///   sharp: k(i + nu - n) + n - nu <= i_k <= k(i + n) - n - (nu_k - nu).
inline IterationBoundsReport check_iteration_bounds(const IndexPair& base, const IndexPair& iter, int k) {
  if (k < 1) throw InputError("check_iteration_bounds: k must be >= 1");
  if (base.n != iter.n) throw InputError("check_iteration_bounds: pairs have different n");
  if (std::abs(iter.period - k * base.period) > 1e-9 * std::max(1.0, iter.period))
    throw InputError("check_iteration_bounds: iterated period is not k times the base period");
  const int n = base.n;
  IterationBoundsReport r;
  r.k = k;
  r.loose_lo = k * (base.i + base.nu - n) - n;
  r.loose_hi = k * (base.i + n) + n - iter.nu;
  r.loose_ok = r.loose_lo <= iter.i && iter.i <= r.loose_hi;
  r.sharp_lo = k * (base.i + base.nu - n) + n - base.nu;
  r.sharp_hi = k * (base.i + n) - n - (iter.nu - base.nu);
  r.sharp_ok = r.sharp_lo <= iter.i && iter.i <= r.sharp_hi;
  return r;
}

enum class PositivityStatus { holds, fails, hypothesis_violated };

struct PositivityReport {
  PositivityStatus status = PositivityStatus::hypothesis_violated;
  double min_eigenvalue = 0.0;      ///< smallest eigenvalue over all samples
  double max_min_eigenvalue = 0.0;  ///< best sample's smallest eigenvalue
  bool holds() const { return status == PositivityStatus::holds; }
};

namespace detail {
inline std::vector<Matrix> positivity_samples(const MatrixPath& B) { return B.values(); }

template <PeriodicMatrixFunction F>
std::vector<Matrix> positivity_samples(const F& B) {
  std::vector<Matrix> out;
  constexpr int points = 512;
  for (int j = 0; j < points; ++j) out.push_back(B(B.period() * j / points));
  return out;
}
}  // namespace detail

/// If B(t) >= 0 everywhere and > 0 somewhere then i_tau(B) >= n. Samples
/// decide the hypothesis; eigenvalues within `tol` of zero count as zero.
template <class F>
PositivityReport check_positivity_lower_bound(const F& B, const IndexPair& pair, double tol = 1e-12) {
  PositivityReport r;
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  r.max_min_eigenvalue = -std::numeric_limits<double>::infinity();
  for (const Matrix& S : detail::positivity_samples(B)) {
    const double lo = symmetric_eigenvalues(S).front();
    r.min_eigenvalue = std::min(r.min_eigenvalue, lo);
    r.max_min_eigenvalue = std::max(r.max_min_eigenvalue, lo);
  }
  if (r.min_eigenvalue < -tol || r.max_min_eigenvalue <= tol) {
    r.status = PositivityStatus::hypothesis_violated;
    return r;
  }
  r.status = pair.i >= pair.n ? PositivityStatus::holds : PositivityStatus::fails;
  return r;
}

struct MinimalPeriodCertificate {
  int certified_k = 0;         ///< largest k meeting all three hypotheses, 0 if none
  bool contradiction = false;  ///< some k > 1 met them
  std::vector<int> qualifying;
};

/// pairs[k] is the index pair at period k tau, pairs[1] the base. The
/// hypotheses i_{k tau} <= n + 1, i_tau >= n, nu_tau >= 1 force k = 1.
inline MinimalPeriodCertificate minimal_period_certificate(const std::map<int, IndexPair>& pairs, int n) {
  if (pairs.empty()) throw InputError("minimal_period_certificate: no index pairs given");
  const auto base = pairs.find(1);
  if (base == pairs.end()) throw InputError("minimal_period_certificate: the base pair (k = 1) is missing");
  MinimalPeriodCertificate c;
  const bool base_ok = base->second.i >= n && base->second.nu >= 1;
  for (const auto& [k, pair] : pairs) {
    if (k < 1) throw InputError("minimal_period_certificate: k must be >= 1");
    if (base_ok && pair.i <= n + 1) {
      c.qualifying.push_back(k);
      c.certified_k = std::max(c.certified_k, k);
    }
  }
  c.contradiction = c.certified_k > 1;
  return c;
}

}  // namespace linkorbit
