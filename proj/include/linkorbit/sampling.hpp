#pragma once

// Seeded random and quasi-random sample generation shared by the checkers,
// the linking seed construction and the property tests.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace linkorbit::sampling {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 20131029;

inline Eigen::VectorXd gaussian_vector(Rng& rng, Eigen::Index dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal(rng);
  return v;
}

/// Uniformly distributed point on the unit sphere of R^dim.
inline Eigen::VectorXd unit_sphere(Rng& rng, Eigen::Index dim) {
  Eigen::VectorXd v = gaussian_vector(rng, dim);
  double nrm = v.norm();
  while (nrm < 1e-12) {
    v = gaussian_vector(rng, dim);
    nrm = v.norm();
  }
  return v / nrm;
}

inline double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng);
}

/// Radical inverse in the given prime base (van der Corput).
inline double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

/// i-th point of the Halton sequence in [0,1)^dim (dim <= 16).
inline std::vector<double> halton(std::uint64_t index, int dim) {
  static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (int d = 0; d < dim; ++d) x[static_cast<std::size_t>(d)] = radical_inverse(index + 1, primes[d]);
  return x;
}

/// Quasi-random point on the unit sphere of R^dim built from Halton
/// coordinates through Box-Muller pairs. dim <= 8.
inline Eigen::VectorXd halton_sphere(std::uint64_t index, int dim) {
  const int pairs = (dim + 1) / 2;
  auto h = halton(index, 2 * pairs);
  Eigen::VectorXd v(dim);
  for (int p = 0; p < pairs; ++p) {
    double u1 = std::max(h[2 * p], 1e-12);
    double u2 = h[2 * p + 1];
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    v[2 * p] = r * std::cos(a);
    if (2 * p + 1 < dim) v[2 * p + 1] = r * std::sin(a);
  }
  double nrm = v.norm();
  if (nrm < 1e-12) {
    v.setZero();
    v[0] = 1.0;
    return v;
  }
  return v / nrm;
}

/// Radii 10^lo, 10^(lo+1), ..., 10^hi.
inline std::vector<double> decade_ladder(int lo, int hi) {
  std::vector<double> r;
  for (int j = lo; j <= hi; ++j) r.push_back(std::pow(10.0, j));
  return r;
}

}  // namespace linkorbit::sampling
