#pragma once

// Oracles and seeded generators shared by the unit and acceptance suites.

#include <cmath>
#include <vector>

#include "linkorbit/linkorbit.hpp"

namespace linkorbit::testkit {

/// (i, nu) of B = b I at period T by counting the modewise Galerkin
/// eigenvalues (2 pi / T) sign(j) - b / max(|j|, 1) over |j| <= m.
inline IndexPair constant_oracle(double b, int n, double T, int m = 512) {
  int neg = 0;
  int zero = 0;
  const double tol = 1e-9;
  for (int j = -m; j <= m; ++j) {
    const double lam = j == 0 ? -b : kTwoPi / T * (j > 0 ? 1.0 : -1.0) - b / std::abs(j);
    if (std::abs(lam) <= tol) zero += 2 * n;
    else if (lam < 0) neg += 2 * n;
  }
  return {neg - n * (2 * m + 1), zero, T, n};
}

inline Matrix random_symmetric(sampling::Rng& rng, int d, double scale) {
  Matrix A(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) A(r, c) = sampling::uniform(rng, -1.0, 1.0);
  return scale * 0.5 * (A + A.transpose());
}

/// Exactly symplectic P = [[I, A], [0, I]] [[I, 0], [C, I]] with A, C symmetric.
inline Matrix random_symplectic(sampling::Rng& rng, int n, double scale) {
  Matrix U = Matrix::Identity(2 * n, 2 * n);
  Matrix L = Matrix::Identity(2 * n, 2 * n);
  U.topRightCorner(n, n) = random_symmetric(rng, n, scale);
  L.bottomLeftCorner(n, n) = random_symmetric(rng, n, scale);
  return U * L;
}

/// B(t) = S0 + S1 cos(2 pi t / tau) + S2 sin(2 pi t / tau).
inline SmoothMatrixFunction random_trig_path(sampling::Rng& rng, int n, double tau) {
  const Matrix S0 = random_symmetric(rng, 2 * n, 1.2);
  const Matrix S1 = random_symmetric(rng, 2 * n, 0.6);
  const Matrix S2 = random_symmetric(rng, 2 * n, 0.6);
  return {n, tau, [=](double t) {
            const double w = kTwoPi * t / tau;
            return Matrix(S0 + S1 * std::cos(w) + S2 * std::sin(w));
          }};
}

/// P^T rho(t) diag(b, b) P with mean(rho) = 1: gamma(tau) is conjugate to
/// exp(tau J diag(b, b)), so the nullity is 2 #{i : b_i tau in 2 pi Z}.
/// Some b_i are put on resonance on purpose.
struct ResonantPath {
  SmoothMatrixFunction B;
  int expected_nullity;
};

inline ResonantPath random_resonant_path(sampling::Rng& rng, int n, double tau) {
  Vector b(n);
  int nullity = 0;
  for (int i = 0; i < n; ++i) {
    if (sampling::uniform(rng, 0.0, 1.0) < 0.5) {
      const int j = 1 + static_cast<int>(sampling::uniform(rng, 0.0, 2.0));
      b[i] = kTwoPi * j / tau;
      nullity += 2;
    } else {
      b[i] = kTwoPi / tau * (0.2 + 0.6 * sampling::uniform(rng, 0.0, 1.0) + static_cast<int>(sampling::uniform(rng, 0.0, 2.0)));
    }
  }
  Vector d(2 * n);
  d << b, b;
  const Matrix P = random_symplectic(rng, n, 0.5);
  const Matrix S = P.transpose() * d.asDiagonal() * P;
  const double eps = sampling::uniform(rng, -0.5, 0.5);
  const double phase = sampling::uniform(rng, 0.0, kTwoPi);
  return {SmoothMatrixFunction(n, tau, [=](double t) { return Matrix((1.0 + eps * std::cos(kTwoPi * t / tau + phase)) * S); }),
          nullity};
}

/// Positive definite B(t) = S(t)^T S(t) + c I.
inline SmoothMatrixFunction random_positive_path(sampling::Rng& rng, int n, double tau) {
  const Matrix A0 = random_symmetric(rng, 2 * n, 0.8);
  const Matrix A1 = random_symmetric(rng, 2 * n, 0.4);
  const double c = sampling::uniform(rng, 0.05, 0.5);
  return {n, tau, [=](double t) {
            const Matrix S = A0 + A1 * std::sin(kTwoPi * t / tau);
            return Matrix(S.transpose() * S + c * Matrix::Identity(2 * n, 2 * n));
          }};
}

inline FourierLoop random_loop(sampling::Rng& rng, int n, int m, double T, double scale = 1.0) {
  Matrix c(2 * n, 2 * m + 1);
  for (int k = -m; k <= m; ++k)
    c.col(k + m) = scale * sampling::gaussian_vector(rng, 2 * n) / (1.0 + k * k);
  return {n, m, T, std::move(c)};
}

}  // namespace linkorbit::testkit
