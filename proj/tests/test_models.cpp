// hamiltonians and solver.

#include <gtest/gtest.h>

#include "support.hpp"

using namespace linkorbit;

namespace {

HamiltonianModel example11() { return example_anisotropic(1, Vector::Ones(1), Vector::Ones(1)); }

HamiltonianModel example_n2() {
  Vector s(2), t(2);
  s << 1.0, 2.0;
  t << 1.5, 1.0;
  return example_anisotropic(2, s, t);
}

// c I: positive, so the sum with a superquadratic model stays nonnegative near 0.
QuadraticTerm scalar_term(double c, double period = kTwoPi) {
  return QuadraticTerm(MatrixPath::constant(c * Matrix::Identity(2, 2), period));
}

QuadraticTerm antidiagonal_term(double c, double period = kTwoPi) {
  Matrix B = Matrix::Zero(2, 2);
  B(0, 1) = B(1, 0) = c;
  return QuadraticTerm(MatrixPath::constant(B, period));
}

std::vector<std::pair<std::string, HamiltonianModel>> builtin_models() {
  std::vector<std::pair<std::string, HamiltonianModel>> out{
      {"example11", example11()},
      {"example_n2", example_n2()},
      {"half_norm", half_norm_squared(2)},
      {"zero", zero_model(1)},
  };
  sampling::Rng rng(77);
  const auto fn = testkit::random_positive_path(rng, 1, kTwoPi);
  out.emplace_back("quadratic", quadratic_model(QuadraticTerm(MatrixPath::sample(fn, kTwoPi, 64))));
  out.emplace_back("example+quadratic", with_quadratic_term(example11(), scalar_term(0.2)));
  out.emplace_back("cutoff", cutoff(example11(), 2.0).first);
  return out;
}

// Relative FD error with a floor of 1 on the scale.
double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

// --- hamiltonians -----------------------------------------------------------

TEST(Hamiltonians, ExampleValues) {
  const auto H = example11();
  Vector z(2);
  z << 1.0, 1.0;
  EXPECT_NEAR(H.value(0.0, z), 2.0 * std::log(2.0), 1e-12);
  EXPECT_EQ(H.value(0.0, Vector::Zero(2)), 0.0);
  EXPECT_TRUE(H.gradient(0.0, Vector::Zero(2)).isZero(0));
  EXPECT_TRUE(H.autonomous());
  EXPECT_THROW(H.value(0.0, Vector::Zero(3)), DimensionError);
}

TEST(Hamiltonians, ExampleCalibratedConstantsFrozen) {
  const auto& g = *example11().growth();
  EXPECT_NEAR(g.c1, 0.490196, 1e-5);
  EXPECT_NEAR(g.c2, 6.386236, 1e-5);
  EXPECT_DOUBLE_EQ(g.beta, 2.0);
  EXPECT_DOUBLE_EQ(g.lambda, 2.0);
  EXPECT_NEAR(g.gamma(), 1.0, 1e-9);
}

TEST(Hamiltonians, GradientAndHessianMatchFiniteDifferences) {
  const double h = 1e-5;
  for (const auto& [name, H] : builtin_models()) {
    sampling::Rng rng(101);
    const int d = 2 * H.n();
    double worst_g = 0.0, worst_h = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const double r = std::pow(10.0, sampling::uniform(rng, -1.0, name == "cutoff" ? 0.5 : 1.0));
      const Vector z = r * sampling::unit_sphere(rng, d);
      const double t = sampling::uniform(rng, 0.0, H.period());
      const Vector g = H.gradient(t, z);
      const Matrix Hs = H.hessian(t, z);
      const double scale_g = std::max(1.0, g.norm());
      const double scale_h = std::max(1.0, Hs.norm());
      for (int i = 0; i < d; ++i) {
        const Vector e = h * Vector::Unit(d, i);
        const double fd = (H.value(t, z + e) - H.value(t, z - e)) / (2 * h);
        worst_g = std::max(worst_g, std::abs(fd - g[i]) / scale_g);
        const Vector fdh = (H.gradient(t, z + e) - H.gradient(t, z - e)) / (2 * h);
        worst_h = std::max(worst_h, (fdh - Hs.col(i)).norm() / scale_h);
      }
      EXPECT_LT((Hs - Hs.transpose()).norm(), 1e-12 * scale_h) << name;
    }
    EXPECT_LE(worst_g, 1e-6) << name;
    EXPECT_LE(worst_h, 1e-6) << name;
  }
}

TEST(Hamiltonians, PeriodicityAndNonnegativity) {
  for (const auto& [name, H] : builtin_models()) {
    sampling::Rng rng(5);
    for (int s = 0; s < 50; ++s) {
      const Vector z = 3.0 * sampling::gaussian_vector(rng, 2 * H.n());
      const double t = sampling::uniform(rng, 0.0, H.period());
      EXPECT_GE(H.value(t, z), 0.0) << name;
      EXPECT_NEAR(H.value(t + H.period(), z), H.value(t, z), 1e-9 * (1 + H.value(t, z))) << name;
    }
  }
}

TEST(Hamiltonians, ExampleHypothesesPass) {
  const auto rep = check_hypotheses(example11(), {"H1", "H2", "H3", "H3'", "H4", "H5", "H7"});
  for (const auto& r : rep.results) EXPECT_TRUE(passed(r.verdict)) << r.name << ": " << r.detail;
  EXPECT_TRUE(rep.all_passed());
  const auto rep2 = check_hypotheses(example_n2(), {"H1", "H2", "H3", "H4", "H5"});
  for (const auto& r : rep2.results) EXPECT_TRUE(passed(r.verdict)) << r.name << ": " << r.detail;
}

TEST(Hamiltonians, HalfNormFailsLimitHypotheses) {
  const auto rep = check_hypotheses(half_norm_squared(1), {"H1", "H4", "H5"});
  EXPECT_EQ(rep.find("H1")->verdict, Verdict::holds);
  EXPECT_EQ(rep.find("H5")->verdict, Verdict::inconsistent);
  EXPECT_EQ(rep.find("H4")->verdict, Verdict::inconsistent);
  EXPECT_FALSE(rep.all_passed());
}

TEST(Hamiltonians, UnknownHypothesisRejected) { EXPECT_THROW(check_hypotheses(example11(), {"H9"}), InputError); }

TEST(Hamiltonians, H2QuantityGrowsLikeBeta) {
  // H'.V1(z) - H on the radius ladder: fitted exponent at large radius >= beta - 0.1
  const auto H = example11();
  const auto& g = *H.growth();
  auto q = [&](double r) {
    Vector z(2);
    z << r / std::sqrt(2.0), r / std::sqrt(2.0);
    const Vector grad = H.gradient(0.0, z);
    Vector vz(2);
    vz << g.alpha[0] * z[0], g.beta_w[0] * z[1];
    return grad.dot(vz) - H.value(0.0, z);
  };
  const double slope = (std::log(q(1e4)) - std::log(q(1e2))) / (std::log(1e4) - std::log(1e2));
  EXPECT_GE(slope, g.beta - 0.1);
}

TEST(Hamiltonians, WithQuadraticTerm) {
  const auto H = example11();
  const auto same = with_quadratic_term(H, QuadraticTerm(MatrixPath::constant(Matrix::Zero(2, 2), kTwoPi)));
  sampling::Rng rng(3);
  for (int s = 0; s < 10; ++s) {
    const Vector z = sampling::gaussian_vector(rng, 2);
    EXPECT_EQ(same.value(0.0, z), H.value(0.0, z));
  }
  EXPECT_EQ(same.name(), H.name());
  const auto plus = with_quadratic_term(H, scalar_term(0.3));
  EXPECT_NEAR(plus.omega(), 0.3, 1e-14);
  try {
    with_quadratic_term(H, scalar_term(-50.0));
    FAIL() << "expected a negativity witness";
  } catch (const NegativityError& e) {
    EXPECT_LT(e.witness().lhs, 0.0);
    EXPECT_EQ(e.witness().z.size(), 2);
  }
}

TEST(Hamiltonians, CutoffRegions) {
  const auto H = example11();
  const double K = 3.0;
  const auto [HK, info] = cutoff(H, K);
  EXPECT_DOUBLE_EQ(info.lambda0, 2.0);
  EXPECT_GE(info.C_K, info.shell_max);
  EXPECT_GE(info.C_K, info.c1_term);
  sampling::Rng rng(9);
  for (int s = 0; s < 50; ++s) {
    const Vector u = sampling::unit_sphere(rng, 2);
    const Vector in = sampling::uniform(rng, 0.0, K) * u;
    EXPECT_EQ(HK.value(0.0, in), H.value(0.0, in));
    EXPECT_EQ(HK.value(0.0, (K / 2) * u), H.value(0.0, (K / 2) * u));
    const Vector out = (K + 2.0) * u;
    EXPECT_NEAR(HK.value(0.0, out), info.C_K * std::pow(K + 2.0, info.lambda0 + 1.0), 1e-12 * HK.value(0.0, out));
  }
  EXPECT_THROW(cutoff(H, 3.0, 5.0), InputError);
  EXPECT_THROW(cutoff(H, 0.5), InputError);
  EXPECT_THROW(cutoff(zero_model(1), 3.0), InputError);
}

TEST(Hamiltonians, CutoffGradientContinuousAcrossShellEdges) {
  const auto H = example11();
  const double K = 3.0;
  const auto HK = cutoff(H, K).first;
  Vector u(2);
  u << 0.6, 0.8;
  for (double r : {K, K + 1.0}) {
    const double e = 1e-9;
    EXPECT_LE((HK.gradient(0.0, (r + e) * u) - HK.gradient(0.0, (r - e) * u)).norm(), 1e-6) << r;
    EXPECT_LE((HK.hessian(0.0, (r + e) * u) - HK.hessian(0.0, (r - e) * u)).norm(), 1e-5) << r;
  }
  const CutoffFunction chi{K};
  for (int j = 1; j < 20; ++j) EXPECT_LT(chi(K + 0.05 * j)[1], 0.0) << j;
}

TEST(Hamiltonians, H6Checks) {
  const ScalingProfile prof(Vector::Ones(1), Vector::Ones(1));
  const DiagonalScaling V = DiagonalScaling::convex(Vector::Constant(1, 0.5), Vector::Constant(1, 0.5));
  const std::vector<double> rhos{0.1, 0.5, 2.0, 10.0};
  const auto anti = check_h6(antidiagonal_term(0.4), V, prof, rhos);
  EXPECT_TRUE(anti.structural);
  EXPECT_TRUE(anti.ok());
  const auto zero = check_h6(QuadraticTerm(MatrixPath::constant(Matrix::Zero(2, 2), kTwoPi)), V, prof, rhos);
  EXPECT_TRUE(zero.ok());
  // B = I: bilinear identity needs xi = eta = 1/2
  const QuadraticTerm id(MatrixPath::constant(Matrix::Identity(2, 2), kTwoPi));
  EXPECT_TRUE(check_h6(id, V, prof, rhos).bilinear_ok);
  const DiagonalScaling V2 = DiagonalScaling::convex(Vector::Constant(1, 0.3), Vector::Constant(1, 0.7));
  EXPECT_FALSE(check_h6(id, V2, prof, rhos).bilinear_ok);
  EXPECT_FALSE(check_h6(id, V2, prof, rhos).structural);
}

TEST(Hamiltonians, H6PrimeAndLebesgueConstant) {
  EXPECT_NEAR(lebesgue_constant(kTwoPi, 2.0), 1.0, 1e-15);
  EXPECT_NEAR(lebesgue_constant(4.0, 4.0), std::pow(4.0, -0.25), 1e-15);
  EXPECT_THROW(lebesgue_constant(1.0, 1.5), InputError);
  const ScalingProfile prof(Vector::Ones(1), Vector::Ones(1));
  const DiagonalScaling V = DiagonalScaling::convex(Vector::Constant(1, 0.5), Vector::Constant(1, 0.5));
  const auto r = check_h6_prime(antidiagonal_term(0.1), V, prof, 0.49, lebesgue_constant(kTwoPi, 2.0));
  EXPECT_TRUE(r.commutator_ok);
  EXPECT_NEAR(r.commutator_max, 0.0, 1e-15);
}

// --- solver -----------------------------------------------------------------

TEST(Solver, ValueAtZeroAndOnEPlus) {
  const ActionFunctional F(example11(), 8, kTwoPi);
  EXPECT_EQ(F.value(F.zero()), 0.0);
  const ActionFunctional Z(zero_model(1), 8, kTwoPi);
  sampling::Rng rng(1);
  const FourierLoop z = project(testkit::random_loop(rng, 1, 8, kTwoPi), Part::plus);
  EXPECT_NEAR(Z.value(z), std::numbers::pi / kTwoPi * norm(z) * norm(z), 1e-12);
  EXPECT_THROW(F.value(FourierLoop(1, 4, kTwoPi)), DimensionError);
}

TEST(Solver, GradientMatchesDirectionalDifferences) {
  for (const auto& [name, H] : builtin_models()) {
    const ActionFunctional F(H, 6, H.period());
    sampling::Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
      const FourierLoop z = testkit::random_loop(rng, H.n(), 6, H.period(), 0.3);
      const FourierLoop w = testkit::random_loop(rng, H.n(), 6, H.period());
      const double h = 1e-5;
      const double fd = (F.value(z + h * w) - F.value(z - h * w)) / (2 * h);
      const double an = inner(F.gradient(z), w);
      EXPECT_LE(rel(fd, an), 1e-5) << name;
    }
  }
}

TEST(Solver, HessianMatchesGradientDifferences) {
  const ActionFunctional F(example11(), 6, kTwoPi);
  sampling::Rng rng(32);
  const FourierLoop z = testkit::random_loop(rng, 1, 6, kTwoPi, 0.5);
  const Matrix Hs = F.hessian(z);
  const Vector x = z.to_orthonormal();
  const double h = 1e-5;
  for (int trial = 0; trial < 5; ++trial) {
    const Vector v = sampling::gaussian_vector(rng, x.size());
    auto grad = [&](const Vector& y) { return F.gradient(FourierLoop::from_orthonormal(1, 6, kTwoPi, y)).to_orthonormal(); };
    const Vector fd = (grad(x + h * v) - grad(x - h * v)) / (2 * h);
    EXPECT_LE((fd - Hs * v).norm() / std::max(1.0, (Hs * v).norm()), 1e-6);
  }
}

TEST(Solver, QuadraticPartGradientModewise) {
  // H == 0: grad f at a single +k mode a is the representative (2 pi / T) a of that mode
  const double T = 3.0;
  const ActionFunctional F(zero_model(1), 4, T);
  Vector a(2);
  a << 0.3, -0.2;
  for (int k : {-2, 1, 3}) {
    const FourierLoop z = F.zero().with_mode(k, a);
    const FourierLoop g = F.gradient(z);
    EXPECT_LT((g.mode(k) - (kTwoPi / T) * (k > 0 ? 1.0 : -1.0) * a).norm(), 1e-14) << k;
    EXPECT_LT(norm(g.with_mode(k, Vector::Zero(2))), 1e-14);
  }
  EXPECT_LT(norm(F.gradient(F.zero())), 1e-15);
}

TEST(Solver, HessianSpectrumOfZeroModel) {
  const ActionFunctional F(zero_model(1), 2, kTwoPi);
  const auto md = action_hessian_spectrum(F, F.zero());
  EXPECT_EQ(md.spectrum.dim_minus, 4);
  EXPECT_EQ(md.spectrum.dim_zero, 2);
  EXPECT_EQ(md.spectrum.dim_plus, 4);
}

TEST(Solver, LinkingGeometryValidation) {
  const ScalingProfile prof(Vector::Ones(1), Vector::Ones(1));
  const FourierLoop e = unit_mode_one(1, 4, kTwoPi, Vector::Unit(2, 0));
  EXPECT_THROW(LinkingGeometry(0.5, 0.5, e, prof), InputError);
  EXPECT_THROW(LinkingGeometry(1.5, 3.0, e, prof), InputError);
  EXPECT_THROW(LinkingGeometry(0.5, 3.0, 2.0 * e, prof), InputError);
  EXPECT_THROW(LinkingGeometry(0.5, 3.0, unit_mode_one(1, 4, kTwoPi, Vector::Unit(2, 0)).with_mode(1, Vector::Zero(2)).with_mode(-1, Vector::Unit(2, 0) / std::sqrt(kTwoPi)), prof),
               InputError);
  const LinkingGeometry G(0.5, 3.0, e, prof);
  EXPECT_NEAR(G.delta(), std::numbers::pi / (3 * kTwoPi) * 0.25, 1e-15);
  EXPECT_NEAR(G.upper_level(), 9.0, 1e-12);
  EXPECT_THROW(linking_seed_set(G, 4, 0), InputError);
}

TEST(Solver, LevelGeometryDiagnostics) {
  // min f over B_mu(S_m) >= delta and max f over B_nu(dQ_m) <= 0, 200 samples each
  const auto H = example11();
  SolverOptions o;
  o.m = 16;
  const double T = kTwoPi;
  const auto& g = *H.growth();
  const FourierLoop e = unit_mode_one(1, o.m, T, Vector::Unit(2, 0));
  const double eps1 = estimate_eps1(1, T, e, o.geometry);
  const double A1 = compute_A1(T, 1, eps1, g);
  const auto HK = cutoff(H, 10.0, std::nullopt, A1).first;
  const ActionFunctional F(HK, o.m, T);
  const double A2 = estimate_A2(HK, A1, 44.0);
  const ScalingProfile prof(g.sigma, g.tau_exp);
  const LinkingGeometry G = build_linking_geometry(F, prof, eps1, A1, A2, o.geometry);
  EXPECT_GT(G.nu(), G.mu());
  const auto seeds = linking_seed_set(G, o.m, 200, 4242);
  ASSERT_EQ(seeds.sphere.size(), 200u);
  double fmin = 1e300, fmax = -1e300;
  for (const auto& z : seeds.sphere) fmin = std::min(fmin, F.value(z));
  for (const auto& z : seeds.boundary) fmax = std::max(fmax, F.value(z));
  EXPECT_GE(fmin, G.delta());
  EXPECT_LE(fmax, 0.0);
  for (const auto& z : seeds.segment) EXPECT_LE(F.value(z), G.upper_level());
}

TEST(Solver, ZeroModelHasNoNonconstantSolution) {
  const ActionFunctional F(zero_model(1), 8, kTwoPi);
  SolverOptions o;
  o.m = 8;
  const auto seeds = default_seeds(F, 3, o.seed);
  const auto res = find_saddle(F, seeds, AcceptanceWindow{}, o);
  EXPECT_TRUE(res.results.empty());
  ASSERT_EQ(res.diagnostics.size(), 3u);
  for (const auto& d : res.diagnostics) EXPECT_FALSE(d.reason.empty());
  EXPECT_THROW(find_saddle(F, {}, AcceptanceWindow{}, o), InputError);
}

class ExampleOrbit : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SolverOptions o;
    o.m = 24;
    opts_ = new SolverOptions(o);
    solve_ = new PeriodicSolve(solve_periodic(example11(), 1, o));
  }
  static void TearDownTestSuite() {
    delete solve_;
    delete opts_;
  }
  static PeriodicSolve* solve_;
  static SolverOptions* opts_;
};
PeriodicSolve* ExampleOrbit::solve_ = nullptr;
SolverOptions* ExampleOrbit::opts_ = nullptr;

TEST_F(ExampleOrbit, AcceptedResultsSatisfyWindowAndSandwich) {
  ASSERT_FALSE(solve_->search.results.empty());
  const auto& G = *solve_->geometry;
  for (const auto& r : solve_->search.results) {
    EXPECT_LE(r.residual, opts_->tol);
    EXPECT_GE(r.value, G.delta());
    EXPECT_LE(r.value, G.upper_level());
    EXPECT_TRUE(r.window_ok());
    EXPECT_LE(r.maslov.i, 2);
    EXPECT_GE(r.maslov.i + r.maslov.nu, 2);
    EXPECT_LE(r.sup_norm, r.cutoff_K);
    EXPECT_LE(r.reintegration_error, 1e-4);
  }
}

TEST_F(ExampleOrbit, MorseMaslovBridge) {
  for (const auto& r : solve_->search.results) {
    EXPECT_EQ(r.morse_index - r.half_dimension, r.maslov.i);
    EXPECT_EQ(r.morse_nullity, r.maslov.nu);
    EXPECT_EQ(r.monodromy_nullity, r.maslov.nu);
  }
}

TEST_F(ExampleOrbit, FrozenOrbitData) {
  const auto& r = solve_->search.results.front();
  EXPECT_NEAR(r.value, 0.629179, 1e-5);
  EXPECT_EQ(r.maslov.i, 2);
  EXPECT_EQ(r.maslov.nu, 1);
}

TEST_F(ExampleOrbit, DeflationAvoidsKnownSolution) {
  const auto& r = solve_->search.results.front();
  auto [HK, info] = cutoff(example11(), r.cutoff_K, std::nullopt, solve_->geometry->A1);
  const ActionFunctional F(HK, opts_->m, kTwoPi);
  const auto seeds = default_seeds(F, 4, opts_->seed);
  const auto again = find_saddle(F, seeds, AcceptanceWindow::from(*solve_->geometry, 0.1, r.cutoff_K), *opts_, {r.loop});
  for (const auto& s : again.results) EXPECT_GT(norm(s.loop - r.loop), 1e-4);
}

TEST_F(ExampleOrbit, MinimalPeriodIsT) {
  const auto v = minimal_period_check(solve_->search.results.front(), example11());
  EXPECT_EQ(v.divisor, 1);
  EXPECT_EQ(v.certificate.certified_k, 1);
  EXPECT_TRUE(v.h7_holds);
  EXPECT_TRUE(v.consistent);
}

TEST_F(ExampleOrbit, DistinctnessOfLoopWithItself) {
  const auto& r = solve_->search.results.front();
  const auto v = distinctness_check(r, r, 1, 1);
  EXPECT_FALSE(v.index_certified);
  EXPECT_FALSE(v.direct_distinct);
  EXPECT_NEAR(v.shift_gap, 0.0, 1e-14);
  // j * z has the same index data
  SaddleResult shifted = r;
  shifted.loop = r.loop.shifted(1.3);
  const auto B1 = ActionFunctional(example11(), opts_->m, kTwoPi).linearization(r.loop);
  const auto B2 = ActionFunctional(example11(), opts_->m, kTwoPi).linearization(shifted.loop);
  EXPECT_EQ(index_pair_galerkin(B1).pair, index_pair_galerkin(B2).pair);
  EXPECT_LT(shift_distance(shifted.loop, r.loop), 1e-9);
}

TEST(Solver, DistinctnessArithmetic) {
  SaddleResult a;
  a.loop = FourierLoop(1, 2, kTwoPi);
  a.loop = a.loop.with_mode(1, Vector::Unit(2, 0));
  a.period = kTwoPi;
  a.maslov = IndexPair(2, 1, kTwoPi, 1);
  SaddleResult b = a;
  const int p = 4;  // 2n + 2
  b.loop = FourierLoop(1, 2 * p, p * kTwoPi).with_mode(p + 1, Vector::Unit(2, 1));
  b.period = p * kTwoPi;
  b.k = p;
  b.maslov = IndexPair(1, 2, p * kTwoPi, 1);
  const auto v = distinctness_check(a, b, p, 1);
  EXPECT_TRUE(v.index_certified);
  EXPECT_EQ(v.index_reason, "certified distinct by index contradiction");
  EXPECT_TRUE(v.direct_distinct);
  // nondegenerate route
  SaddleResult c = a, d = b;
  c.maslov = IndexPair(2, 0, kTwoPi, 1);
  d.maslov = IndexPair(2, 0, p * kTwoPi, 1);
  EXPECT_TRUE(distinctness_check(c, d, p, 1).index_certified);
  // window fails and p small: no certificate
  SaddleResult d3 = c;
  d3.loop = FourierLoop(1, 6, 3 * kTwoPi).with_mode(4, Vector::Unit(2, 1));
  d3.period = 3 * kTwoPi;
  d3.k = 3;
  d3.maslov = IndexPair(5, 0, 3 * kTwoPi, 1);
  EXPECT_FALSE(distinctness_check(c, d3, 3, 1).index_certified);
  EXPECT_THROW(distinctness_check(a, b, 3, 1), InputError);
}

TEST(Solver, MinimalPeriodNumericalRoute) {
  const auto H = example11();
  SaddleResult r;
  r.period = kTwoPi;
  Vector a(2);
  a << 0.3, 0.0;
  r.loop = FourierLoop(1, 8, kTwoPi).with_mode(1, a);
  EXPECT_EQ(minimal_period_check(r, H).divisor, 1);
  r.loop = FourierLoop(1, 8, kTwoPi).with_mode(2, a).with_mode(-2, 0.5 * a);
  const auto v = minimal_period_check(r, H);
  EXPECT_EQ(v.divisor, 2);
  EXPECT_NEAR(v.minimal_period, kTwoPi / 2, 1e-15);
  EXPECT_FALSE(v.consistent);
  sampling::Rng rng(4);
  const auto fn = testkit::random_positive_path(rng, 1, kTwoPi);
  const auto nonaut = quadratic_model(QuadraticTerm(MatrixPath::sample(fn, kTwoPi, 32)));
  EXPECT_THROW(minimal_period_check(r, nonaut), InapplicableError);
}

TEST(Solver, ScanRespectsOmegaBound) {
  const auto H = with_quadratic_term(example11(), scalar_term(0.3));
  SolverOptions o;
  o.m = 8;
  const auto scan = subharmonic_scan(H, {4, 5}, o);
  ASSERT_EQ(scan.size(), 2u);
  for (const auto& e : scan) EXPECT_TRUE(e.skipped);
  EXPECT_THROW(subharmonic_scan(H, {}, o), InputError);
  EXPECT_THROW(subharmonic_scan(H, {0}, o), InputError);
}

TEST(Solver, SolvePeriodicNeedsGrowthProfile) {
  EXPECT_THROW(solve_periodic(zero_model(1), 1, SolverOptions{}), InputError);
}
