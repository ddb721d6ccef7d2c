// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "linkorbit/cli/run.hpp"
#include "support.hpp"

using namespace linkorbit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

HamiltonianModel example11() { return example_anisotropic(1, Vector::Ones(1), Vector::Ones(1)); }

// The criterion 6 solve is reused by 7 and 8.
std::optional<PeriodicSolve> g_solve;
std::optional<SolverOptions> g_opts;

// --- 1 ----------------------------------------------------------------------

Outcome constant_oracle_check() {
  int cases = 0, bad = 0;
  std::string first_bad;
  for (int n : {1, 2})
    for (double b : {0.1, 0.5, 1.0, 1.5})
      for (int k : {1, 2, 3, 5}) {
        const MatrixPath B = MatrixPath::constant(b * Matrix::Identity(2 * n, 2 * n), kTwoPi);
        const IndexPair got = index_pair_iterated(B, k).pair;
        const IndexPair want = testkit::constant_oracle(b, n, k * kTwoPi);
        ++cases;
        if (got.i != want.i || got.nu != want.nu) {
          if (!bad++) first_bad = fmt("n=%d b=%g k=%d got (%d,%d) want (%d,%d)", n, b, k, got.i, got.nu, want.i, want.nu);
        }
      }
  // the worked examples, independently of the oracle
  for (int n : {1, 2}) {
    auto pair = [&](double b, int k) { return index_pair_iterated(MatrixPath::constant(b * Matrix::Identity(2 * n, 2 * n), kTwoPi), k).pair; };
    const IndexPair a = pair(0.5, 1), c = pair(0.5, 2), d = pair(1.0, 1);
    cases += 3;
    if (a.i != n || a.nu != 0) ++bad;
    if (c.i != n || c.nu != 2 * n) ++bad;
    if (d.i != n || d.nu != 2 * n) ++bad;
  }
  return {bad == 0, fmt("%d/%d cases match", cases - bad, cases) + (bad ? "; first mismatch " + first_bad : "")};
}

// --- 2 ----------------------------------------------------------------------

Outcome nullity_cross_check() {
  sampling::Rng rng(2002);
  int agree = 0, total = 0, nonzero = 0;
  std::string first_bad;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 2;
    const double tau = kTwoPi;
    std::optional<SmoothMatrixFunction> B;
    if (trial % 4 < 2) B = testkit::random_resonant_path(rng, n, tau).B;
    else B = testkit::random_trig_path(rng, n, tau);
    ++total;
    try {
      const int g = index_pair_galerkin(*B).pair.nu;
      const SymplecticPath gamma = fundamental_solution(*B);
      const int mono = nullity_from_monodromy(gamma, 1e-6 * std::max(1.0, gamma.end().norm()));
      if (g == mono) ++agree;
      else if (first_bad.empty()) first_bad = fmt("trial %d: galerkin %d, monodromy %d", trial, g, mono);
      if (mono > 0) ++nonzero;
    } catch (const std::exception& e) {
      if (first_bad.empty()) first_bad = fmt("trial %d: ", trial) + e.what();
    }
  }
  return {agree == total, fmt("%d/%d paths agree (%d with nonzero nullity)", agree, total, nonzero) +
                              (first_bad.empty() ? "" : "; " + first_bad)};
}

// --- 3 ----------------------------------------------------------------------

Outcome iteration_inequalities() {
  sampling::Rng rng(3003);
  int checks = 0, violations = 0, errors = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 2;
    const auto B = testkit::random_trig_path(rng, n, kTwoPi);
    try {
      const IndexPair base = index_pair_galerkin(B).pair;
      for (int k : {2, 3, 5}) {
        ++checks;
        if (!check_iteration_bounds(base, index_pair_iterated(B, k).pair, k).ok()) ++violations;
      }
    } catch (const std::exception&) {
      ++errors;
    }
  }
  int pos_ok = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 2;
    const auto B = testkit::random_positive_path(rng, n, kTwoPi);
    try {
      if (check_positivity_lower_bound(B, index_pair_galerkin(B).pair).holds()) ++pos_ok;
    } catch (const std::exception&) {
      ++errors;
    }
  }
  return {violations == 0 && errors == 0 && pos_ok == 50 && checks == 300,
          fmt("%d iteration checks, %d violations; positivity %d/50; %d errors", checks, violations, pos_ok, errors)};
}

// --- 4 ----------------------------------------------------------------------

Outcome scaling_identity() {
  sampling::Rng rng(4004);
  // ten fixed profiles with sigma_i / tau_i in [1/2, 2]
  const std::vector<std::pair<std::vector<double>, std::vector<double>>> raw{
      {{1.0}, {1.0}},           {{1.0}, {2.0}},           {{2.0}, {1.0}},           {{1.5}, {1.0}},
      {{0.75}, {1.25}},         {{1.0, 1.0}, {1.0, 1.0}}, {{1.0, 2.0}, {2.0, 1.0}}, {{1.2, 0.8}, {1.0, 1.0}},
      {{2.0, 1.5}, {1.5, 2.0}}, {{0.6, 1.0}, {1.0, 1.4}}};
  double worst = 0.0;
  int checks = 0, bad = 0;
  for (const auto& [s, t] : raw) {
    const int n = static_cast<int>(s.size());
    const ScalingProfile prof(Eigen::Map<const Vector>(s.data(), n), Eigen::Map<const Vector>(t.data(), n));
    for (int l = 0; l < 100; ++l) {
      const FourierLoop z = testkit::random_loop(rng, n, 6, kTwoPi);
      const double az = a_form(z, z);
      for (double rho : {0.1, 0.5, 2.0, 10.0}) {
        const FourierLoop bz = scaling_operator(z, rho, prof);
        const double err = std::abs(a_form(bz, bz) - std::pow(rho, prof.eta() - 2.0) * az);
        const double ratio = err / (1e-10 * (1.0 + std::abs(az)));
        worst = std::max(worst, ratio);
        ++checks;
        if (ratio > 1.0) ++bad;
      }
    }
  }
  return {bad == 0, fmt("%d checks, %d over bound; worst error/bound %.3g", checks, bad, worst)};
}

// --- 5 ----------------------------------------------------------------------

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

std::vector<std::pair<std::string, HamiltonianModel>> models() {
  sampling::Rng rng(5005);
  Vector s2(2), t2(2);
  s2 << 1.0, 2.0;
  t2 << 2.0, 1.0;
  const auto P = testkit::random_positive_path(rng, 1, kTwoPi);
  return {{"example n=1", example11()},
          {"example n=2", example_anisotropic(2, s2, t2)},
          {"half_norm", half_norm_squared(2)},
          {"zero", zero_model(1)},
          {"quadratic", quadratic_model(QuadraticTerm(MatrixPath::sample(P, kTwoPi, 64)))},
          {"example+0.2I", with_quadratic_term(example11(), QuadraticTerm(MatrixPath::constant(0.2 * Matrix::Identity(2, 2), kTwoPi)))},
          {"cutoff K=2", cutoff(example11(), 2.0).first}};
}

Outcome derivative_fidelity() {
  const double h = 1e-5, bound = 1e-5;
  double worst = 0.0;
  std::string worst_where;
  auto track = [&](double e, const std::string& where) {
    if (e > worst) {
      worst = e;
      worst_where = where;
    }
  };
  for (const auto& [name, H] : models()) {
    sampling::Rng rng(5100);
    const int d = 2 * H.n();
    for (int trial = 0; trial < 100; ++trial) {
      const double r = std::pow(10.0, sampling::uniform(rng, -1.0, name.starts_with("cutoff") ? 0.5 : 1.0));
      const Vector z = r * sampling::unit_sphere(rng, d);
      const double t = sampling::uniform(rng, 0.0, H.period());
      const Vector g = H.gradient(t, z);
      const Matrix Hs = H.hessian(t, z);
      const double sg = std::max(1.0, g.norm()), sh = std::max(1.0, Hs.norm());
      for (int i = 0; i < d; ++i) {
        const Vector e = Vector::Unit(d, i);
        track(std::abs((H.value(t, z + h * e) - H.value(t, z - h * e)) / (2 * h) - g[i]) / sg, name + " gradient");
        track(((H.gradient(t, z + h * e) - H.gradient(t, z - h * e)) / (2 * h) - Hs.col(i)).norm() / sh, name + " Hessian");
      }
    }
    // action functional: directional derivative of f and of grad f
    const int m = 6;
    const ActionFunctional F(H, m, H.period());
    for (int trial = 0; trial < 100; ++trial) {
      const FourierLoop z = testkit::random_loop(rng, H.n(), m, H.period(), 0.3);
      const FourierLoop w = testkit::random_loop(rng, H.n(), m, H.period());
      track(rel((F.value(z + h * w) - F.value(z - h * w)) / (2 * h), inner(F.gradient(z), w)), name + " action gradient");
      if (trial % 10 == 0) {
        const Vector Hw = F.hessian(z) * w.to_orthonormal();
        const Vector fd = (F.gradient(z + h * w) - F.gradient(z - h * w)).to_orthonormal() / (2 * h);
        track((fd - Hw).norm() / std::max(1.0, Hw.norm()), name + " action Hessian");
      }
    }
  }
  return {worst <= bound, fmt("worst relative error %.2e (%s), bound 1e-5", worst, worst_where.c_str())};
}

// --- 6 ----------------------------------------------------------------------

Outcome end_to_end() {
  SolverOptions o;
  o.m = 64;
  const auto t0 = std::chrono::steady_clock::now();
  g_opts = o;
  g_solve = solve_periodic(example11(), 1, o);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& R = g_solve->search.results;
  if (R.empty() || !g_solve->geometry) return {false, fmt("no accepted solution from the default seeds (%.0f s)", secs)};
  const LinkingGeometry& G = *g_solve->geometry;
  int good = 0;
  for (const auto& r : R) {
    const bool ok = r.residual <= 1e-8 && r.oscillation > o.nonconst_tol && r.value >= G.delta() && r.value <= G.upper_level() &&
                    r.maslov.i <= 2 && 2 <= r.maslov.i + r.maslov.nu && r.reintegration_error <= 1e-4;
    good += ok;
  }
  const auto& r = R.front();
  return {good == static_cast<int>(R.size()) && secs < 600.0,
          fmt("%zu solution(s); f=%.6f in [%.4g, %.4g], residual %.1e, (i,nu)=(%d,%d), reintegration %.1e, %.0f s", R.size(),
              r.value, G.delta(), G.upper_level(), r.residual, r.maslov.i, r.maslov.nu, r.reintegration_error, secs)};
}

// --- 7 ----------------------------------------------------------------------

Outcome minimal_period() {
  if (!g_solve || g_solve->search.results.empty()) return {false, "no orbit from criterion 6"};
  const auto& r = g_solve->search.results.front();
  const MinimalPeriodVerdict v = minimal_period_check(r, example11(), 1e-6);
  const bool ok = v.divisor == 1 && std::abs(v.minimal_period - kTwoPi) < 1e-12 && v.certificate.certified_k == 1;
  return {ok, fmt("numerical divisor %d (T/2 defect %.3g), certificate k=%d, (H7) %s", v.divisor, v.shift_defect,
                  v.certificate.certified_k, v.h7_holds ? "holds" : "unconfirmed")};
}

// --- 8 ----------------------------------------------------------------------

Outcome subharmonics() {
  if (!g_solve || g_solve->search.results.empty()) return {false, "no k=1 orbit from criterion 6"};
  const auto scan = subharmonic_scan(example11(), {2, 4}, *g_opts);
  const SaddleResult& z1 = g_solve->search.results.front();
  bool windows = z1.window_ok();
  const SaddleResult* z2 = nullptr;
  const SaddleResult* z4 = nullptr;
  for (const auto& e : scan) {
    if (e.skipped) continue;
    for (const auto& r : e.solve.search.results) {
      if (e.k == 2) windows = windows && r.window_ok();  // the window claim is for k in {1, 2}
    }
    if (!e.solve.search.results.empty()) (e.k == 2 ? z2 : z4) = &e.solve.search.results.front();
  }
  if (!z2) return {false, "no accepted z_2"};
  std::string dist = "z_4 did not converge; distinctness not exercised";
  bool dist_ok = true;
  if (z4) {
    const DistinctnessVerdict v = distinctness_check(z1, *z4, 4, 1);
    dist_ok = v.index_reason == "certified distinct by index contradiction" && v.shift_gap > 1e-3;
    dist = fmt("z_1 vs z_4: \"%s\", shift gap %.3g", v.index_reason.c_str(), v.shift_gap);
  }
  return {windows && dist_ok, fmt("windows %s for k=1,2 (f_2=%.6f, (i,nu)=(%d,%d)); ", windows ? "ok" : "violated", z2->value,
                                  z2->maslov.i, z2->maslov.nu) +
                                  dist};
}

// --- 9 ----------------------------------------------------------------------

fs::path samples_dir() {
  if (const char* env = std::getenv("LINKORBIT_SAMPLES")) return env;
#ifdef LINKORBIT_SAMPLES_DIR
  return LINKORBIT_SAMPLES_DIR;
#else
  return "samples";
#endif
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "linkorbit_acceptance_determinism";
  fs::remove_all(root);
  int same = 0, total = 0;
  std::string diff;
  for (const char* f : {"index_constant.yaml", "index_path.yaml", "check_example.json", "solve_example.yaml", "scan_example.yaml"}) {
    const cli::RunConfig c = cli::load_config(samples_dir() / f);
    std::ostringstream log;
    const fs::path a = root / (std::string(f) + ".a"), b = root / (std::string(f) + ".b");
    cli::run(c, a, log);
    cli::run(c, b, log);
    ++total;
    const std::string sa = slurp(a / "summary.json");
    if (!sa.empty() && sa == slurp(b / "summary.json")) ++same;
    else if (diff.empty()) diff = std::string("; differs: ") + f;
  }
  return {same == total, fmt("%d/%d pipelines give byte-identical summary.json", same, total) + diff};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"constant-coefficient index oracle", constant_oracle_check},
      {"Galerkin nullity equals monodromy nullity", nullity_cross_check},
      {"iteration inequalities and positivity bound", iteration_inequalities},
      {"scaling identity", scaling_identity},
      {"gradient/Hessian fidelity", derivative_fidelity},
      {"end-to-end orbit", end_to_end},
      {"minimal period", minimal_period},
      {"subharmonic scan and distinctness", subharmonics},
      {"determinism", determinism},
  };
  int failed = 0;
  int id = 0;
  for (const auto& [name, fn] : criteria) {
    ++id;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << name << "): " << o.detail
              << fmt("  [%.1f s]", secs) << std::endl;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criterion(s) failed" : std::string("acceptance: all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
