#pragma once

// Pipelines behind the CLI subcommands and their artifacts:
// summary.json, indices.csv, solutions/*.csv, manifest.json.

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "linkorbit/cli/config.hpp"
#include "linkorbit/hamiltonians.hpp"
#include "linkorbit/index.hpp"
#include "linkorbit/solver.hpp"

namespace linkorbit::cli {

inline constexpr const char* kVersion = "1.0.0";

using json = nlohmann::ordered_json;

enum ExitCode : int { ok = 0, usage = 1, config_error = 2, pipeline_failure = 3 };

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline json to_json(const LinearSpec& s) {
  switch (s.kind) {
    case LinearSpec::Kind::scalar: return {{"constant", s.b}, {"n", s.n}};
    case LinearSpec::Kind::matrix: {
      json rows = json::array();
      for (Eigen::Index r = 0; r < s.matrix.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < s.matrix.cols(); ++c) row.push_back(s.matrix(r, c));
        rows.push_back(row);
      }
      return {{"matrix", rows}};
    }
    case LinearSpec::Kind::file: return {{"path", std::filesystem::path(s.path).filename().string()}};
  }
  return {};
}

/// Effective configuration (after command-line overrides); hashed into the manifest.
inline json to_json(const RunConfig& c) {
  json j;
  j["mode"] = c.mode;
  j["model"] = {{"kind", c.model.kind}, {"n", c.model.n}, {"sigma", c.model.sigma}, {"tau", c.model.tau}};
  if (c.model.quadratic) j["model"]["quadratic"] = to_json(*c.model.quadratic);
  if (c.linear) j["linear"] = to_json(*c.linear);
  j["period"] = c.period ? json(*c.period) : json(nullptr);
  j["k_list"] = c.k_list;
  j["truncation"] = {{"m", c.m}, {"schedule", c.m_schedule}, {"quadrature_points", c.quadrature_points}};
  j["tolerances"] = {{"newton", c.tol.newton},     {"zero_rel", c.tol.zero_rel}, {"rank", c.tol.rank},
                     {"nonconst", c.tol.nonconst}, {"dedupe", c.tol.dedupe},     {"reintegration", c.tol.reintegration},
                     {"shift", c.tol.shift}};
  j["solver"] = {{"seeds", c.solver.seeds}, {"wave", c.solver.wave},           {"max_newton", c.solver.max_newton},
                 {"K", c.solver.K},         {"lambda0", c.solver.lambda0 ? json(*c.solver.lambda0) : json(nullptr)},
                 {"trajectory", c.solver.trajectory}, {"trajectory_points", c.solver.trajectory_points}};
  j["hypotheses"] = c.hypotheses;
  j["seed"] = c.seed;
  return j;
}

inline MatrixPath build_linear(const LinearSpec& s, std::optional<double> period) {
  const double T = period.value_or(kTwoPi);
  switch (s.kind) {
    case LinearSpec::Kind::scalar: return MatrixPath::constant(s.b * Matrix::Identity(2 * s.n, 2 * s.n), T);
    case LinearSpec::Kind::matrix: return MatrixPath::constant(s.matrix, T);
    case LinearSpec::Kind::file: {
      std::ifstream in(s.path);
      if (!in) throw ConfigError("linear.path", 0, "cannot open " + s.path);
      MatrixPath B = read_matrix_path(in);
      if (period && std::abs(*period - B.period()) > 1e-12 * B.period())
        throw ConfigError("period", 0, "does not match the period recorded in " + s.path);
      return B;
    }
  }
  throw ConfigError("linear", 0, "unsupported source");
}

inline HamiltonianModel build_model(const RunConfig& c) {
  const ModelSpec& s = c.model;
  const double T = c.tau();
  auto vec = [](const std::vector<double>& v) { return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()))); };
  if (s.kind == "quadratic") return quadratic_model(QuadraticTerm(build_linear(*s.quadratic, c.period)));
  HamiltonianModel model = s.kind == "half_norm" ? half_norm_squared(s.n, T)
                           : s.kind == "zero"    ? zero_model(s.n, T)
                                                 : example_anisotropic(s.n, vec(s.sigma), vec(s.tau), T);
  if (s.quadratic) model = with_quadratic_term(model, QuadraticTerm(build_linear(*s.quadratic, c.period)));
  return model;
}

inline SolverOptions solver_options(const RunConfig& c) {
  SolverOptions o;
  o.m = c.m;
  o.quadrature_points = c.quadrature_points;
  o.tol = c.tol.newton;
  o.max_newton = c.solver.max_newton;
  o.nonconst_tol = c.tol.nonconst;
  o.dedupe = c.tol.dedupe;
  o.seed_count = c.solver.seeds;
  o.wave_size = c.solver.wave;
  o.seed = c.seed;
  o.K_schedule = c.solver.K;
  o.lambda0 = c.solver.lambda0;
  o.zero_tol_rel = c.tol.zero_rel;
  o.rank_tol = c.tol.rank;
  o.reintegration_tol = c.tol.reintegration;
  o.geometry.seed = c.seed;
  return o;
}

inline json pair_json(const IndexPair& p) { return {{"i", p.i}, {"nu", p.nu}}; }

struct RunResult {
  int exit_code = ExitCode::ok;
  json summary;
};

namespace detail {

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IntegrationError("cannot write " + file.string());
  out << text;
}

inline json run_index(const RunConfig& c, const std::filesystem::path& out, std::ostream& log, bool verbose) {
  const MatrixPath B = build_linear(*c.linear, c.period);
  IndexOptions opts;
  opts.m_schedule = c.m_schedule;
  opts.zero_tol_rel = c.tol.zero_rel;
  const GalerkinIndex base = index_pair_iterated(B, 1, opts);
  const SymplecticPath gamma = fundamental_solution(B);
  json rows = json::array();
  std::ostringstream csv;
  // column names are part of the output contract
  csv << "k,i,nu,prop210_lo,prop210_hi,prop212_lo,prop212_hi,ok\n";
  bool all_ok = true;
  for (int k : c.k_list) {
    const GalerkinIndex gk = index_pair_iterated(B, k, opts);
    const IterationBoundsReport r = check_iteration_bounds(base.pair, gk.pair, k);
    const SymplecticPath gk_path = iterate_path(gamma, k, 1e-6);
    const int mono = nullity_from_monodromy(gk_path, c.tol.rank * std::max(1.0, gk_path.end().norm()));
    all_ok = all_ok && r.ok();
    csv << k << ',' << gk.pair.i << ',' << gk.pair.nu << ',' << r.loose_lo << ',' << r.loose_hi << ',' << r.sharp_lo
        << ',' << r.sharp_hi << ',' << (r.ok() ? "true" : "false") << '\n';
    rows.push_back({{"k", k},
                    {"i", gk.pair.i},
                    {"nu", gk.pair.nu},
                    {"monodromy_nullity", mono},
                    {"stabilized_m", gk.stabilized_m},
                    {"loose", {{"lo", r.loose_lo}, {"hi", r.loose_hi}, {"ok", r.loose_ok}}},
                    {"sharp", {{"lo", r.sharp_lo}, {"hi", r.sharp_hi}, {"ok", r.sharp_ok}}},
                    {"warnings", gk.warnings}});
    if (verbose) log << "k=" << k << " (i, nu) = (" << gk.pair.i << ", " << gk.pair.nu << ")\n";
  }
  write_text(out / "indices.csv", csv.str());
  const PositivityReport pos = check_positivity_lower_bound(B, base.pair);
  return {{"n", B.n()},
          {"period", B.period()},
          {"base", {{"i", base.pair.i}, {"nu", base.pair.nu}, {"stabilized_m", base.stabilized_m}}},
          {"rows", rows},
          {"bounds_ok", all_ok},
          {"positivity", {{"holds", pos.holds()}, {"min_eigenvalue", pos.min_eigenvalue}}}};
}

inline json solution_json(const SaddleResult& r, const std::string& file) {
  return {{"k", r.k},
          {"period", r.period},
          {"file", file},
          {"value", r.value},
          {"residual", r.residual},
          {"cerami", r.cerami},
          {"morse_index", r.morse_index},
          {"morse_nullity", r.morse_nullity},
          {"half_dimension", r.half_dimension},
          {"maslov", pair_json(r.maslov)},
          {"maslov_stabilized_m", r.maslov_stabilized_m},
          {"monodromy_nullity", r.monodromy_nullity},
          {"window_ok", r.window_ok()},
          {"sup_norm", r.sup_norm},
          {"oscillation", r.oscillation},
          {"reintegration_error", r.reintegration_error},
          {"cutoff_K", r.cutoff_K},
          {"seed_index", r.seed_index},
          {"newton_steps", r.newton_steps},
          {"warnings", r.warnings}};
}

inline void write_solution(const RunConfig& c, const SaddleResult& r, const std::filesystem::path& dir, const std::string& stem) {
  std::ostringstream os;
  os << std::setprecision(17);
  write_loop_csv(os, r.loop);
  write_text(dir / (stem + ".csv"), os.str());
  if (!c.solver.trajectory) return;
  std::ostringstream tr;
  tr << std::setprecision(17) << "t";
  for (int i = 0; i < 2 * r.loop.n(); ++i) tr << ",z" << i;
  tr << '\n';
  const int N = c.solver.trajectory_points;
  for (int j = 0; j <= N; ++j) {
    const double t = r.period * j / N;
    const Vector z = evaluate_at(r.loop, t);
    tr << t;
    for (Eigen::Index i = 0; i < z.size(); ++i) tr << ',' << z[i];
    tr << '\n';
  }
  write_text(dir / (stem + "_trajectory.csv"), tr.str());
}

inline json periodic_json(const RunConfig& c, const HamiltonianModel& model, const PeriodicSolve& ps,
                          const std::filesystem::path& out) {
  json j;
  j["k"] = ps.k;
  j["period"] = ps.period;
  if (ps.geometry) {
    const LinkingGeometry& G = *ps.geometry;
    j["geometry"] = {{"mu", G.mu()},       {"nu", G.nu()}, {"eta", G.profile().eta()}, {"delta", G.delta()},
                     {"upper_level", G.upper_level()}, {"eps1", G.eps1},  {"A1", G.A1},        {"A2", G.A2}};
  }
  if (ps.cutoff)
    j["cutoff"] = {{"K", ps.cutoff->K}, {"lambda0", ps.cutoff->lambda0}, {"C_K", ps.cutoff->C_K}};
  json sols = json::array();
  int idx = 0;
  for (const auto& r : ps.search.results) {
    const std::string stem = "k" + std::to_string(ps.k) + "_" + std::to_string(idx++);
    write_solution(c, r, out / "solutions", stem);
    json s = solution_json(r, "solutions/" + stem + ".csv");
    if (model.autonomous()) {
      const MinimalPeriodVerdict mp = minimal_period_check(r, model, c.tol.shift);
      s["minimal_period"] = {{"numerical_divisor", mp.divisor},
                             {"minimal_period", mp.minimal_period},
                             {"certified_k", mp.certificate.certified_k},
                             {"contradiction", mp.certificate.contradiction},
                             {"h7_holds", mp.h7_holds},
                             {"consistent", mp.consistent},
                             {"note", mp.note}};
    }
    sols.push_back(s);
  }
  j["solutions"] = sols;
  json diags = json::array();
  for (const auto& d : ps.search.diagnostics)
    diags.push_back({{"seed", d.seed_index}, {"residual", d.residual}, {"value", d.value}, {"steps", d.steps}, {"outcome", d.reason}});
  j["seeds"] = diags;
  j["notes"] = ps.notes;
  return j;
}

}  // namespace detail

/// Executes the pipeline for c.mode and writes every artifact under `out`.
/// On failure the summary carries status "failed" and the error.
inline RunResult run(const RunConfig& c, const std::filesystem::path& out, std::ostream& log, bool verbose = false) {
  namespace fs = std::filesystem;
  RunResult res;
  fs::create_directories(out);
  const json effective = to_json(c);
  json manifest;
  manifest["tool"] = "linkorbit";
  manifest["config_hash"] = "fnv1a64:" + hex64(fnv1a64(effective.dump()));
  manifest["seed"] = c.seed;
  manifest["versions"] = {{"linkorbit", kVersion},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION)},
                          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                          {"compiler", __VERSION__},
                          {"cxx_standard", static_cast<long>(__cplusplus)}};
  manifest["config"] = effective;
  detail::write_text(out / "manifest.json", manifest.dump(2) + "\n");

  json& s = res.summary;
  s["mode"] = c.mode;
  s["config_hash"] = manifest["config_hash"];
  s["seed"] = c.seed;
  try {
    if (c.mode == "index") {
      s["result"] = detail::run_index(c, out, log, verbose);
    } else {
      const HamiltonianModel model = build_model(c);
      s["model"] = {{"name", model.name()}, {"n", model.n()}, {"period", model.period()}, {"autonomous", model.autonomous()},
                    {"omega", model.omega()}};
      if (c.mode == "check") {
        const HypothesisReport rep = check_hypotheses(model, c.hypotheses);
        json hs = json::array();
        for (const auto& h : rep.results)
          hs.push_back({{"name", h.name}, {"verdict", to_string(h.verdict)}, {"detail", h.detail}});
        s["result"] = {{"hypotheses", hs}, {"all_passed", rep.all_passed()}};
      } else {
        fs::create_directories(out / "solutions");
        const SolverOptions opts = solver_options(c);
        const std::vector<int> ks = c.mode == "solve" ? std::vector<int>{c.k_list.front()} : c.k_list;
        const std::vector<ScanEntry> scan = subharmonic_scan(model, ks, opts);
        json entries = json::array();
        std::map<int, const SaddleResult*> first;
        std::size_t found = 0;
        for (const auto& e : scan) {
          if (e.skipped) {
            entries.push_back({{"k", e.k}, {"skipped", true}, {"reason", e.reason}});
            continue;
          }
          if (verbose) log << "k=" << e.k << ": " << e.solve.search.results.size() << " solution(s)\n";
          entries.push_back(detail::periodic_json(c, model, e.solve, out));
          found += e.solve.search.results.size();
          if (!e.solve.search.results.empty()) first[e.k] = &e.solve.search.results.front();
        }
        json distinct = json::array();
        for (const auto& [k1, z1] : first)
          for (const auto& [k2, z2] : first) {
            if (k2 <= k1 || k2 % k1 != 0) continue;
            const int p = k2 / k1;
            const DistinctnessVerdict v = distinctness_check(*z1, *z2, p, model.n());
            distinct.push_back({{"k", k1},
                                {"pk", k2},
                                {"p", p},
                                {"index_certified", v.index_certified},
                                {"index_reason", v.index_reason},
                                {"shift_gap", v.shift_gap},
                                {"best_shift", v.best_shift},
                                {"direct_distinct", v.direct_distinct}});
          }
        s["result"] = {{"entries", entries}, {"distinctness", distinct}, {"solutions_found", found}};
        if (found == 0) {
          s["status"] = "no_solution";
          res.exit_code = ExitCode::pipeline_failure;
        }
      }
    }
    if (!s.contains("status")) s["status"] = "ok";
  } catch (const ConfigError& e) {
    s["status"] = "failed";
    s["error"] = e.what();
    res.exit_code = ExitCode::config_error;
  } catch (const std::exception& e) {
    s["status"] = "failed";
    s["error"] = e.what();
    res.exit_code = ExitCode::pipeline_failure;
  }
  detail::write_text(out / "summary.json", s.dump(2) + "\n");
  return res;
}

}  // namespace linkorbit::cli
