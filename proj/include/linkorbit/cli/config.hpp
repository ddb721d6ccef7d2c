#pragma once

// Run configuration: YAML (JSON is accepted as a subset), validated with
// line/field diagnostics.

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "linkorbit/errors.hpp"
#include "linkorbit/loopspace.hpp"
#include "linkorbit/sampling.hpp"
#include "linkorbit/symplectic.hpp"

namespace linkorbit::cli {

class ConfigError : public InputError {
 public:
  ConfigError(const std::string& field, int line, const std::string& msg)
      : InputError(format(field, line, msg)), field_(field), line_(line) {}
  const std::string& field() const { return field_; }
  int line() const { return line_; }  ///< 1-based; 0 when unknown

 private:
  static std::string format(const std::string& field, int line, const std::string& msg) {
    std::string s = "config error";
    if (line > 0) s += " at line " + std::to_string(line);
    if (!field.empty()) s += ", field '" + field + "'";
    return s + ": " + msg;
  }
  std::string field_;
  int line_;
};

/// B(t) source: b * I, a constant matrix, or a matrix-series file.
struct LinearSpec {
  enum class Kind { scalar, matrix, file };
  Kind kind = Kind::scalar;
  double b = 0.0;
  Matrix matrix;
  std::string path;  ///< resolved against the config directory
  int n = 1;         ///< used with `scalar`
};

struct ModelSpec {
  /// example_anisotropic | quadratic_plus (example + B-hat) | half_norm | zero | quadratic
  std::string kind = "example_anisotropic";
  int n = 1;
  std::vector<double> sigma;
  std::vector<double> tau;
  std::optional<LinearSpec> quadratic;  ///< B-hat: the model itself for `quadratic`, an added term otherwise
};

struct Tolerances {
  double newton = 1e-9;
  double zero_rel = 1e-6;
  double rank = 1e-6;
  double nonconst = 1e-6;
  double dedupe = 1e-4;
  double reintegration = 1e-4;
  double shift = 1e-6;
};

struct SolverSettings {
  int seeds = 4;
  int wave = 4;
  int max_newton = 500;
  std::vector<double> K{10.0, 100.0, 1000.0};
  std::optional<double> lambda0;  ///< cut-off exponent; midpoint of (gamma, 1 + beta) when unset
  bool trajectory = false;
  int trajectory_points = 256;
};

struct RunConfig {
  std::string mode;  ///< index | solve | scan | check
  ModelSpec model;
  std::optional<LinearSpec> linear;
  std::optional<double> period;  ///< tau; 2 pi when unset
  std::vector<int> k_list{1};
  std::vector<int> m_schedule{16, 32, 64, 128, 256};
  int m = 64;
  int quadrature_points = 0;
  Tolerances tol;
  SolverSettings solver;
  std::vector<std::string> hypotheses{"H1", "H2", "H3", "H4", "H5"};
  std::uint64_t seed = sampling::kDefaultSeed;
  std::string output = "linkorbit-out";

  double tau() const { return period.value_or(kTwoPi); }
};

namespace detail {

inline int line_of(const YAML::Node& node) { return node.Mark().is_null() ? 0 : node.Mark().line + 1; }

inline std::string join(const std::string& parent, const std::string& key) { return parent.empty() ? key : parent + "." + key; }

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ConfigError(field, line_of(node), "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field, line_of(node), "cannot read '" + node.Scalar() + "'");
  }
}

/// Numbers, plus "pi", "2pi", "0.5*pi".
inline double real(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ConfigError(field, line_of(node), "expected a number");
  std::string s = node.Scalar();
  const auto p = s.find("pi");
  if (p != std::string::npos && p + 2 == s.size()) {
    std::string c = s.substr(0, p);
    while (!c.empty() && (c.back() == '*' || c.back() == ' ')) c.pop_back();
    double coef = 1.0;
    if (!c.empty()) {
      std::istringstream is(c);
      if (!(is >> coef) || !is.eof()) throw ConfigError(field, line_of(node), "cannot read '" + s + "'");
    }
    return coef * std::numbers::pi;
  }
  return scalar<double>(node, field);
}

inline double positive(const YAML::Node& node, const std::string& field) {
  const double v = real(node, field);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, line_of(node), "must be positive");
  return v;
}

inline int positive_int(const YAML::Node& node, const std::string& field) {
  const int v = scalar<int>(node, field);
  if (v < 1) throw ConfigError(field, line_of(node), "must be >= 1");
  return v;
}

inline const YAML::Node& sequence(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw ConfigError(field, line_of(node), "expected a list");
  return node;
}

inline void only_keys(const YAML::Node& node, const std::string& field, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(field, line_of(node), "expected a table");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(join(field, key), line_of(kv.first), "unknown key");
  }
}

inline std::vector<double> reals(const YAML::Node& node, const std::string& field) {
  std::vector<double> out;
  int idx = 0;
  for (const auto& x : sequence(node, field)) out.push_back(real(x, field + "[" + std::to_string(idx++) + "]"));
  return out;
}

inline LinearSpec linear_spec(const YAML::Node& node, const std::string& field, const std::filesystem::path& base) {
  only_keys(node, field, {"constant", "matrix", "path", "n"});
  const int given = static_cast<int>(node["constant"].IsDefined()) + static_cast<int>(node["matrix"].IsDefined()) +
                    static_cast<int>(node["path"].IsDefined());
  if (given != 1) throw ConfigError(field, line_of(node), "give exactly one of constant, matrix, path");
  LinearSpec s;
  if (node["n"]) s.n = positive_int(node["n"], join(field, "n"));
  if (node["constant"]) {
    s.kind = LinearSpec::Kind::scalar;
    s.b = real(node["constant"], join(field, "constant"));
  } else if (node["matrix"]) {
    s.kind = LinearSpec::Kind::matrix;
    const std::string f = join(field, "matrix");
    const YAML::Node& rows = sequence(node["matrix"], f);
    const auto d = static_cast<Eigen::Index>(rows.size());
    if (d == 0 || d % 2 != 0) throw ConfigError(f, line_of(rows), "matrix must be 2n x 2n");
    s.matrix = Matrix::Zero(d, d);
    Eigen::Index r = 0;
    for (const auto& node_row : rows) {
      const std::vector<double> row = reals(node_row, f + "[" + std::to_string(r) + "]");
      if (static_cast<Eigen::Index>(row.size()) != d) throw ConfigError(f, line_of(node_row), "matrix must be square");
      for (Eigen::Index c = 0; c < d; ++c) s.matrix(r, c) = row[static_cast<std::size_t>(c)];
      ++r;
    }
    if ((s.matrix - s.matrix.transpose()).norm() > kDefaultTolSym * std::max(1.0, s.matrix.norm()))
      throw ConfigError(f, line_of(rows), "matrix must be symmetric");
    s.n = static_cast<int>(d / 2);
  } else {
    s.kind = LinearSpec::Kind::file;
    std::filesystem::path p = scalar<std::string>(node["path"], join(field, "path"));
    if (p.is_relative()) p = base / p;
    s.path = p.string();
  }
  return s;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".") {
  using namespace detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, e.msg);
  }
  if (!root.IsMap()) throw ConfigError("", 1, "top level must be a table");
  only_keys(root, "", {"mode", "model", "linear", "period", "k_list", "truncation", "tolerances", "solver", "hypotheses",
                       "seed", "output"});
  RunConfig c;
  if (!root["mode"]) throw ConfigError("mode", 0, "missing; expected one of index, solve, scan, check");
  c.mode = scalar<std::string>(root["mode"], "mode");
  if (c.mode != "index" && c.mode != "solve" && c.mode != "scan" && c.mode != "check")
    throw ConfigError("mode", line_of(root["mode"]), "expected one of index, solve, scan, check");

  if (root["model"]) {
    const YAML::Node m = root["model"];
    only_keys(m, "model", {"kind", "n", "sigma", "tau", "quadratic"});
    if (m["kind"]) c.model.kind = scalar<std::string>(m["kind"], "model.kind");
    static const std::set<std::string> kinds{"example_anisotropic", "quadratic_plus", "half_norm", "zero", "quadratic"};
    if (!kinds.count(c.model.kind)) throw ConfigError("model.kind", line_of(m["kind"]), "unknown model '" + c.model.kind + "'");
    if (m["n"]) c.model.n = positive_int(m["n"], "model.n");
    if (m["sigma"]) c.model.sigma = reals(m["sigma"], "model.sigma");
    if (m["tau"]) c.model.tau = reals(m["tau"], "model.tau");
    for (const char* key : {"sigma", "tau"}) {
      const auto& v = std::string(key) == "sigma" ? c.model.sigma : c.model.tau;
      if (!m[key]) continue;
      if (static_cast<int>(v.size()) != c.model.n)
        throw ConfigError(std::string("model.") + key, line_of(m[key]), "needs n = " + std::to_string(c.model.n) + " entries");
      for (double x : v)
        if (!(x > 0.0)) throw ConfigError(std::string("model.") + key, line_of(m[key]), "entries must be positive");
    }
    if (m["quadratic"]) c.model.quadratic = linear_spec(m["quadratic"], "model.quadratic", base_dir);
    if ((c.model.kind == "quadratic" || c.model.kind == "quadratic_plus") && !c.model.quadratic)
      throw ConfigError("model.quadratic", line_of(m), "required for kind '" + c.model.kind + "'");
  }
  if (c.model.sigma.empty()) c.model.sigma.assign(static_cast<std::size_t>(c.model.n), 1.0);
  if (c.model.tau.empty()) c.model.tau.assign(static_cast<std::size_t>(c.model.n), 1.0);

  if (root["linear"]) c.linear = linear_spec(root["linear"], "linear", base_dir);
  if (root["period"]) c.period = positive(root["period"], "period");

  if (root["k_list"]) {
    c.k_list.clear();
    int idx = 0;
    for (const auto& k : sequence(root["k_list"], "k_list")) c.k_list.push_back(positive_int(k, "k_list[" + std::to_string(idx++) + "]"));
    if (c.k_list.empty()) throw ConfigError("k_list", line_of(root["k_list"]), "must not be empty");
  }

  if (root["truncation"]) {
    const YAML::Node t = root["truncation"];
    only_keys(t, "truncation", {"m", "schedule", "quadrature_points"});
    if (t["m"]) c.m = positive_int(t["m"], "truncation.m");
    if (t["quadrature_points"]) {
      c.quadrature_points = scalar<int>(t["quadrature_points"], "truncation.quadrature_points");
      if (c.quadrature_points != 0 && c.quadrature_points < 2 * c.m + 1)
        throw ConfigError("truncation.quadrature_points", line_of(t["quadrature_points"]), "must be 0 or >= 2m + 1");
    }
    if (t["schedule"]) {
      c.m_schedule.clear();
      int idx = 0;
      for (const auto& x : sequence(t["schedule"], "truncation.schedule"))
        c.m_schedule.push_back(positive_int(x, "truncation.schedule[" + std::to_string(idx++) + "]"));
      if (c.m_schedule.size() < 2) throw ConfigError("truncation.schedule", line_of(t["schedule"]), "needs at least two levels");
    }
  }

  if (root["tolerances"]) {
    const YAML::Node t = root["tolerances"];
    only_keys(t, "tolerances", {"newton", "zero_rel", "rank", "nonconst", "dedupe", "reintegration", "shift"});
    auto set = [&](const char* key, double& dst) {
      if (t[key]) dst = positive(t[key], std::string("tolerances.") + key);
    };
    set("newton", c.tol.newton);
    set("zero_rel", c.tol.zero_rel);
    set("rank", c.tol.rank);
    set("nonconst", c.tol.nonconst);
    set("dedupe", c.tol.dedupe);
    set("reintegration", c.tol.reintegration);
    set("shift", c.tol.shift);
  }

  if (root["solver"]) {
    const YAML::Node s = root["solver"];
    only_keys(s, "solver", {"seeds", "wave", "max_newton", "K", "lambda0", "trajectory", "trajectory_points"});
    if (s["seeds"]) c.solver.seeds = positive_int(s["seeds"], "solver.seeds");
    if (s["wave"]) c.solver.wave = positive_int(s["wave"], "solver.wave");
    if (s["max_newton"]) c.solver.max_newton = positive_int(s["max_newton"], "solver.max_newton");
    if (s["K"]) {
      c.solver.K = reals(s["K"], "solver.K");
      if (c.solver.K.empty()) throw ConfigError("solver.K", line_of(s["K"]), "must not be empty");
      for (double K : c.solver.K)
        if (!(K > 0.0)) throw ConfigError("solver.K", line_of(s["K"]), "radii must be positive");
    }
    if (s["lambda0"]) c.solver.lambda0 = positive(s["lambda0"], "solver.lambda0");
    if (s["trajectory"]) c.solver.trajectory = scalar<bool>(s["trajectory"], "solver.trajectory");
    if (s["trajectory_points"]) c.solver.trajectory_points = positive_int(s["trajectory_points"], "solver.trajectory_points");
  }

  if (root["hypotheses"]) {
    c.hypotheses.clear();
    int idx = 0;
    for (const auto& h : sequence(root["hypotheses"], "hypotheses"))
      c.hypotheses.push_back(scalar<std::string>(h, "hypotheses[" + std::to_string(idx++) + "]"));
  }
  if (root["seed"]) c.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (root["output"]) c.output = scalar<std::string>(root["output"], "output");

  if (c.mode == "index" && !c.linear) throw ConfigError("linear", 0, "index mode needs a `linear` table");
  if (c.mode == "scan" && !root["k_list"]) throw ConfigError("k_list", 0, "scan mode needs a nonempty k_list");
  return c;
}

inline RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("", 0, "cannot open " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.has_parent_path() ? file.parent_path() : std::filesystem::path("."));
}

}  // namespace linkorbit::cli
