// linkorbit: index / solve / scan / check front end.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "linkorbit/cli/config.hpp"
#include "linkorbit/cli/run.hpp"

using namespace linkorbit;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> modes;
  bool verbose = false;
  // index without a config file
  std::string path;
  std::optional<double> constant;
  int n = 1;
  std::optional<double> period;
  std::vector<int> iterates;
};

cli::RunConfig assemble(const std::string& mode, const Flags& f) {
  cli::RunConfig c;
  if (!f.config.empty()) {
    c = cli::load_config(f.config);
  } else if (mode == "index" && (!f.path.empty() || f.constant)) {
    cli::LinearSpec s;
    if (!f.path.empty()) {
      s.kind = cli::LinearSpec::Kind::file;
      s.path = f.path;
    } else {
      s.b = *f.constant;
      s.n = f.n;
    }
    c.linear = s;
  } else if (mode != "check") {
    throw cli::ConfigError("", 0, mode == "index" ? "give --config, --path or --constant" : "give --config");
  }
  c.mode = mode;
  if (f.period) c.period = *f.period;
  if (!f.iterates.empty()) c.k_list = f.iterates;
  if (f.seed) c.seed = *f.seed;
  if (f.modes) {
    c.m = *f.modes;
    if (mode == "index") c.m_schedule = {*f.modes, 2 * *f.modes, 4 * *f.modes};
  }
  if (!f.out.empty()) c.output = f.out;
  if (c.mode == "index" && !c.linear) throw cli::ConfigError("linear", 0, "index mode needs a `linear` table");
  for (int k : c.k_list)
    if (k < 1) throw cli::ConfigError("k_list", 0, "entries must be >= 1");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maslov-type indices and periodic orbits of Hamiltonian systems"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "YAML or JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", f.out, "output directory (overrides `output`)");
  app.add_option("--seed", f.seed, "random seed");
  app.add_option("--modes", f.modes, "Fourier truncation m")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", f.verbose, "progress on stderr");

  auto* index = app.add_subcommand("index", "index pairs of B(t) and the iteration inequalities");
  index->add_option("--path", f.path, "matrix-series file `n tau samples` + rows")->check(CLI::ExistingFile);
  index->add_option("--constant", f.constant, "B = b I");
  index->add_option("--n", f.n, "half dimension for --constant")->check(CLI::PositiveNumber);
  index->add_option("--period", f.period, "tau (must match the file header when --path is given)");
  index->add_option("--iterates", f.iterates, "iterates k")->delimiter(',');
  auto* solve = app.add_subcommand("solve", "nonconstant periodic orbit at period tau");
  auto* scan = app.add_subcommand("scan", "subharmonics at periods k tau");
  scan->add_option("--iterates", f.iterates, "iterates k")->delimiter(',');
  auto* check = app.add_subcommand("check", "sampled hypothesis checks of the model");
  (void)solve;
  (void)check;

  CLI11_PARSE(app, argc, argv);
  const std::string mode = app.get_subcommands().front()->get_name();
  try {
    const cli::RunConfig c = assemble(mode, f);
    const cli::RunResult r = cli::run(c, c.output, std::cerr, f.verbose);
    const std::string status = r.summary.value("status", "");
    std::cout << mode << ": " << status << " (" << c.output << "/summary.json)\n";
    if (r.summary.contains("error")) std::cerr << "error: " << r.summary["error"].get<std::string>() << '\n';
    return r.exit_code;
  } catch (const cli::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return cli::ExitCode::config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::ExitCode::pipeline_failure;
  }
}
