// svp-lab: config-driven runs of the solver, frequency, energy and zone tasks.
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "svp/harness.hpp"

namespace {

int finish(const svp::RunOutcome& out) {
  std::ostream& os = out.exit_code == svp::kExitOk ? std::cout : std::cerr;
  os << "svp-lab: " << out.message;
  if (!out.directory.empty() && !out.files.empty()) os << " (" << out.files.size() << " file(s) in " << out.directory << ")";
  os << "\n";
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"svp-lab: energy-decay experiments for quasilinear elliptic problems on cylinders"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> out_dir;
  bool refine = false;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "run config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default: config, then $SVP_LAB_OUT)");
    sub->add_flag("--refine", refine, "repeat the checks at h/2 and calibrate tol_disc");
    sub->add_option("--seed", seed, "seed for restarts and the negative control");
  };

  auto* run = app.add_subcommand("run", "run every task in a config");
  add_common(run);
  auto* freq = app.add_subcommand("frequencies", "run only the frequencies tasks");
  add_common(freq);
  auto* zones = app.add_subcommand("zones", "run only the zones tasks");
  add_common(zones);
  auto* pl = app.add_subcommand("pl", "run only the pl tasks");
  add_common(pl);

  auto* structure = app.add_subcommand("check-structure", "random-sample check of the operator conditions");
  std::optional<std::string> structure_config;
  std::size_t samples = 10000;
  std::uint64_t structure_seed = 1;
  structure->add_option("config", structure_config, "config whose [operator] block is checked")
      ->check(CLI::ExistingFile);
  structure->add_option("--samples", samples, "number of random samples")->check(CLI::PositiveNumber);
  structure->add_option("--seed", structure_seed, "sampling seed");
  structure->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : svp::kExitConfigError;
  }

  svp::RunOptions options;
  options.out_dir = out_dir;
  options.refine = refine;
  options.seed = seed;

  if (structure->parsed()) return finish(svp::run_structure(structure_config, samples, structure_seed, options));
  if (freq->parsed()) options.only_kinds = {"frequencies"};
  if (zones->parsed()) options.only_kinds = {"zones"};
  if (pl->parsed()) options.only_kinds = {"pl"};
  return finish(svp::run_file(config, options));
}
