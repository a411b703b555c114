#include <iostream>

#include "CLI11.hpp"
#include "oscillab/common.hpp"
#include "runner.hpp"

namespace {

using oscillab::cli::RunManifest;
using oscillab::cli::RunOptions;

void add_run_options(CLI::App* sub, RunOptions& opts, std::uint64_t& seed) {
  sub->add_option("-c,--config", opts.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("-o,--out", opts.out, "output directory")->required();
  sub->add_option("--seed", seed, "override the config seed");
  sub->add_option("--set", opts.overrides, "dotted-path override key=value (repeatable)");
  sub->add_option("-m,--resolution", opts.resolutions, "replace the resolution ladder (repeatable)");
  sub->add_option("-j,--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--format", opts.formats, "output formats: json, csv, svg")->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oscillab: oscillation families, functionals and numerical verification of John-Nirenberg type theorems"};
  app.require_subcommand(1);

  RunOptions opts;
  std::uint64_t seed = 0;
  std::string report_dir;
  auto* run = app.add_subcommand("run", "run the configured harnesses and write reports");
  auto* profile = app.add_subcommand("profile", "measure the off-diagonal profile and its decay fit");
  auto* audit = app.add_subcommand("audit", "audit the structural properties of the family");
  auto* drcheck = app.add_subcommand("drcheck", "estimate the conditions on the functional");
  auto* report = app.add_subcommand("report", "summarize a previous run directory");
  for (auto* sub : {run, profile, audit, drcheck}) add_run_options(sub, opts, seed);
  report->add_option("-o,--out", report_dir, "run directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) {
      bool passed = false;
      std::cout << oscillab::cli::render_summary(report_dir, &passed);
      return passed ? 0 : 1;
    }
    for (auto* sub : {run, profile, audit, drcheck})
      if (sub->parsed() && sub->count("--seed")) opts.seed = seed;
    RunManifest m;
    if (run->parsed()) m = oscillab::cli::run_experiment(opts);
    if (profile->parsed()) m = oscillab::cli::run_profile(opts);
    if (audit->parsed()) m = oscillab::cli::run_audit(opts);
    if (drcheck->parsed()) m = oscillab::cli::run_drcheck(opts);
    for (const auto& a : m.artifacts) std::cout << a.name << "  " << a.checksum << "\n";
    std::cout << (m.passed ? "passed" : "failed") << "\n";
    return m.passed ? 0 : 1;
  } catch (const oscillab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
