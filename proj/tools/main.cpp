// stabletail command-line driver.
//
// Subcommands: stability, bound, coverage, srnn-demo, ridge-demo, report.
// Exit codes: 0 all verdicts pass, 2 a verdict failed (or was refused), 1 error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "stabletail/harness.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonOptions& options) {
  cmd->add_option("--config", options.config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--seed", options.seed, "override the config's master seed");
  cmd->add_option("--out", options.out, "output directory");
  cmd->add_option("--format", options.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--threads", options.threads,
                  "worker threads (affects speed only, never results)")
      ->check(CLI::PositiveNumber);
}

int run_subcommand(const CommonOptions& options, stabletail::ExperimentKind expected) {
  std::ifstream in(options.config_path);
  if (!in) {
    std::cerr << "error: cannot open config '" << options.config_path << "'\n";
    return 1;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();

  stabletail::ExperimentConfig config = stabletail::parse_config_text(buffer.str());
  if (config.kind != expected)
    throw std::runtime_error("config: experiment kind does not match the subcommand");
  if (options.seed) config.master_seed = *options.seed;
  if (options.out) config.out_dir = *options.out;
  if (options.format) config.format = *options.format;
  if (options.threads) config.threads = *options.threads;

  const stabletail::RunResult result = stabletail::run_experiment(config);
  const int exit_code = stabletail::write_run_result(result);

  std::cout << "wrote " << config.out_dir << "/report.json (config "
            << stabletail::config_hash(config) << ", seed " << config.master_seed
            << ")\n";
  for (const auto& verdict : result.verdicts) {
    const char* status = verdict.status == stabletail::VerdictStatus::pass ? "pass"
                         : verdict.status == stabletail::VerdictStatus::fail
                             ? "FAIL"
                             : "inconclusive";
    std::cout << "[" << status << "] " << verdict.name << ": " << verdict.detail << "\n";
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distribution-dependent stability estimation and tail-bound validation"};
  app.require_subcommand(1);

  CommonOptions stability_opts, bound_opts, coverage_opts, srnn_opts, ridge_opts;
  CLI::App* stability =
      app.add_subcommand("stability", "estimate stability coefficient profiles");
  add_common(stability, stability_opts);
  CLI::App* bound = app.add_subcommand("bound", "evaluate a bound from supplied inputs");
  add_common(bound, bound_opts);
  CLI::App* coverage =
      app.add_subcommand("coverage", "Monte-Carlo coverage study of a bound");
  add_common(coverage, coverage_opts);
  CLI::App* srnn = app.add_subcommand(
      "srnn-demo", "short-range nearest-neighbour consistency demonstration");
  add_common(srnn, srnn_opts);
  CLI::App* ridge =
      app.add_subcommand("ridge-demo", "ridge closed-form bound demonstration");
  add_common(ridge, ridge_opts);

  std::string report_path;
  CLI::App* report = app.add_subcommand("report", "summarize a written report");
  report->add_option("path", report_path, "report.json to summarize")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message and usage hint
    return 1;
  }

  try {
    if (stability->parsed())
      return run_subcommand(stability_opts, stabletail::ExperimentKind::stability_profile);
    if (bound->parsed())
      return run_subcommand(bound_opts, stabletail::ExperimentKind::bound_eval);
    if (coverage->parsed())
      return run_subcommand(coverage_opts, stabletail::ExperimentKind::coverage);
    if (srnn->parsed())
      return run_subcommand(srnn_opts, stabletail::ExperimentKind::srnn_demo);
    if (ridge->parsed())
      return run_subcommand(ridge_opts, stabletail::ExperimentKind::ridge_demo);
    if (report->parsed()) {
      std::string summary;
      const int exit_code = stabletail::summarize_report_file(report_path, &summary);
      std::cout << summary;
      return exit_code;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
