#include <chrono>
#include <iostream>

#include "CLI11.hpp"
#include "revtime/cli/commands.h"

namespace fs = std::filesystem;
using namespace revtime;
using namespace revtime::cli;

int main(int argc, char** argv) {
  CLI::App app{"revtime: code review completion time prediction"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> out;
  std::optional<std::string> input;

  auto add_common = [&](CLI::App* sub, bool with_input) {
    sub->add_option("--config", config_path, "run configuration (YAML)")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "top-level seed");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "run directory");
    if (with_input) sub->add_option("--in", input, "input path instead of the run directory default");
  };
  add_common(app.add_subcommand("crawl", "fetch changes into <out>/dataset"), false);
  add_common(app.add_subcommand("filter", "apply the filtering rules"), true);
  add_common(app.add_subcommand("featurize", "compute the 50 features"), true);
  add_common(app.add_subcommand("evaluate", "online validation of every pipeline"), true);
  add_common(app.add_subcommand("compare", "pairwise statistics across pipelines"), false);
  add_common(app.add_subcommand("ablate", "single-dimension ablation"), true);
  add_common(app.add_subcommand("rank", "LOCO importance and Scott-Knott ESD ranking"), true);
  add_common(app.add_subcommand("report", "consolidated Markdown report"), false);

  auto* synth = app.add_subcommand("synth", "write a synthetic Gerrit corpus");
  gerrit::SyntheticCorpusOptions synth_options;
  std::string synth_path;
  synth->add_option("--changes", synth_options.changes)->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_options.seed);
  synth->add_option("--developers", synth_options.developers)->check(CLI::PositiveNumber);
  synth->add_option("--out", synth_path, "output JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth->parsed()) {
      std::cout << cmd_synth(synth_options, synth_path);
      return 0;
    }
    const auto* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    RunConfig config = config_path.empty() ? parse_run_config("") : load_run_config(config_path);
    config.apply_overrides(seed, jobs, out ? std::optional<fs::path>(*out) : std::nullopt);
    CommandInput in;
    if (input) in.input = fs::path(*input);

    const auto started = std::chrono::steady_clock::now();
    std::string summary;
    if (command == "crawl") summary = cmd_crawl(config);
    if (command == "filter") summary = cmd_filter(config, in);
    if (command == "featurize") summary = cmd_featurize(config, in);
    if (command == "evaluate") summary = cmd_evaluate(config, in);
    if (command == "compare") summary = cmd_compare(config);
    if (command == "ablate") summary = cmd_ablate(config, in);
    if (command == "rank") summary = cmd_rank(config, in);
    if (command == "report") summary = cmd_report(config);
    std::cout << summary;
    if (command != "report") {
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      write_command_meta(config.out, command, std::vector<std::string>(argv, argv + argc), seconds);
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
