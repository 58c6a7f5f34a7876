#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "revtime/cli/run_config.h"
#include "revtime/core/error.h"

namespace revtime::cli {

// Run directory layout shared by every command.
namespace layout {
inline constexpr const char* kDataset = "dataset";
inline constexpr const char* kFiltered = "filtered";
inline constexpr const char* kFilterReport = "filter_report.json";
inline constexpr const char* kFeatures = "features.csv";
inline constexpr const char* kEval = "eval";
inline constexpr const char* kCompare = "compare";
inline constexpr const char* kAblation = "ablation";
inline constexpr const char* kRank = "rank";
inline constexpr const char* kMeta = "meta";
inline constexpr const char* kReport = "report.md";
}  // namespace layout

// Each command reads inputs from the run directory (config.out) unless an
// explicit input is given, writes its machine-readable results there, and
// returns a human-readable summary (also written to <command>.summary.txt).
struct CommandInput {
  std::optional<std::filesystem::path> input;
};

std::string cmd_crawl(const RunConfig& config);
std::string cmd_filter(const RunConfig& config, const CommandInput& in = {});
std::string cmd_featurize(const RunConfig& config, const CommandInput& in = {});
std::string cmd_evaluate(const RunConfig& config, const CommandInput& in = {});
std::string cmd_compare(const RunConfig& config);
std::string cmd_ablate(const RunConfig& config, const CommandInput& in = {});
std::string cmd_rank(const RunConfig& config, const CommandInput& in = {});
std::string cmd_report(const RunConfig& config);

// Writes a synthetic Gerrit corpus (fixture format) to `path`.
std::string cmd_synth(const gerrit::SyntheticCorpusOptions& options, const std::filesystem::path& path);

// Wall-clock and invocation details go to meta/<command>.json so the
// results themselves stay byte-identical across reruns.
void write_command_meta(const std::filesystem::path& out, const std::string& command,
                        const std::vector<std::string>& argv, double seconds);

// Files under `out` (relative, generic form, sorted), excluding the report.
std::vector<std::string> run_artifacts(const std::filesystem::path& out);

// Process exit code for an error category: 10 + the category's index.
int exit_code_for(ErrorCode code);

}  // namespace revtime::cli
