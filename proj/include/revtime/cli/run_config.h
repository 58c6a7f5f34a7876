#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "revtime/dataset/dataset.h"
#include "revtime/eval/evaluation.h"
#include "revtime/features/features.h"
#include "revtime/gerrit/client.h"
#include "revtime/gerrit/synthetic.h"

namespace revtime::cli {

// Where `crawl` gets its changes from when no live server is wanted.
struct CrawlSource {
  std::optional<std::filesystem::path> fixture;  // JSON array of change documents
  std::optional<gerrit::SyntheticCorpusOptions> synthetic;
  bool offline() const { return fixture || synthetic; }
};

// Importance units: every feature column, the six dimensions, or a list.
struct ImportanceSettings {
  std::string pipeline;  // empty = first pipeline
  std::vector<std::string> units;
  bool all_features = false;
  bool dimensions = true;
};

struct RunConfig {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::filesystem::path out = "run";

  gerrit::CrawlConfig crawl;
  CrawlSource source;
  FilterPolicy filter;
  features::FeaturizeOptions features;
  std::vector<eval::PipelineConfig> pipelines;
  std::string ablation_pipeline;  // empty = first pipeline
  ImportanceSettings importance;

  // Pipeline by name, or the first one for an empty name. Throws ConfigError.
  const eval::PipelineConfig& pipeline(const std::string& name) const;

  // Re-derives every pipeline's base seed and job count from seed/jobs.
  void apply_overrides(std::optional<std::uint64_t> seed, std::optional<int> jobs,
                       std::optional<std::filesystem::path> out);
};

// Seed of a pipeline: mix of the run seed and a hash of its name, so adding
// a pipeline never changes the others.
std::uint64_t pipeline_seed(std::uint64_t run_seed, const std::string& name);

// Parses YAML text. Relative fixture paths resolve against `base_dir`.
// Throws Error(kConfigError) naming the offending key and its line.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace revtime::cli
