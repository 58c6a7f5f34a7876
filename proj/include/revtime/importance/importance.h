#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "revtime/eval/evaluation.h"
#include "revtime/stats/stats.h"

namespace revtime::importance {

using eval::FeatureMatrix;
using eval::PipelineConfig;

// Column indices covered by a unit: a feature name present in the matrix,
// or a dimension name. Throws UnknownUnit.
std::vector<std::size_t> unit_columns(const FeatureMatrix& data, const std::string& unit);

// Per-(repeat, iteration) MAE_minus - MAE_full, in record order.
std::vector<double> loco_deltas(const eval::EvalResult& full, const eval::EvalResult& minus);

// Runs the protocol with the unit removed and returns the delta distribution
// against `full` (a run of the same config over all columns).
std::vector<double> loco_importance(const FeatureMatrix& data, const PipelineConfig& config,
                                    const std::string& unit, const eval::EvalResult& full);
std::vector<double> loco_importance(const FeatureMatrix& data, const PipelineConfig& config,
                                    const std::string& unit);

struct ImportanceResult {
  std::vector<std::string> units;
  std::map<std::string, std::vector<double>> deltas;
  eval::EvalResult full;
  stats::EsdRanking ranking;
  std::string fingerprint;
};

// Descending Scott-Knott ESD over deltas shifted by their global minimum.
stats::EsdRanking rank_features(const std::map<std::string, std::vector<double>>& deltas);

// LOCO for every unit with selection disabled, then ranking.
ImportanceResult loco_all(const FeatureMatrix& data, PipelineConfig config,
                          const std::vector<std::string>& units);

void write_importance_csv(const std::filesystem::path& path, const ImportanceResult& r);
void write_ranking_csv(const std::filesystem::path& path, const stats::EsdRanking& ranking);

struct AblationResult {
  std::vector<std::string> modes;  // "all" first, then dimensions
  std::map<std::string, eval::EvalResult> results;
  std::vector<stats::ComparisonResult> comparisons;  // all vs each, on MAE
};

inline constexpr const char* kAllMode = "all";

AblationResult dimension_ablation(const FeatureMatrix& data, const PipelineConfig& config);
// Only "all" plus the named dimension.
AblationResult dimension_ablation(const FeatureMatrix& data, const PipelineConfig& config,
                                  features::Dimension only);

// Pairs records by (repeat, iteration) and compares the metric.
stats::ComparisonResult compare_results(const eval::EvalResult& a, const eval::EvalResult& b,
                                        double eval::EvalRecord::*metric);

void write_comparisons_csv(const std::filesystem::path& path,
                           const std::vector<stats::ComparisonResult>& rows);

}  // namespace revtime::importance
