#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "revtime/features/features.h"
#include "revtime/ml/regressor.h"
#include "revtime/preprocess/preprocess.h"

namespace revtime::eval {

using features::FeatureMatrix;

inline constexpr std::size_t kFoldCount = 10;
inline constexpr int kIterations = 5;
inline constexpr int kGuessTrials = 1000;

struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const Range&) const = default;
};

struct FoldPlan {
  std::vector<Range> folds;

  // iteration in 1..5: train on folds 1..i+4, test on fold i+5.
  Range train(int iteration) const;
  Range test(int iteration) const;
};

FoldPlan make_online_folds(std::size_t n);

double mae(std::span<const double> pred, std::span<const double> actual);
double mre(std::span<const double> pred, std::span<const double> actual);
// Standardized accuracy in percent against random guessing from train targets.
double sa(std::span<const double> pred, std::span<const double> actual,
          std::span<const double> train_targets, std::uint64_t seed, int trials = kGuessTrials);
// Mean MAE of random guessing over `trials` draws.
double random_guess_mae(std::span<const double> actual, std::span<const double> train_targets,
                        std::uint64_t seed, int trials = kGuessTrials);

enum class SelectionMethod { kNone, kRfe, kSequential };
std::string_view selection_name(SelectionMethod m);
std::optional<SelectionMethod> parse_selection(std::string_view name);

struct PipelineConfig {
  std::string name;
  preprocess::NormalizerKind normalizer = preprocess::NormalizerKind::kNone;
  SelectionMethod selection = SelectionMethod::kNone;
  // RFE: minimum features kept; sequential: maximum features added. 0 = no limit.
  std::size_t selection_limit = 0;
  ml::HyperGrid grid{ml::Algorithm::kLR, {}};
  int repeats = 30;
  std::uint64_t base_seed = 0;
  int jobs = 1;

  void validate() const;
  // True when every repeat would produce the same records.
  bool deterministic() const;
};

// Seed of repeat r and the per-iteration seed for the random-guess baseline.
std::uint64_t repeat_seed(const PipelineConfig& c, int repeat);
std::uint64_t guess_seed(std::uint64_t repeat_seed, int iteration);

struct EvalRecord {
  int repeat = 0;
  int iteration = 0;
  Range train;
  Range test;
  double mae = 0;
  double mre = 0;
  double sa = 0;
  bool failed = false;
  std::string error;
  std::string chosen;  // spec picked by grid search
  std::size_t n_features = 0;

  std::size_t n_train() const { return train.size(); }
  std::size_t n_test() const { return test.size(); }
};

struct MetricSummary {
  double mean = 0;
  double median = 0;
};

struct EvalResult {
  std::string config_name;
  std::vector<EvalRecord> records;  // ordered by (repeat, iteration)
  bool any_failed = false;

  MetricSummary summary(double EvalRecord::*metric) const;
  std::vector<double> metric_values(double EvalRecord::*metric) const;
};

// Outcome of one (repeat, iteration) evaluation with predictions exposed.
struct IterationOutcome {
  EvalRecord record;
  std::vector<double> predictions;
};

IterationOutcome evaluate_iteration(const FeatureMatrix& data, const PipelineConfig& config,
                                    const FoldPlan& plan, int repeat, int iteration);

EvalResult run_online_validation(const FeatureMatrix& data, const PipelineConfig& config);

void write_eval_csv(const std::filesystem::path& path, const EvalResult& result);
EvalResult read_eval_csv(const std::filesystem::path& path, const std::string& name);
nlohmann::json eval_summary_json(const EvalResult& result, const PipelineConfig& config);

// Runs fn(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace revtime::eval
