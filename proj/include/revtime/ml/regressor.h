#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "revtime/core/matrix.h"

namespace revtime::ml {

enum class Algorithm { kLR, kLaR, kRR, kBLaR, kSVM, kKNN, kDT, kNN, kRF, kAdaDT, kGB };

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::kLR,  Algorithm::kLaR, Algorithm::kRR, Algorithm::kBLaR,
    Algorithm::kSVM, Algorithm::kKNN, Algorithm::kDT, Algorithm::kNN,
    Algorithm::kRF,  Algorithm::kAdaDT, Algorithm::kGB};

std::string_view algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

// Algorithms whose fit ignores the seed.
bool is_deterministic(Algorithm a);
bool has_importance(Algorithm a);

using Hyperparameters = std::map<std::string, double>;

// Validated algorithm + hyperparameters + seed. Missing hyperparameters are
// filled with defaults; unknown names or out-of-range values throw
// InvalidArgument.
class RegressorSpec {
 public:
  RegressorSpec(Algorithm algorithm, Hyperparameters hyper = {}, std::uint64_t seed = 0);

  Algorithm algorithm() const { return algorithm_; }
  const Hyperparameters& hyper() const { return hyper_; }
  double param(const std::string& name) const;
  std::uint64_t seed() const { return seed_; }
  RegressorSpec with_seed(std::uint64_t seed) const;

  std::string describe() const;
  bool operator==(const RegressorSpec&) const = default;

 private:
  Algorithm algorithm_;
  Hyperparameters hyper_;
  std::uint64_t seed_;
};

void to_json(nlohmann::json& j, const RegressorSpec& s);
RegressorSpec regressor_spec_from_json(const nlohmann::json& j);

struct FitFlags {
  bool singular_fallback = false;
  bool non_converged = false;
};

class Model {
 public:
  virtual ~Model() = default;
  virtual double predict_one(std::span<const double> x) const = 0;
  virtual std::optional<std::vector<double>> importance() const { return std::nullopt; }
  virtual nlohmann::json state() const = 0;
};

class TrainedModel {
 public:
  TrainedModel(RegressorSpec spec, std::vector<std::string> feature_names, std::size_t n_features,
               std::shared_ptr<const Model> model, FitFlags flags);

  const RegressorSpec& spec() const { return spec_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  std::size_t n_features() const { return n_features_; }
  const FitFlags& flags() const { return flags_; }
  const Model& model() const { return *model_; }
  std::optional<std::vector<double>> importance() const { return model_->importance(); }

  // Clipped at 0.
  std::vector<double> predict(const Matrix& x) const;
  std::vector<double> predict(const Matrix& x, std::span<const std::string> feature_names) const;

 private:
  RegressorSpec spec_;
  std::vector<std::string> feature_names_;
  std::size_t n_features_;
  std::shared_ptr<const Model> model_;
  FitFlags flags_;
};

TrainedModel fit(const RegressorSpec& spec, const Matrix& x, std::span<const double> y,
                 std::vector<std::string> feature_names = {});

inline constexpr int kModelFormatVersion = 1;
nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

struct HyperGrid {
  Algorithm algorithm;
  std::map<std::string, std::vector<double>> values;

  // Cartesian product, keys in lexicographic order, last key fastest.
  std::vector<Hyperparameters> points() const;
  void validate() const;
};

HyperGrid default_grid(Algorithm a);

// Chronological holdout: the last max(1, n/5) rows validate.
std::size_t inner_validation_size(std::size_t n);

struct GridSearchResult {
  RegressorSpec best;
  std::vector<std::optional<double>> point_mae;  // nullopt for failed points
};

GridSearchResult grid_search_detailed(const HyperGrid& grid, const Matrix& x,
                                      std::span<const double> y, std::uint64_t seed);
RegressorSpec grid_search(const HyperGrid& grid, const Matrix& x, std::span<const double> y,
                          std::uint64_t seed);

}  // namespace revtime::ml
