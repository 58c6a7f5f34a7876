#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "revtime/core/matrix.h"
#include "revtime/features/features.h"
#include "revtime/ml/regressor.h"

namespace revtime::preprocess {

using features::FeatureMatrix;

enum class NormalizerKind { kNone, kMinMax, kZScore };

std::string_view normalizer_name(NormalizerKind k);
std::optional<NormalizerKind> parse_normalizer(std::string_view name);

// Per-column affine map v -> (v - offset) * factor. factor is 0 for
// degenerate columns, which sends them to 0.
struct NormalizerSpec {
  NormalizerKind kind = NormalizerKind::kNone;
  std::vector<double> offset;
  std::vector<double> factor;

  bool fitted() const { return kind == NormalizerKind::kNone || !offset.empty(); }
  bool operator==(const NormalizerSpec&) const = default;
};

NormalizerSpec fit_normalizer(NormalizerKind kind, const Matrix& train);
Matrix apply_normalizer(const NormalizerSpec& spec, const Matrix& m);
FeatureMatrix apply_normalizer(const NormalizerSpec& spec, const FeatureMatrix& m);

struct SelectionStep {
  std::vector<std::string> features;
  double validation_mae = 0;
};

struct SelectionResult {
  std::vector<std::string> selected;
  std::vector<std::size_t> columns;  // indices into the input matrix, ascending
  std::vector<SelectionStep> steps;
};

nlohmann::json to_json(const SelectionResult& r);

// Fits on the first 80% of rows (chronological) and returns validation MAE
// on the rest.
double holdout_mae(const ml::RegressorSpec& spec, const Matrix& x, std::span<const double> y);

SelectionResult rfe_select(const ml::RegressorSpec& estimator, const FeatureMatrix& train,
                           std::size_t min_features);
SelectionResult sequential_forward_select(const ml::RegressorSpec& estimator,
                                          const FeatureMatrix& train, std::size_t max_features);

}  // namespace revtime::preprocess
