#include "revtime/preprocess/preprocess.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "revtime/core/error.h"

namespace revtime::preprocess {

std::string_view normalizer_name(NormalizerKind k) {
  switch (k) {
    case NormalizerKind::kNone: return "none";
    case NormalizerKind::kMinMax: return "minmax";
    case NormalizerKind::kZScore: return "zscore";
  }
  return "?";
}

std::optional<NormalizerKind> parse_normalizer(std::string_view name) {
  for (auto k : {NormalizerKind::kNone, NormalizerKind::kMinMax, NormalizerKind::kZScore}) {
    if (normalizer_name(k) == name) return k;
  }
  return std::nullopt;
}

NormalizerSpec fit_normalizer(NormalizerKind kind, const Matrix& train) {
  if (train.rows() == 0) throw Error(ErrorCode::kEmptyTrainingSet, "cannot fit a normalizer on 0 rows");
  NormalizerSpec spec{kind, {}, {}};
  if (kind == NormalizerKind::kNone) return spec;
  const std::size_t n = train.rows(), p = train.cols();
  spec.offset.assign(p, 0.0);
  spec.factor.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    if (kind == NormalizerKind::kMinMax) {
      double lo = train(0, j), hi = train(0, j);
      for (std::size_t r = 1; r < n; ++r) {
        lo = std::min(lo, train(r, j));
        hi = std::max(hi, train(r, j));
      }
      spec.offset[j] = lo;
      spec.factor[j] = hi > lo ? 1.0 / (hi - lo) : 0.0;
    } else {
      double mean = 0;
      for (std::size_t r = 0; r < n; ++r) mean += train(r, j);
      mean /= static_cast<double>(n);
      double var = 0;
      for (std::size_t r = 0; r < n; ++r) var += (train(r, j) - mean) * (train(r, j) - mean);
      const double sd = std::sqrt(var / static_cast<double>(n));
      spec.offset[j] = mean;
      spec.factor[j] = sd > 0 ? 1.0 / sd : 0.0;
    }
  }
  return spec;
}

Matrix apply_normalizer(const NormalizerSpec& spec, const Matrix& m) {
  if (spec.kind == NormalizerKind::kNone) return m;
  if (m.cols() != spec.offset.size() && m.rows() > 0) {
    throw Error(ErrorCode::kFeatureMismatch, "normalizer fitted on " +
                                                 std::to_string(spec.offset.size()) +
                                                 " columns, got " + std::to_string(m.cols()));
  }
  Matrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out(r, j) = spec.factor[j] == 0.0 ? 0.0 : (m(r, j) - spec.offset[j]) * spec.factor[j];
    }
  }
  return out;
}

FeatureMatrix apply_normalizer(const NormalizerSpec& spec, const FeatureMatrix& m) {
  FeatureMatrix out = m;
  out.values = apply_normalizer(spec, m.values);
  return out;
}

nlohmann::json to_json(const SelectionResult& r) {
  auto steps = nlohmann::json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"features", s.features}, {"validation_mae", s.validation_mae}});
  }
  return {{"selected", r.selected}, {"steps", steps}};
}

double holdout_mae(const ml::RegressorSpec& spec, const Matrix& x, std::span<const double> y) {
  const std::size_t n = x.rows();
  const std::size_t n_val = ml::inner_validation_size(n);
  if (n < 3 || n - n_val < 2) {
    throw Error(ErrorCode::kEmptyTrainingSet, "too few rows for an inner validation split");
  }
  const auto model = ml::fit(spec, x.row_range(0, n - n_val), y.subspan(0, n - n_val));
  const auto pred = model.predict(x.row_range(n - n_val, n));
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - y[n - n_val + i]);
  return s / static_cast<double>(pred.size());
}

namespace {

std::vector<std::string> names_of(const FeatureMatrix& m, const std::vector<std::size_t>& cols) {
  std::vector<std::string> out;
  for (auto c : cols) out.push_back(m.feature_names[c]);
  return out;
}

// Validation MAE of predicting the inner-training mean (no features).
double empty_model_mae(std::span<const double> y) {
  const std::size_t n = y.size();
  const std::size_t n_val = ml::inner_validation_size(n);
  if (n < 3 || n - n_val < 2) {
    throw Error(ErrorCode::kEmptyTrainingSet, "too few rows for an inner validation split");
  }
  double mean = 0;
  for (std::size_t i = 0; i < n - n_val; ++i) mean += y[i];
  mean /= static_cast<double>(n - n_val);
  double s = 0;
  for (std::size_t i = n - n_val; i < n; ++i) s += std::abs(mean - y[i]);
  return s / static_cast<double>(n_val);
}

SelectionResult finish(const FeatureMatrix& m, std::vector<std::size_t> cols,
                       std::vector<SelectionStep> steps) {
  std::sort(cols.begin(), cols.end());
  return {names_of(m, cols), std::move(cols), std::move(steps)};
}

}  // namespace

SelectionResult rfe_select(const ml::RegressorSpec& estimator, const FeatureMatrix& train,
                           std::size_t min_features) {
  if (!ml::has_importance(estimator.algorithm())) {
    throw Error(ErrorCode::kUnsupportedEstimator,
                std::string(ml::algorithm_name(estimator.algorithm())) +
                    " has no feature importance; use sequential selection");
  }
  if (train.values.rows() == 0) throw Error(ErrorCode::kEmptyTrainingSet, "empty training set");
  const std::size_t p = train.values.cols();
  min_features = std::clamp<std::size_t>(min_features, 1, p);
  const std::size_t n = train.values.rows();
  const std::size_t n_val = ml::inner_validation_size(n);
  if (n < 3 || n - n_val < 2) {
    throw Error(ErrorCode::kEmptyTrainingSet, "too few rows for an inner validation split");
  }
  const std::span<const double> y(train.targets);

  std::vector<std::size_t> current(p);
  std::iota(current.begin(), current.end(), 0);
  std::vector<SelectionStep> steps;
  std::vector<std::size_t> best = current;
  double best_mae = 0;
  while (true) {
    const Matrix x = train.values.select_columns(current);
    const auto model = ml::fit(estimator, x.row_range(0, n - n_val), y.subspan(0, n - n_val));
    const auto pred = model.predict(x.row_range(n - n_val, n));
    double mae = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) mae += std::abs(pred[i] - y[n - n_val + i]);
    mae /= static_cast<double>(pred.size());
    steps.push_back({names_of(train, current), mae});
    // Later steps have fewer features, so <= prefers the smaller set.
    if (steps.size() == 1 || mae <= best_mae) {
      best = current;
      best_mae = mae;
    }
    if (current.size() <= min_features) break;
    const auto imp = *model.importance();
    std::size_t drop = 0;
    for (std::size_t i = 1; i < imp.size(); ++i) {
      if (imp[i] <= imp[drop]) drop = i;
    }
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  return finish(train, std::move(best), std::move(steps));
}

SelectionResult sequential_forward_select(const ml::RegressorSpec& estimator,
                                          const FeatureMatrix& train, std::size_t max_features) {
  if (train.values.rows() == 0) throw Error(ErrorCode::kEmptyTrainingSet, "empty training set");
  const std::size_t p = train.values.cols();
  max_features = std::clamp<std::size_t>(max_features, 1, p);
  std::vector<std::size_t> chosen;
  std::vector<bool> used(p, false);
  std::vector<SelectionStep> steps;
  double current_mae = empty_model_mae(train.targets);
  while (chosen.size() < max_features) {
    std::optional<std::size_t> best;
    double best_mae = 0;
    for (std::size_t j = 0; j < p; ++j) {
      if (used[j]) continue;
      auto trial = chosen;
      trial.push_back(j);
      std::sort(trial.begin(), trial.end());
      const double mae =
          holdout_mae(estimator, train.values.select_columns(trial), train.targets);
      if (!best || mae < best_mae) {
        best = j;
        best_mae = mae;
      }
    }
    if (!best) break;
    // The result is never empty: a first feature that does not beat the
    // empty model is kept, and the search ends there.
    const bool improves = best_mae < current_mae;
    if (!chosen.empty() && !improves) break;
    chosen.push_back(*best);
    used[*best] = true;
    current_mae = best_mae;
    auto sorted = chosen;
    std::sort(sorted.begin(), sorted.end());
    steps.push_back({names_of(train, sorted), best_mae});
    if (!improves) break;
  }
  return finish(train, std::move(chosen), std::move(steps));
}

}  // namespace revtime::preprocess
