#include "revtime/ml/regressor.h"

#include <charconv>
#include <cmath>
#include <limits>

#include "revtime/core/error.h"
#include "revtime/ml/models.h"

namespace revtime::ml {

namespace {

struct ParamDef {
  const char* name;
  double fallback;
  double min;
  bool min_exclusive;
  bool integer;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<ParamDef> param_defs(Algorithm a) {
  switch (a) {
    case Algorithm::kLR: return {};
    case Algorithm::kLaR: return {{"alpha", 1.0, 0, false, false}};
    case Algorithm::kRR: return {{"alpha", 1.0, 0, false, false}};
    case Algorithm::kBLaR: return {{"max_iter", 300, 1, false, true}};
    case Algorithm::kSVM:
      return {{"C", 1.0, 0, true, false}, {"epsilon", 0.1, 0, false, false},
              {"epochs", 50, 1, false, true}};
    case Algorithm::kKNN: return {{"k", 5, 1, false, true}};
    case Algorithm::kDT:
      return {{"max_depth", 0, 0, false, true}, {"min_samples_leaf", 1, 1, false, true}};
    case Algorithm::kRF:
      return {{"n_trees", 100, 1, false, true}, {"max_depth", 0, 0, false, true},
              {"min_samples_leaf", 1, 1, false, true}};
    case Algorithm::kAdaDT:
      return {{"rounds", 50, 1, false, true}, {"max_depth", 4, 1, false, true}};
    case Algorithm::kGB:
      return {{"learning_rate", 0.1, 0, true, false}, {"rounds", 100, 1, false, true},
              {"max_depth", 3, 1, false, true}};
    case Algorithm::kNN:
      return {{"hidden", 16, 1, false, true}, {"epochs", 100, 1, false, true},
              {"learning_rate", 0.01, 0, true, false}, {"batch_size", 32, 1, false, true},
              {"l2", 1e-4, 0, false, false}};
  }
  return {};
}

std::string short_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int as_int(double v) { return static_cast<int>(v); }

}  // namespace

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kLR: return "LR";
    case Algorithm::kLaR: return "LaR";
    case Algorithm::kRR: return "RR";
    case Algorithm::kBLaR: return "BLaR";
    case Algorithm::kSVM: return "SVM";
    case Algorithm::kKNN: return "KNN";
    case Algorithm::kDT: return "DT";
    case Algorithm::kNN: return "NN";
    case Algorithm::kRF: return "RF";
    case Algorithm::kAdaDT: return "AdaDT";
    case Algorithm::kGB: return "GB";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (auto a : kAllAlgorithms) {
    if (algorithm_name(a) == name) return a;
  }
  return std::nullopt;
}

bool is_deterministic(Algorithm a) {
  return a != Algorithm::kSVM && a != Algorithm::kNN && a != Algorithm::kRF;
}

bool has_importance(Algorithm a) { return a != Algorithm::kKNN && a != Algorithm::kNN; }

RegressorSpec::RegressorSpec(Algorithm algorithm, Hyperparameters hyper, std::uint64_t seed)
    : algorithm_(algorithm), seed_(seed) {
  const auto defs = param_defs(algorithm);
  for (const auto& [name, value] : hyper) {
    const auto it = std::find_if(defs.begin(), defs.end(),
                                 [&](const ParamDef& d) { return name == d.name; });
    if (it == defs.end()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown hyperparameter '" + name + "' for " +
                                                   std::string(algorithm_name(algorithm)));
    }
    const bool below = it->min_exclusive ? !(value > it->min) : !(value >= it->min);
    if (!std::isfinite(value) || below || (it->integer && value != std::floor(value))) {
      throw Error(ErrorCode::kInvalidArgument,
                  "invalid value " + short_double(value) + " for hyperparameter '" + name + "'");
    }
  }
  for (const auto& d : defs) {
    auto it = hyper.find(d.name);
    hyper_[d.name] = it == hyper.end() ? d.fallback : it->second;
  }
}

double RegressorSpec::param(const std::string& name) const {
  auto it = hyper_.find(name);
  if (it == hyper_.end()) throw Error(ErrorCode::kInvalidArgument, "no hyperparameter " + name);
  return it->second;
}

RegressorSpec RegressorSpec::with_seed(std::uint64_t seed) const {
  RegressorSpec s = *this;
  s.seed_ = seed;
  return s;
}

std::string RegressorSpec::describe() const {
  std::string out(algorithm_name(algorithm_));
  out += "(";
  bool first = true;
  for (const auto& [k, v] : hyper_) {
    if (!first) out += ", ";
    first = false;
    out += k + "=" + short_double(v);
  }
  return out + ")";
}

void to_json(nlohmann::json& j, const RegressorSpec& s) {
  j = {{"algorithm", algorithm_name(s.algorithm())}, {"hyperparameters", s.hyper()},
       {"seed", s.seed()}};
}

RegressorSpec regressor_spec_from_json(const nlohmann::json& j) {
  try {
    const auto name = j.at("algorithm").get<std::string>();
    const auto algo = parse_algorithm(name);
    if (!algo) throw Error(ErrorCode::kSchemaError, "unknown algorithm " + name);
    return RegressorSpec(*algo, j.at("hyperparameters").get<Hyperparameters>(),
                         j.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("regressor spec: ") + e.what());
  }
}

TrainedModel::TrainedModel(RegressorSpec spec, std::vector<std::string> feature_names,
                           std::size_t n_features, std::shared_ptr<const Model> model,
                           FitFlags flags)
    : spec_(std::move(spec)),
      feature_names_(std::move(feature_names)),
      n_features_(n_features),
      model_(std::move(model)),
      flags_(flags) {}

std::vector<double> TrainedModel::predict(const Matrix& x) const {
  if (x.cols() != n_features_ && !(x.rows() == 0 && x.cols() == 0)) {
    throw Error(ErrorCode::kFeatureMismatch, "model expects " + std::to_string(n_features_) +
                                                 " features, got " + std::to_string(x.cols()));
  }
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double v = model_->predict_one(x.row(r));
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kConvergenceFailure, "non-finite prediction");
    }
    out[r] = std::max(0.0, v);
  }
  return out;
}

std::vector<double> TrainedModel::predict(const Matrix& x,
                                          std::span<const std::string> feature_names) const {
  if (!feature_names_.empty() &&
      !std::equal(feature_names.begin(), feature_names.end(), feature_names_.begin(),
                  feature_names_.end())) {
    throw Error(ErrorCode::kFeatureMismatch, "feature ordering differs from fit");
  }
  return predict(x);
}

TrainedModel fit(const RegressorSpec& spec, const Matrix& x, std::span<const double> y,
                 std::vector<std::string> feature_names) {
  if (x.rows() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch, "X has " + std::to_string(x.rows()) +
                                                " rows but y has " + std::to_string(y.size()));
  }
  if (x.rows() < 2) throw Error(ErrorCode::kEmptyTrainingSet, "fit needs at least 2 rows");
  if (!feature_names.empty() && feature_names.size() != x.cols()) {
    throw Error(ErrorCode::kFeatureMismatch, "feature name count differs from columns");
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite feature value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite target");
  }

  FitFlags flags;
  std::shared_ptr<const Model> model;
  auto linear = [&](LinearFit f) {
    flags = f.flags;
    model = std::make_shared<LinearModel>(f.intercept, std::move(f.coef));
  };
  const auto& s = spec;
  switch (spec.algorithm()) {
    case Algorithm::kLR: linear(fit_least_squares(x, y, 0.0)); break;
    case Algorithm::kRR: linear(fit_least_squares(x, y, s.param("alpha"))); break;
    case Algorithm::kLaR: linear(fit_lasso(x, y, s.param("alpha"))); break;
    case Algorithm::kBLaR: linear(fit_bayesian_ridge(x, y, as_int(s.param("max_iter")))); break;
    case Algorithm::kSVM:
      linear(fit_linear_svr(x, y, s.param("C"), s.param("epsilon"), as_int(s.param("epochs")),
                            s.seed()));
      break;
    case Algorithm::kKNN:
      model = std::make_shared<KnnModel>(x, std::vector<double>(y.begin(), y.end()),
                                         static_cast<std::size_t>(s.param("k")));
      break;
    case Algorithm::kDT: {
      TreeOptions o;
      o.max_depth = as_int(s.param("max_depth"));
      o.min_samples_leaf = as_int(s.param("min_samples_leaf"));
      model = std::make_shared<TreeModel>(RegressionTree::fit(x, y, {}, o));
      break;
    }
    case Algorithm::kRF: {
      TreeOptions o;
      o.max_depth = as_int(s.param("max_depth"));
      o.min_samples_leaf = as_int(s.param("min_samples_leaf"));
      o.max_features = (x.cols() + 2) / 3;
      o.seed = s.seed();
      model = std::make_shared<ForestModel>(ForestModel::fit(x, y, as_int(s.param("n_trees")), o));
      break;
    }
    case Algorithm::kAdaDT:
      model = std::make_shared<AdaBoostModel>(
          AdaBoostModel::fit(x, y, as_int(s.param("rounds")), as_int(s.param("max_depth"))));
      break;
    case Algorithm::kGB:
      model = std::make_shared<GradientBoostingModel>(GradientBoostingModel::fit(
          x, y, s.param("learning_rate"), as_int(s.param("rounds")), as_int(s.param("max_depth"))));
      break;
    case Algorithm::kNN: {
      MlpOptions o;
      o.hidden = static_cast<std::size_t>(s.param("hidden"));
      o.epochs = as_int(s.param("epochs"));
      o.learning_rate = s.param("learning_rate");
      o.batch_size = static_cast<std::size_t>(s.param("batch_size"));
      o.l2 = s.param("l2");
      o.seed = s.seed();
      model = std::make_shared<MlpModel>(MlpModel::fit(x, y, o, &flags));
      break;
    }
  }
  return TrainedModel(spec, std::move(feature_names), x.cols(), std::move(model), flags);
}

// ---- serialization -------------------------------------------------------

namespace {

std::vector<RegressionTree> trees_from(const nlohmann::json& arr, std::size_t p) {
  std::vector<RegressionTree> out;
  for (const auto& t : arr) out.push_back(RegressionTree::from_json(t, p));
  if (out.empty()) throw Error(ErrorCode::kSchemaError, "ensemble without trees");
  return out;
}

}  // namespace

nlohmann::json model_to_json(const TrainedModel& m) {
  return {{"format_version", kModelFormatVersion},
          {"spec", m.spec()},
          {"feature_names", m.feature_names()},
          {"n_features", m.n_features()},
          {"flags",
           {{"singular_fallback", m.flags().singular_fallback},
            {"non_converged", m.flags().non_converged}}},
          {"state", m.model().state()}};
}

TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::kSchemaError, "unsupported model format version");
    }
    auto spec = regressor_spec_from_json(j.at("spec"));
    const auto p = j.at("n_features").get<std::size_t>();
    const auto& st = j.at("state");
    FitFlags flags{j.at("flags").at("singular_fallback").get<bool>(),
                   j.at("flags").at("non_converged").get<bool>()};
    std::shared_ptr<const Model> model;
    switch (spec.algorithm()) {
      case Algorithm::kLR:
      case Algorithm::kRR:
      case Algorithm::kLaR:
      case Algorithm::kBLaR:
      case Algorithm::kSVM: {
        auto coef = st.at("coef").get<std::vector<double>>();
        if (coef.size() != p) throw Error(ErrorCode::kSchemaError, "coefficient count");
        model = std::make_shared<LinearModel>(st.at("intercept").get<double>(), std::move(coef));
        break;
      }
      case Algorithm::kKNN: {
        const auto rows = st.at("rows").get<std::size_t>();
        const auto flat = st.at("x").get<std::vector<double>>();
        auto y = st.at("y").get<std::vector<double>>();
        if (flat.size() != rows * p || y.size() != rows) {
          throw Error(ErrorCode::kSchemaError, "knn state shape");
        }
        Matrix x(rows, p);
        std::copy(flat.begin(), flat.end(), &x(0, 0));
        model = std::make_shared<KnnModel>(std::move(x), std::move(y), st.at("k").get<std::size_t>());
        break;
      }
      case Algorithm::kDT:
        model = std::make_shared<TreeModel>(RegressionTree::from_json(st, p));
        break;
      case Algorithm::kRF:
        model = std::make_shared<ForestModel>(trees_from(st.at("trees"), p));
        break;
      case Algorithm::kAdaDT:
        model = std::make_shared<AdaBoostModel>(trees_from(st.at("trees"), p),
                                                st.at("weights").get<std::vector<double>>());
        break;
      case Algorithm::kGB:
        model = std::make_shared<GradientBoostingModel>(
            st.at("init").get<double>(), st.at("learning_rate").get<double>(),
            trees_from(st.at("trees"), p));
        break;
      case Algorithm::kNN: {
        MlpShape shape{st.at("inputs").get<std::size_t>(), st.at("hidden").get<std::size_t>()};
        auto params = st.at("params").get<std::vector<double>>();
        if (shape.inputs != p || params.size() != shape.parameter_count()) {
          throw Error(ErrorCode::kSchemaError, "mlp state shape");
        }
        model = std::make_shared<MlpModel>(shape, std::move(params), st.at("y_mean").get<double>(),
                                           st.at("y_scale").get<double>());
        break;
      }
    }
    return TrainedModel(std::move(spec), j.at("feature_names").get<std::vector<std::string>>(), p,
                        std::move(model), flags);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("model: ") + e.what());
  }
}

// ---- grid search ---------------------------------------------------------

std::vector<Hyperparameters> HyperGrid::points() const {
  std::vector<Hyperparameters> out{{}};
  for (const auto& [name, candidates] : values) {
    std::vector<Hyperparameters> next;
    for (const auto& partial : out) {
      for (double v : candidates) {
        auto h = partial;
        h[name] = v;
        next.push_back(std::move(h));
      }
    }
    out = std::move(next);
  }
  return out;
}

void HyperGrid::validate() const {
  for (const auto& [name, candidates] : values) {
    if (candidates.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "grid entry '" + name + "' has no candidates");
    }
  }
  for (const auto& h : points()) RegressorSpec(algorithm, h);
}

HyperGrid default_grid(Algorithm a) {
  switch (a) {
    case Algorithm::kLR: return {a, {}};
    case Algorithm::kLaR: return {a, {{"alpha", {0.01, 0.1, 1.0}}}};
    case Algorithm::kRR: return {a, {{"alpha", {0.1, 1.0, 10.0}}}};
    case Algorithm::kBLaR: return {a, {}};
    case Algorithm::kSVM: return {a, {{"C", {0.1, 1.0, 10.0}}, {"epsilon", {0.01, 0.1}}}};
    case Algorithm::kKNN: return {a, {{"k", {1, 3, 5, 10, 20}}}};
    case Algorithm::kDT:
      return {a, {{"max_depth", {4, 8, 16, 0}}, {"min_samples_leaf", {1, 5, 20}}}};
    case Algorithm::kRF: return {a, {{"n_trees", {100, 300}}}};
    case Algorithm::kAdaDT: return {a, {{"rounds", {50, 100}}}};
    case Algorithm::kGB: return {a, {{"learning_rate", {0.05, 0.1}}, {"rounds", {100, 300}}}};
    case Algorithm::kNN: return {a, {{"hidden", {16, 64}}, {"epochs", {100}}}};
  }
  return {a, {}};
}

std::size_t inner_validation_size(std::size_t n) { return std::max<std::size_t>(1, n / 5); }

GridSearchResult grid_search_detailed(const HyperGrid& grid, const Matrix& x,
                                      std::span<const double> y, std::uint64_t seed) {
  grid.validate();
  const auto points = grid.points();
  GridSearchResult result{RegressorSpec(grid.algorithm, points.front(), seed), {}};
  if (points.size() == 1) {
    result.point_mae.push_back(std::nullopt);
    return result;
  }
  const std::size_t n = x.rows();
  const std::size_t n_val = inner_validation_size(n);
  if (n < 3 || n - n_val < 2) {
    throw Error(ErrorCode::kEmptyTrainingSet, "too few rows for an inner validation split");
  }
  const Matrix x_fit = x.row_range(0, n - n_val);
  const Matrix x_val = x.row_range(n - n_val, n);
  const auto y_fit = y.subspan(0, n - n_val);
  const auto y_val = y.subspan(n - n_val);

  std::optional<std::size_t> best;
  double best_mae = 0;
  std::string last_error;
  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      const RegressorSpec spec(grid.algorithm, points[i], seed);
      const auto model = fit(spec, x_fit, y_fit);
      const auto pred = model.predict(x_val);
      double mae = 0;
      for (std::size_t r = 0; r < pred.size(); ++r) mae += std::abs(pred[r] - y_val[r]);
      mae /= static_cast<double>(pred.size());
      result.point_mae.push_back(mae);
      if (!best || mae < best_mae) {
        best = i;
        best_mae = mae;
      }
    } catch (const Error& e) {
      result.point_mae.push_back(std::nullopt);
      last_error = e.what();
    }
  }
  if (!best) throw Error(ErrorCode::kAllPointsFailed, "every grid point failed: " + last_error);
  result.best = RegressorSpec(grid.algorithm, points[*best], seed);
  return result;
}

RegressorSpec grid_search(const HyperGrid& grid, const Matrix& x, std::span<const double> y,
                          std::uint64_t seed) {
  return grid_search_detailed(grid, x, y, seed).best;
}

}  // namespace revtime::ml
