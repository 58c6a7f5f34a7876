#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "revtime/ml/regressor.h"

namespace revtime::ml {

// ---- linear family -------------------------------------------------------

struct LinearFit {
  double intercept = 0;
  std::vector<double> coef;
  FitFlags flags;
  int iterations = 0;
};

// Ordinary (lambda = 0) or ridge least squares with an unpenalized
// intercept. A singular OLS system is retried with lambda = 1e-8 and flagged.
LinearFit fit_least_squares(const Matrix& x, std::span<const double> y, double lambda);

// (1/2n)||y - Xb - c||^2 + alpha ||b||_1 by cyclic coordinate descent.
LinearFit fit_lasso(const Matrix& x, std::span<const double> y, double alpha, double tol = 1e-7,
                    int max_sweeps = 10000);

// Evidence-approximation Bayesian ridge.
LinearFit fit_bayesian_ridge(const Matrix& x, std::span<const double> y, int max_iter = 300,
                             double tol = 1e-3);

// Linear epsilon-insensitive SVR, averaged subgradient descent.
LinearFit fit_linear_svr(const Matrix& x, std::span<const double> y, double c, double epsilon,
                         int epochs, std::uint64_t seed);

class LinearModel : public Model {
 public:
  LinearModel(double intercept, std::vector<double> coef)
      : intercept_(intercept), coef_(std::move(coef)) {}
  double predict_one(std::span<const double> x) const override;
  std::optional<std::vector<double>> importance() const override;
  nlohmann::json state() const override;

  double intercept() const { return intercept_; }
  const std::vector<double>& coef() const { return coef_; }

 private:
  double intercept_;
  std::vector<double> coef_;
};

// ---- nearest neighbours --------------------------------------------------

class KnnModel : public Model {
 public:
  KnnModel(Matrix x, std::vector<double> y, std::size_t k);
  double predict_one(std::span<const double> x) const override;
  nlohmann::json state() const override;

  // Indices of the k nearest training rows, nearest first; ties by index.
  std::vector<std::size_t> neighbors(std::span<const double> x) const;
  std::size_t k() const { return k_; }

 private:
  Matrix x_;
  std::vector<double> y_;
  std::size_t k_;
};

// ---- trees ---------------------------------------------------------------

struct TreeOptions {
  int max_depth = 0;  // 0 = unbounded
  int min_samples_leaf = 1;
  std::size_t max_features = 0;  // 0 = all
  std::uint64_t seed = 0;
};

class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    double value = 0;
  };

  // CART with weighted variance reduction. Rows with zero weight are
  // ignored. Empty weights means all ones.
  static RegressionTree fit(const Matrix& x, std::span<const double> y,
                            std::span<const double> weights, const TreeOptions& options);

  double predict(std::span<const double> x) const;
  // Total weighted SSE reduction per feature.
  const std::vector<double>& gains() const { return gains_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  int depth() const;

  nlohmann::json to_json() const;
  static RegressionTree from_json(const nlohmann::json& j, std::size_t n_features);

 private:
  std::vector<Node> nodes_;
  std::vector<double> gains_;
};

std::vector<double> normalized(std::vector<double> v);

class TreeModel : public Model {
 public:
  explicit TreeModel(RegressionTree tree) : tree_(std::move(tree)) {}
  double predict_one(std::span<const double> x) const override { return tree_.predict(x); }
  std::optional<std::vector<double>> importance() const override;
  nlohmann::json state() const override;
  const RegressionTree& tree() const { return tree_; }

 private:
  RegressionTree tree_;
};

class ForestModel : public Model {
 public:
  static ForestModel fit(const Matrix& x, std::span<const double> y, int n_trees,
                         const TreeOptions& options);
  explicit ForestModel(std::vector<RegressionTree> trees) : trees_(std::move(trees)) {}
  double predict_one(std::span<const double> x) const override;
  std::optional<std::vector<double>> importance() const override;
  nlohmann::json state() const override;
  const std::vector<RegressionTree>& trees() const { return trees_; }

 private:
  std::vector<RegressionTree> trees_;
};

// AdaBoost.R2, linear loss, weighted-median combination.
class AdaBoostModel : public Model {
 public:
  static AdaBoostModel fit(const Matrix& x, std::span<const double> y, int rounds, int max_depth);
  AdaBoostModel(std::vector<RegressionTree> trees, std::vector<double> weights)
      : trees_(std::move(trees)), weights_(std::move(weights)) {}
  double predict_one(std::span<const double> x) const override;
  std::optional<std::vector<double>> importance() const override;
  nlohmann::json state() const override;
  const std::vector<RegressionTree>& trees() const { return trees_; }
  const std::vector<double>& estimator_weights() const { return weights_; }

 private:
  std::vector<RegressionTree> trees_;
  std::vector<double> weights_;
};

// Squared-loss gradient boosting from the mean.
class GradientBoostingModel : public Model {
 public:
  static GradientBoostingModel fit(const Matrix& x, std::span<const double> y, double learning_rate,
                                   int rounds, int max_depth);
  GradientBoostingModel(double init, double learning_rate, std::vector<RegressionTree> trees)
      : init_(init), learning_rate_(learning_rate), trees_(std::move(trees)) {}
  double predict_one(std::span<const double> x) const override;
  // Prediction using only the first `stages` trees.
  double predict_staged(std::span<const double> x, std::size_t stages) const;
  std::optional<std::vector<double>> importance() const override;
  nlohmann::json state() const override;
  const std::vector<RegressionTree>& trees() const { return trees_; }
  // Training MSE and MAE after each round (index 0 = initial constant).
  const std::vector<double>& training_mse() const { return training_mse_; }
  const std::vector<double>& training_mae() const { return training_mae_; }

 private:
  double init_;
  double learning_rate_;
  std::vector<RegressionTree> trees_;
  std::vector<double> training_mse_;
  std::vector<double> training_mae_;
};

// ---- neural network ------------------------------------------------------

// One hidden ReLU layer. Flat parameter layout: W1 (hidden x inputs,
// row-major), b1 (hidden), w2 (hidden), b2.
struct MlpShape {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::size_t parameter_count() const { return hidden * inputs + 2 * hidden + 1; }
};

double mlp_forward(const MlpShape& shape, std::span<const double> params,
                   std::span<const double> x);

// 0.5 * mean squared error + 0.5 * l2 * (|W1|^2 + |w2|^2) over the given rows.
double mlp_loss_and_gradient(const MlpShape& shape, std::span<const double> params,
                             const Matrix& x, std::span<const double> y,
                             std::span<const std::size_t> rows, double l2,
                             std::vector<double>* gradient);

struct MlpOptions {
  std::size_t hidden = 16;
  int epochs = 100;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

class MlpModel : public Model {
 public:
  static MlpModel fit(const Matrix& x, std::span<const double> y, const MlpOptions& options,
                      FitFlags* flags);
  MlpModel(MlpShape shape, std::vector<double> params, double y_mean, double y_scale)
      : shape_(shape), params_(std::move(params)), y_mean_(y_mean), y_scale_(y_scale) {}
  double predict_one(std::span<const double> x) const override;
  nlohmann::json state() const override;

 private:
  MlpShape shape_;
  std::vector<double> params_;
  double y_mean_;
  double y_scale_;
};

// Seed derivation shared by stochastic components.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace revtime::ml
