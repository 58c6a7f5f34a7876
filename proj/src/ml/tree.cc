#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "revtime/core/error.h"
#include "revtime/ml/models.h"

namespace revtime::ml {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over seed ^ stream-offset
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<double> normalized(std::vector<double> v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (total > 0) {
    for (auto& x : v) x /= total;
  }
  return v;
}

namespace {

struct Builder {
  const Matrix& x;
  std::span<const double> y;
  std::vector<double> w;
  TreeOptions opt;
  std::mt19937_64 rng;
  std::vector<RegressionTree::Node>& nodes;
  std::vector<double>& gains;
  std::vector<std::size_t> feature_pool;
  std::vector<std::pair<double, std::size_t>> buf;
  std::map<std::size_t, std::vector<double>> distinct;  // per feature, all rows

  // Midpoint between v and the next larger value of the column over every
  // training row, so no training value sits between the split and threshold.
  double threshold_after(std::size_t f, double v) {
    auto& d = distinct[f];
    if (d.empty()) {
      d.reserve(x.rows());
      for (std::size_t r = 0; r < x.rows(); ++r) d.push_back(x(r, f));
      std::sort(d.begin(), d.end());
      d.erase(std::unique(d.begin(), d.end()), d.end());
    }
    const double next = *std::upper_bound(d.begin(), d.end(), v);
    const double mid = v + (next - v) / 2;
    return mid < next ? mid : v;
  }

  struct Split {
    int feature = -1;
    double threshold = 0;
    double gain = 0;
  };

  std::vector<std::size_t> candidate_features() {
    const std::size_t p = x.cols();
    if (opt.max_features == 0 || opt.max_features >= p) return feature_pool;
    std::vector<std::size_t> pool = feature_pool;
    for (std::size_t i = 0; i < opt.max_features; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, p - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(opt.max_features);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  Split best_split(const std::vector<std::size_t>& rows, double w_total, double s_total) {
    Split best;
    const std::size_t n = rows.size();
    const std::size_t leaf = static_cast<std::size_t>(opt.min_samples_leaf);
    const double parent = s_total * s_total / w_total;
    for (auto f : candidate_features()) {
      buf.resize(n);
      for (std::size_t i = 0; i < n; ++i) buf[i] = {x(rows[i], f), rows[i]};
      std::sort(buf.begin(), buf.end());
      if (buf.front().first == buf.back().first) continue;
      double wl = 0, sl = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto r = buf[i].second;
        wl += w[r];
        sl += w[r] * y[r];
        if (buf[i].first == buf[i + 1].first) continue;
        if (i + 1 < leaf || n - (i + 1) < leaf) continue;
        const double wr = w_total - wl;
        const double sr = s_total - sl;
        if (!(wl > 0) || !(wr > 0)) continue;
        const double gain = sl * sl / wl + sr * sr / wr - parent;
        if (gain > best.gain) best = {static_cast<int>(f), buf[i].first, gain};
      }
    }
    if (best.feature >= 0) {
      best.threshold = threshold_after(static_cast<std::size_t>(best.feature), best.threshold);
    }
    return best;
  }

  int build(std::vector<std::size_t> rows, int depth) {
    double w_total = 0, s_total = 0;
    for (auto r : rows) {
      w_total += w[r];
      s_total += w[r] * y[r];
    }
    const double mean = s_total / w_total;
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({-1, 0, -1, -1, mean});

    double sse = 0, scale = 0;
    for (auto r : rows) {
      sse += w[r] * (y[r] - mean) * (y[r] - mean);
      scale += w[r] * y[r] * y[r];
    }
    const bool depth_ok = opt.max_depth == 0 || depth < opt.max_depth;
    const bool size_ok = rows.size() >= 2 * static_cast<std::size_t>(opt.min_samples_leaf);
    if (!depth_ok || !size_ok || sse <= 1e-14 * scale) return id;

    const Split s = best_split(rows, w_total, s_total);
    if (s.feature < 0 || !(s.gain > 1e-12 * sse)) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (x(r, static_cast<std::size_t>(s.feature)) <= s.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    gains[static_cast<std::size_t>(s.feature)] += s.gain;
    const int l = build(std::move(left), depth + 1);
    const int r = build(std::move(right), depth + 1);
    auto& node = nodes[static_cast<std::size_t>(id)];
    node.feature = s.feature;
    node.threshold = s.threshold;
    node.left = l;
    node.right = r;
    return id;
  }
};

}  // namespace

RegressionTree RegressionTree::fit(const Matrix& x, std::span<const double> y,
                                   std::span<const double> weights, const TreeOptions& options) {
  if (x.rows() == 0) throw Error(ErrorCode::kEmptyTrainingSet, "tree needs at least one row");
  RegressionTree tree;
  tree.gains_.assign(x.cols(), 0.0);
  std::vector<double> w = weights.empty() ? std::vector<double>(x.rows(), 1.0)
                                          : std::vector<double>(weights.begin(), weights.end());
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (w[r] > 0) rows.push_back(r);
  }
  if (rows.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "all sample weights are zero");
  std::vector<std::size_t> pool(x.cols());
  std::iota(pool.begin(), pool.end(), 0);
  Builder b{x, y, std::move(w), options, std::mt19937_64(options.seed), tree.nodes_, tree.gains_,
            std::move(pool), {}, {}};
  b.build(std::move(rows), 0);
  return tree;
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                         : n.right);
  }
  return nodes_[i].value;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes_[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

nlohmann::json RegressionTree::to_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& n : nodes_) arr.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  return {{"nodes", arr}, {"gains", gains_}};
}

RegressionTree RegressionTree::from_json(const nlohmann::json& j, std::size_t n_features) {
  RegressionTree t;
  for (const auto& n : j.at("nodes")) {
    t.nodes_.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(),
                        n.at(3).get<int>(), n.at(4).get<double>()});
  }
  t.gains_ = j.at("gains").get<std::vector<double>>();
  const auto count = static_cast<int>(t.nodes_.size());
  if (t.nodes_.empty() || t.gains_.size() != n_features) {
    throw Error(ErrorCode::kSchemaError, "tree state does not match feature count");
  }
  for (const auto& n : t.nodes_) {
    if (n.feature >= 0 && (n.feature >= static_cast<int>(n_features) || n.left <= 0 ||
                           n.right <= 0 || n.left >= count || n.right >= count)) {
      throw Error(ErrorCode::kSchemaError, "tree node out of range");
    }
  }
  return t;
}

std::optional<std::vector<double>> TreeModel::importance() const {
  return normalized(tree_.gains());
}

nlohmann::json TreeModel::state() const { return tree_.to_json(); }

// ---- random forest -------------------------------------------------------

ForestModel ForestModel::fit(const Matrix& x, std::span<const double> y, int n_trees,
                             const TreeOptions& options) {
  const std::size_t n = x.rows();
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(n_trees));
  std::vector<double> weights(n);
  for (int t = 0; t < n_trees; ++t) {
    const auto tree_seed = mix_seed(options.seed, static_cast<std::uint64_t>(t));
    std::mt19937_64 rng(tree_seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::fill(weights.begin(), weights.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) weights[pick(rng)] += 1.0;
    TreeOptions o = options;
    o.seed = mix_seed(tree_seed, 1);
    trees.push_back(RegressionTree::fit(x, y, weights, o));
  }
  return ForestModel(std::move(trees));
}

double ForestModel::predict_one(std::span<const double> x) const {
  double s = 0;
  for (const auto& t : trees_) s += t.predict(x);
  return s / static_cast<double>(trees_.size());
}

std::optional<std::vector<double>> ForestModel::importance() const {
  std::vector<double> total(trees_.front().gains().size(), 0.0);
  for (const auto& t : trees_) {
    const auto g = normalized(t.gains());
    for (std::size_t i = 0; i < g.size(); ++i) total[i] += g[i];
  }
  return normalized(std::move(total));
}

nlohmann::json ForestModel::state() const {
  auto arr = nlohmann::json::array();
  for (const auto& t : trees_) arr.push_back(t.to_json());
  return {{"trees", arr}};
}

// ---- AdaBoost.R2 ---------------------------------------------------------

AdaBoostModel AdaBoostModel::fit(const Matrix& x, std::span<const double> y, int rounds,
                                 int max_depth) {
  const std::size_t n = x.rows();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<RegressionTree> trees;
  std::vector<double> alphas;
  TreeOptions opt;
  opt.max_depth = max_depth;
  std::vector<double> loss(n);
  for (int m = 0; m < rounds; ++m) {
    auto tree = RegressionTree::fit(x, y, w, opt);
    double max_err = 0;
    for (std::size_t i = 0; i < n; ++i) {
      loss[i] = std::abs(tree.predict(x.row(i)) - y[i]);
      max_err = std::max(max_err, loss[i]);
    }
    if (max_err == 0) {
      trees.push_back(std::move(tree));
      alphas.push_back(1.0);
      break;
    }
    double avg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      loss[i] /= max_err;
      avg += w[i] * loss[i];
    }
    if (avg <= 0) {
      trees.push_back(std::move(tree));
      alphas.push_back(1.0);
      break;
    }
    if (avg >= 0.5) {
      if (trees.empty()) {
        trees.push_back(std::move(tree));
        alphas.push_back(1.0);
      }
      break;
    }
    const double beta = avg / (1 - avg);
    trees.push_back(std::move(tree));
    alphas.push_back(std::log(1 / beta));
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::pow(beta, 1 - loss[i]);
      total += w[i];
    }
    for (auto& v : w) v /= total;
  }
  return AdaBoostModel(std::move(trees), std::move(alphas));
}

double AdaBoostModel::predict_one(std::span<const double> x) const {
  std::vector<std::pair<double, double>> preds(trees_.size());
  double total = 0;
  for (std::size_t i = 0; i < trees_.size(); ++i) {
    preds[i] = {trees_[i].predict(x), weights_[i]};
    total += weights_[i];
  }
  std::sort(preds.begin(), preds.end());
  double cum = 0;
  for (const auto& [p, wt] : preds) {
    cum += wt;
    if (cum >= 0.5 * total) return p;
  }
  return preds.back().first;
}

std::optional<std::vector<double>> AdaBoostModel::importance() const {
  std::vector<double> total(trees_.front().gains().size(), 0.0);
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    const auto g = normalized(trees_[t].gains());
    for (std::size_t i = 0; i < g.size(); ++i) total[i] += weights_[t] * g[i];
  }
  return normalized(std::move(total));
}

nlohmann::json AdaBoostModel::state() const {
  auto arr = nlohmann::json::array();
  for (const auto& t : trees_) arr.push_back(t.to_json());
  return {{"trees", arr}, {"weights", weights_}};
}

// ---- gradient boosting ---------------------------------------------------

GradientBoostingModel GradientBoostingModel::fit(const Matrix& x, std::span<const double> y,
                                                 double learning_rate, int rounds, int max_depth) {
  const std::size_t n = x.rows();
  const double init = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> f(n, init), resid(n);
  std::vector<RegressionTree> trees;
  TreeOptions opt;
  opt.max_depth = max_depth;
  auto record = [&](GradientBoostingModel& m) {
    double mse = 0, mae = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - f[i];
      mse += e * e;
      mae += std::abs(e);
    }
    m.training_mse_.push_back(mse / static_cast<double>(n));
    m.training_mae_.push_back(mae / static_cast<double>(n));
  };
  GradientBoostingModel model(init, learning_rate, {});
  record(model);
  for (int m = 0; m < rounds; ++m) {
    for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - f[i];
    auto tree = RegressionTree::fit(x, resid, {}, opt);
    for (std::size_t i = 0; i < n; ++i) f[i] += learning_rate * tree.predict(x.row(i));
    model.trees_.push_back(std::move(tree));
    record(model);
  }
  return model;
}

double GradientBoostingModel::predict_one(std::span<const double> x) const {
  return predict_staged(x, trees_.size());
}

double GradientBoostingModel::predict_staged(std::span<const double> x, std::size_t stages) const {
  double s = init_;
  for (std::size_t i = 0; i < stages && i < trees_.size(); ++i) {
    s += learning_rate_ * trees_[i].predict(x);
  }
  return s;
}

std::optional<std::vector<double>> GradientBoostingModel::importance() const {
  if (trees_.empty()) return std::nullopt;
  std::vector<double> total(trees_.front().gains().size(), 0.0);
  for (const auto& t : trees_) {
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += t.gains()[i];
  }
  return normalized(std::move(total));
}

nlohmann::json GradientBoostingModel::state() const {
  auto arr = nlohmann::json::array();
  for (const auto& t : trees_) arr.push_back(t.to_json());
  return {{"init", init_}, {"learning_rate", learning_rate_}, {"trees", arr}};
}

}  // namespace revtime::ml
