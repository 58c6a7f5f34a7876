#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "revtime/core/error.h"
#include "revtime/ml/models.h"

namespace revtime::ml {

namespace {

struct Views {
  std::span<const double> w1, b1, w2;
  double b2;
};

Views views(const MlpShape& s, std::span<const double> p) {
  const std::size_t hw = s.hidden * s.inputs;
  return {p.subspan(0, hw), p.subspan(hw, s.hidden), p.subspan(hw + s.hidden, s.hidden),
          p[hw + 2 * s.hidden]};
}

}  // namespace

double mlp_forward(const MlpShape& shape, std::span<const double> params,
                   std::span<const double> x) {
  const auto v = views(shape, params);
  double out = v.b2;
  for (std::size_t j = 0; j < shape.hidden; ++j) {
    double z = v.b1[j];
    const auto wj = v.w1.subspan(j * shape.inputs, shape.inputs);
    for (std::size_t k = 0; k < shape.inputs; ++k) z += wj[k] * x[k];
    if (z > 0) out += v.w2[j] * z;
  }
  return out;
}

double mlp_loss_and_gradient(const MlpShape& shape, std::span<const double> params,
                             const Matrix& x, std::span<const double> y,
                             std::span<const std::size_t> rows, double l2,
                             std::vector<double>* gradient) {
  const auto v = views(shape, params);
  const std::size_t h = shape.hidden, p = shape.inputs, hw = h * p;
  const double m = static_cast<double>(rows.size());
  if (gradient) gradient->assign(params.size(), 0.0);
  std::vector<double> z(h);
  double loss = 0;
  for (auto r : rows) {
    const auto xr = x.row(r);
    double out = v.b2;
    for (std::size_t j = 0; j < h; ++j) {
      double s = v.b1[j];
      const auto wj = v.w1.subspan(j * p, p);
      for (std::size_t k = 0; k < p; ++k) s += wj[k] * xr[k];
      z[j] = s;
      if (s > 0) out += v.w2[j] * s;
    }
    const double err = out - y[r];
    loss += 0.5 * err * err / m;
    if (!gradient) continue;
    auto& g = *gradient;
    const double d = err / m;
    g[hw + 2 * h] += d;
    for (std::size_t j = 0; j < h; ++j) {
      if (z[j] <= 0) continue;
      g[hw + h + j] += d * z[j];
      const double dh = d * v.w2[j];
      g[hw + j] += dh;
      for (std::size_t k = 0; k < p; ++k) g[j * p + k] += dh * xr[k];
    }
  }
  double reg = 0;
  for (std::size_t i = 0; i < hw; ++i) reg += v.w1[i] * v.w1[i];
  for (std::size_t j = 0; j < h; ++j) reg += v.w2[j] * v.w2[j];
  loss += 0.5 * l2 * reg;
  if (gradient) {
    auto& g = *gradient;
    for (std::size_t i = 0; i < hw; ++i) g[i] += l2 * v.w1[i];
    for (std::size_t j = 0; j < h; ++j) g[hw + h + j] += l2 * v.w2[j];
  }
  return loss;
}

MlpModel MlpModel::fit(const Matrix& x, std::span<const double> y, const MlpOptions& o,
                       FitFlags* flags) {
  const std::size_t n = x.rows();
  if (n == 0) throw Error(ErrorCode::kEmptyTrainingSet, "mlp needs at least one row");
  const MlpShape shape{x.cols(), o.hidden};

  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sd = 0;
  for (double v : y) sd += (v - mean) * (v - mean);
  sd = std::sqrt(sd / static_cast<double>(n));
  if (!(sd > 0)) sd = 1.0;
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = (y[i] - mean) / sd;

  std::mt19937_64 rng(mix_seed(o.seed, 0x11u));
  std::vector<double> params(shape.parameter_count(), 0.0);
  {
    const std::size_t hw = shape.hidden * shape.inputs;
    std::normal_distribution<double> w1(0.0, std::sqrt(2.0 / std::max<double>(1, shape.inputs)));
    std::normal_distribution<double> w2(0.0, std::sqrt(1.0 / static_cast<double>(shape.hidden)));
    for (std::size_t i = 0; i < hw; ++i) params[i] = w1(rng);
    for (std::size_t j = 0; j < shape.hidden; ++j) params[hw + shape.hidden + j] = w2(rng);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad;
  std::vector<double> last_good = params;
  for (int epoch = 0; epoch < o.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += o.batch_size) {
      const auto len = std::min(o.batch_size, n - start);
      std::span<const std::size_t> batch(order.data() + start, len);
      mlp_loss_and_gradient(shape, params, x, ys, batch, o.l2, &grad);
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= o.learning_rate * grad[i];
    }
    const bool finite =
        std::all_of(params.begin(), params.end(), [](double v) { return std::isfinite(v); });
    if (!finite) {
      params = last_good;
      if (flags) flags->non_converged = true;
      break;
    }
    last_good = params;
  }
  return MlpModel(shape, std::move(params), mean, sd);
}

double MlpModel::predict_one(std::span<const double> x) const {
  return y_mean_ + y_scale_ * mlp_forward(shape_, params_, x);
}

nlohmann::json MlpModel::state() const {
  return {{"inputs", shape_.inputs}, {"hidden", shape_.hidden}, {"params", params_},
          {"y_mean", y_mean_}, {"y_scale", y_scale_}};
}

}  // namespace revtime::ml
