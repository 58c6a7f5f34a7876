#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "revtime/ml/linalg.h"
#include "revtime/ml/models.h"

namespace revtime::ml {

namespace {

struct Centered {
  Matrix x;
  std::vector<double> y;
  std::vector<double> x_mean;
  double y_mean = 0;
};

Centered center(const Matrix& x, std::span<const double> y) {
  const std::size_t n = x.rows(), p = x.cols();
  Centered c{x, std::vector<double>(y.begin(), y.end()), std::vector<double>(p, 0.0), 0.0};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < p; ++j) c.x_mean[j] += x(r, j);
    c.y_mean += y[r];
  }
  for (auto& m : c.x_mean) m /= static_cast<double>(n);
  c.y_mean /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < p; ++j) c.x(r, j) -= c.x_mean[j];
    c.y[r] -= c.y_mean;
  }
  return c;
}

double intercept_for(const Centered& c, std::span<const double> coef) {
  return c.y_mean - dot(c.x_mean, coef);
}

std::vector<double> ridge_solve(Matrix a, std::span<const double> b, double lambda,
                                double pivot_tol) {
  for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += lambda;
  auto sol = cholesky_solve(a, b, pivot_tol);
  if (sol) return *sol;
  // Roundoff can still defeat a tiny ridge; grow it until the factorization holds.
  double jitter = std::max(lambda, 1e-12);
  double scale = 1.0;
  for (std::size_t i = 0; i < a.rows(); ++i) scale = std::max(scale, a(i, i));
  while (true) {
    jitter *= 10;
    Matrix aj = a;
    for (std::size_t i = 0; i < aj.rows(); ++i) aj(i, i) += jitter * scale;
    if (auto s = cholesky_solve(aj, b, 0.0)) return *s;
  }
}

}  // namespace

LinearFit fit_least_squares(const Matrix& x, std::span<const double> y, double lambda) {
  const auto c = center(x, y);
  const Matrix a = gram(c.x);
  const auto b = cross(c.x, c.y);
  LinearFit out;
  if (lambda > 0) {
    out.coef = ridge_solve(a, b, lambda, 0.0);
  } else if (auto sol = cholesky_solve(a, b, 1e-12)) {
    out.coef = *sol;
  } else {
    out.coef = ridge_solve(a, b, 1e-8, 0.0);
    out.flags.singular_fallback = true;
  }
  out.intercept = intercept_for(c, out.coef);
  return out;
}

LinearFit fit_lasso(const Matrix& x, std::span<const double> y, double alpha, double tol,
                    int max_sweeps) {
  const auto c = center(x, y);
  const std::size_t n = x.rows(), p = x.cols();
  const double nn = static_cast<double>(n);
  std::vector<double> norm2(p, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < p; ++j) norm2[j] += c.x(r, j) * c.x(r, j);
  }
  std::vector<double> beta(p, 0.0);
  std::vector<double> resid = c.y;
  LinearFit out;
  out.flags.non_converged = true;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double max_step = 0;
    for (std::size_t j = 0; j < p; ++j) {
      if (norm2[j] <= 0) continue;
      double rho = 0;
      for (std::size_t r = 0; r < n; ++r) rho += c.x(r, j) * resid[r];
      rho = rho / nn + norm2[j] / nn * beta[j];
      const double shrunk = std::copysign(std::max(std::abs(rho) - alpha, 0.0), rho);
      const double updated = shrunk / (norm2[j] / nn);
      const double step = updated - beta[j];
      if (step != 0) {
        for (std::size_t r = 0; r < n; ++r) resid[r] -= step * c.x(r, j);
        beta[j] = updated;
      }
      max_step = std::max(max_step, std::abs(step));
    }
    out.iterations = sweep;
    if (max_step < tol) {
      out.flags.non_converged = false;
      break;
    }
  }
  out.coef = beta;
  out.intercept = intercept_for(c, out.coef);
  return out;
}

LinearFit fit_bayesian_ridge(const Matrix& x, std::span<const double> y, int max_iter,
                             double tol) {
  constexpr double kA1 = 1e-6, kA2 = 1e-6, kL1 = 1e-6, kL2 = 1e-6;
  const auto c = center(x, y);
  const std::size_t n = x.rows(), p = x.cols();
  const auto eig = symmetric_eigen(gram(c.x));
  const auto xty = cross(c.x, c.y);
  // Project X^T y onto the eigenbasis once.
  std::vector<double> proj(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t i = 0; i < p; ++i) proj[k] += eig.vectors(i, k) * xty[i];
  }
  std::vector<double> ev(p);
  for (std::size_t k = 0; k < p; ++k) ev[k] = std::max(eig.values[k], 0.0);

  double var = 0;
  for (double v : c.y) var += v * v;
  var /= static_cast<double>(n);
  double alpha = 1.0 / (var + std::numeric_limits<double>::epsilon());
  double lambda = 1.0;

  auto solve = [&](double a, double l) {
    std::vector<double> coef(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
      const double s = proj[k] / (ev[k] + l / a);
      for (std::size_t i = 0; i < p; ++i) coef[i] += eig.vectors(i, k) * s;
    }
    return coef;
  };

  LinearFit out;
  out.flags.non_converged = true;
  std::vector<double> coef_old;
  for (int it = 0; it < max_iter; ++it) {
    auto coef = solve(alpha, lambda);
    double rss = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const double e = c.y[r] - dot(c.x.row(r), coef);
      rss += e * e;
    }
    double gamma = 0;
    for (std::size_t k = 0; k < p; ++k) gamma += alpha * ev[k] / (lambda + alpha * ev[k]);
    const double coef_norm = dot(coef, coef);
    lambda = (gamma + 2 * kL1) / (coef_norm + 2 * kL2);
    alpha = (static_cast<double>(n) - gamma + 2 * kA1) / (rss + 2 * kA2);
    out.iterations = it + 1;
    if (!coef_old.empty()) {
      double change = 0;
      for (std::size_t i = 0; i < p; ++i) change += std::abs(coef_old[i] - coef[i]);
      if (change < tol) {
        out.flags.non_converged = false;
        break;
      }
    }
    coef_old = std::move(coef);
  }
  out.coef = solve(alpha, lambda);
  out.intercept = intercept_for(c, out.coef);
  return out;
}

LinearFit fit_linear_svr(const Matrix& x, std::span<const double> y, double c_param,
                         double epsilon, int epochs, std::uint64_t seed) {
  constexpr double kEta0 = 0.1;
  const std::size_t n = x.rows(), p = x.cols();
  double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double y_sd = 0;
  for (double v : y) y_sd += (v - y_mean) * (v - y_mean);
  y_sd = std::sqrt(y_sd / static_cast<double>(n));
  if (!(y_sd > 0)) y_sd = 1.0;

  const double lambda = 1.0 / (c_param * static_cast<double>(n));
  std::vector<double> w(p, 0.0), w_avg(p, 0.0);
  double b = 0, b_avg = 0;
  std::size_t averaged = 0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(mix_seed(seed, 0x5u));
  std::uint64_t t = 0;
  const int average_from = epochs > 1 ? 1 : 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto r : order) {
      ++t;
      const double eta = kEta0 / std::sqrt(static_cast<double>(t));
      const auto row = x.row(r);
      const double target = (y[r] - y_mean) / y_sd;
      const double resid = target - (dot(w, row) + b);
      double s = 0;
      if (resid > epsilon) s = 1;
      else if (resid < -epsilon) s = -1;
      for (std::size_t j = 0; j < p; ++j) w[j] -= eta * (lambda * w[j] - s * row[j]);
      b += eta * s;
      if (epoch >= average_from) {
        ++averaged;
        const double k = 1.0 / static_cast<double>(averaged);
        for (std::size_t j = 0; j < p; ++j) w_avg[j] += (w[j] - w_avg[j]) * k;
        b_avg += (b - b_avg) * k;
      }
    }
  }
  LinearFit out;
  out.coef.resize(p);
  for (std::size_t j = 0; j < p; ++j) out.coef[j] = w_avg[j] * y_sd;
  out.intercept = y_mean + b_avg * y_sd;
  out.iterations = epochs;
  return out;
}

double LinearModel::predict_one(std::span<const double> x) const {
  return intercept_ + dot(coef_, x);
}

std::optional<std::vector<double>> LinearModel::importance() const {
  std::vector<double> out(coef_.size());
  for (std::size_t i = 0; i < coef_.size(); ++i) out[i] = std::abs(coef_[i]);
  return out;
}

nlohmann::json LinearModel::state() const {
  return {{"intercept", intercept_}, {"coef", coef_}};
}

}  // namespace revtime::ml
