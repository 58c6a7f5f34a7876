#include <algorithm>
#include <numeric>

#include "revtime/core/error.h"
#include "revtime/ml/models.h"

namespace revtime::ml {

KnnModel::KnnModel(Matrix x, std::vector<double> y, std::size_t k)
    : x_(std::move(x)), y_(std::move(y)), k_(std::min(k, y_.size())) {
  if (y_.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "knn needs at least one row");
}

std::vector<std::size_t> KnnModel::neighbors(std::span<const double> q) const {
  const std::size_t n = x_.rows();
  std::vector<std::pair<double, std::size_t>> d(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = x_.row(r);
    double s = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double diff = row[j] - q[j];
      s += diff * diff;
    }
    d[r] = {s, r};
  }
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k_), d.end());
  std::vector<std::size_t> out(k_);
  for (std::size_t i = 0; i < k_; ++i) out[i] = d[i].second;
  return out;
}

double KnnModel::predict_one(std::span<const double> q) const {
  double s = 0;
  for (auto r : neighbors(q)) s += y_[r];
  return s / static_cast<double>(k_);
}

nlohmann::json KnnModel::state() const {
  return {{"k", k_}, {"x", x_.data()}, {"rows", x_.rows()}, {"y", y_}};
}

}  // namespace revtime::ml
