#include "support/synthetic_data.h"

#include "revtime/core/time.h"

namespace synth {

namespace {

revtime::features::FeatureMatrix build(std::size_t n, std::vector<std::string> names,
                                       std::uint64_t seed,
                                       const std::function<double(std::span<const double>)>& fn,
                                       double noise) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  revtime::features::FeatureMatrix m;
  const std::size_t p = names.size();
  m.feature_names = std::move(names);
  m.values = revtime::Matrix(n, p);
  const auto start = revtime::parse_timestamp("2020-01-01T00:00:00Z");
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < p; ++j) m.values(r, j) = gauss(rng);
    m.targets.push_back(fn(m.values.row(r)) + noise * gauss(rng));
    m.change_numbers.push_back(static_cast<std::int64_t>(r + 1));
    m.created_at.push_back(start + std::chrono::hours(static_cast<long>(r)));
  }
  return m;
}

}  // namespace

revtime::features::FeatureMatrix planted(std::size_t n, std::size_t p, std::uint64_t seed,
                                         const std::function<double(std::span<const double>)>& fn,
                                         double noise) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  return build(n, std::move(names), seed, fn, noise);
}

revtime::features::FeatureMatrix canonical(std::size_t n, std::uint64_t seed,
                                           const std::function<double(std::span<const double>)>& fn,
                                           double noise) {
  const auto& all = revtime::features::feature_names();
  return build(n, std::vector<std::string>(all.begin(), all.end()), seed, fn, noise);
}

revtime::Matrix random_matrix(std::size_t n, std::size_t p, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  revtime::Matrix m(n, p);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < p; ++j) m(r, j) = gauss(rng);
  }
  return m;
}

}  // namespace synth
