#include "revtime/stats/stats.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "revtime/core/error.h"

namespace revtime::stats {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double wilcoxon_exact_p(std::span<const double> ranks, double w) {
  // Ranks are multiples of 1/2, so doubled ranks are integers.
  std::vector<long> doubled;
  long total = 0;
  for (double r : ranks) {
    doubled.push_back(std::lround(2 * r));
    total += doubled.back();
  }
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1;
  long reach = 0;
  for (long r : doubled) {
    for (long s = reach; s >= 0; --s) {
      if (count[static_cast<std::size_t>(s)] != 0) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
    }
    reach += r;
  }
  const long limit = std::lround(2 * w);
  double below = 0;
  for (long s = 0; s <= std::min(limit, total); ++s) below += count[static_cast<std::size_t>(s)];
  const double all = std::ldexp(1.0, static_cast<int>(ranks.size()));
  return std::min(1.0, 2.0 * below / all);
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch, "paired samples differ in length");
  }
  std::vector<double> diff;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0) diff.push_back(d);
  }
  if (diff.empty() && !a.empty()) {
    throw Error(ErrorCode::kAllZeroDifferences, "all paired differences are zero");
  }
  if (diff.size() < 2) {
    throw Error(ErrorCode::kTooFewPairs, "need at least 2 non-zero differences");
  }
  std::vector<double> mags(diff.size());
  for (std::size_t i = 0; i < diff.size(); ++i) mags[i] = std::abs(diff[i]);
  const auto ranks = average_ranks(mags);
  WilcoxonResult r;
  r.n_effective = diff.size();
  for (std::size_t i = 0; i < diff.size(); ++i) (diff[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];
  r.w = std::min(r.w_plus, r.w_minus);
  if (r.n_effective <= kExactWilcoxonLimit) {
    r.exact = true;
    r.p_value = wilcoxon_exact_p(ranks, r.w);
    return r;
  }
  const double n = static_cast<double>(r.n_effective);
  const double mean = n * (n + 1) / 4;
  double tie = 0;
  auto sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie += t * t * t - t;
    i = j;
  }
  const double var = n * (n + 1) * (2 * n + 1) / 24 - tie / 48;
  const double z = (std::abs(r.w_plus - mean) - 0.5) / std::sqrt(var);
  r.p_value = z <= 0 ? 1.0 : std::min(1.0, std::erfc(z / std::numbers::sqrt2));
  return r;
}

std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m) {
  if (m < p_values.size()) {
    throw Error(ErrorCode::kInvalidArgument, "bonferroni m must cover every comparison");
  }
  std::vector<double> out;
  for (double p : p_values) out.push_back(std::min(1.0, p * static_cast<double>(m)));
  return out;
}

std::string_view magnitude_label(Magnitude m) {
  switch (m) {
    case Magnitude::kNegligible: return "N";
    case Magnitude::kSmall: return "S";
    case Magnitude::kMedium: return "M";
    case Magnitude::kLarge: return "L";
  }
  return "?";
}

Magnitude cliffs_magnitude(double d) {
  const double a = std::abs(d);
  if (a < 0.147) return Magnitude::kNegligible;
  if (a < 0.33) return Magnitude::kSmall;
  if (a < 0.474) return Magnitude::kMedium;
  return Magnitude::kLarge;
}

CliffsDelta cliffs_delta(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::kEmptyInput, "cliff's delta needs two samples");
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sb.begin(), sb.end());
  double more = 0, less = 0;
  for (double x : a) {
    more += static_cast<double>(std::lower_bound(sb.begin(), sb.end(), x) - sb.begin());
    less += static_cast<double>(sb.end() - std::upper_bound(sb.begin(), sb.end(), x));
  }
  const double d = (more - less) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
  return {d, cliffs_magnitude(d)};
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::kTooFewObservations, "cohen's d needs at least 2 values per group");
  }
  auto moments = [](std::span<const double> v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, ss};
  };
  const auto [ma, ssa] = moments(a);
  const auto [mb, ssb] = moments(b);
  const double pooled =
      std::sqrt((ssa + ssb) / static_cast<double>(a.size() + b.size() - 2));
  if (!(pooled > 0)) throw Error(ErrorCode::kZeroPooledVariance, "pooled standard deviation is 0");
  return (ma - mb) / pooled;
}

ComparisonResult compare_paired(const std::string& first, std::span<const double> a,
                                const std::string& second, std::span<const double> b) {
  ComparisonResult c;
  c.first = first;
  c.second = second;
  try {
    const auto w = wilcoxon_signed_rank(a, b);
    c.w = w.w;
    c.p_value = w.p_value;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAllZeroDifferences && e.code() != ErrorCode::kTooFewPairs) throw;
    c.w = 0;
    c.p_value = 1;
  }
  const auto cd = cliffs_delta(a, b);
  c.cliffs_d = cd.d;
  c.magnitude = cd.magnitude;
  c.p_adjusted = c.p_value;
  return c;
}

void adjust(std::vector<ComparisonResult>& results, std::size_t m, double alpha) {
  std::vector<double> p;
  for (const auto& r : results) p.push_back(r.p_value);
  const auto adj = bonferroni(p, m);
  for (std::size_t i = 0; i < results.size(); ++i) {
    results[i].p_adjusted = adj[i];
    results[i].significant = adj[i] < alpha;
  }
}

// ---- Scott-Knott ESD -----------------------------------------------------

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct Partitioner {
  const std::vector<std::vector<double>>& groups;
  std::vector<double> means;
  double error_df = 0;
  double mean_variance = 0;  // MSE / harmonic mean group size
  double alpha;
  std::vector<std::vector<std::size_t>> out;

  void run(std::size_t lo, std::size_t hi) {
    const std::size_t k = hi - lo;
    std::vector<std::size_t> all(k);
    std::iota(all.begin(), all.end(), lo);
    if (k < 2) {
      out.push_back(all);
      return;
    }
    double grand = 0;
    for (std::size_t i = lo; i < hi; ++i) grand += means[i];
    grand /= static_cast<double>(k);
    double best = -1;
    std::size_t cut = lo + 1;
    double left = 0;
    double total = 0;
    for (std::size_t i = lo; i < hi; ++i) total += means[i];
    for (std::size_t c = lo + 1; c < hi; ++c) {
      left += means[c - 1];
      const double n1 = static_cast<double>(c - lo), n2 = static_cast<double>(hi - c);
      const double m1 = left / n1, m2 = (total - left) / n2;
      const double b = n1 * (m1 - grand) * (m1 - grand) + n2 * (m2 - grand) * (m2 - grand);
      if (b > best) {
        best = b;
        cut = c;
      }
    }
    double spread = 0;
    for (std::size_t i = lo; i < hi; ++i) spread += (means[i] - grand) * (means[i] - grand);
    const double s0 = (spread + error_df * mean_variance) / (static_cast<double>(k) + error_df);
    bool split = false;
    if (s0 > 0 && best > 0) {
      const double lambda = std::numbers::pi / (2 * (std::numbers::pi - 2)) * best / s0;
      const double df = static_cast<double>(k) / (std::numbers::pi - 2);
      const boost::math::chi_squared dist(df);
      split = lambda > boost::math::quantile(boost::math::complement(dist, alpha));
    }
    if (!split) {
      out.push_back(all);
      return;
    }
    run(lo, cut);
    run(cut, hi);
  }
};

}  // namespace

std::vector<std::vector<std::size_t>> scott_knott_partition(
    const std::vector<std::vector<double>>& ordered_groups, double alpha) {
  Partitioner p{ordered_groups, {}, 0, 0, alpha, {}};
  double sse = 0, inv_sizes = 0;
  std::size_t n_total = 0;
  for (const auto& g : ordered_groups) {
    const double m = mean_of(g);
    p.means.push_back(m);
    for (double x : g) sse += (x - m) * (x - m);
    n_total += g.size();
    inv_sizes += 1.0 / static_cast<double>(g.size());
  }
  const std::size_t k = ordered_groups.size();
  p.error_df = static_cast<double>(n_total - k);
  const double mse = p.error_df > 0 ? sse / p.error_df : 0.0;
  const double harmonic = static_cast<double>(k) / inv_sizes;
  p.mean_variance = mse / harmonic;
  p.run(0, k);
  return p.out;
}

std::size_t EsdRanking::rank_of(const std::string& name) const {
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (std::find(clusters[i].begin(), clusters[i].end(), name) != clusters[i].end()) return i + 1;
  }
  throw Error(ErrorCode::kUnknownUnit, "group '" + name + "' not ranked");
}

EsdRanking scott_knott_esd(const std::map<std::string, std::vector<double>>& groups, Order order) {
  if (groups.size() < 2) throw Error(ErrorCode::kTooFewGroups, "scott-knott needs at least 2 groups");
  struct Entry {
    std::string name;
    std::vector<double> values;
    double mean;
  };
  std::vector<Entry> entries;
  EsdRanking ranking;
  for (const auto& [name, raw] : groups) {
    if (raw.size() < 3) {
      throw Error(ErrorCode::kTooFewObservations, "group '" + name + "' has fewer than 3 values");
    }
    std::vector<double> t;
    for (double x : raw) {
      if (!(x > -1) || !std::isfinite(x)) {
        throw Error(ErrorCode::kInvalidArgument, "group '" + name + "' has a value <= -1");
      }
      t.push_back(std::log1p(x));
    }
    GroupSummary s;
    s.n = raw.size();
    s.mean_transformed = mean_of(t);
    auto sorted = raw;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2;
    const double m = mean_of(raw);
    double m2 = 0, m3 = 0;
    for (double x : raw) {
      m2 += (x - m) * (x - m);
      m3 += (x - m) * (x - m) * (x - m);
    }
    m2 /= static_cast<double>(raw.size());
    m3 /= static_cast<double>(raw.size());
    s.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
    ranking.groups[name] = s;
    entries.push_back({name, std::move(t), s.mean_transformed});
  }
  std::stable_sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
    if (a.mean != b.mean) return order == Order::kDescending ? a.mean > b.mean : a.mean < b.mean;
    return a.name < b.name;
  });
  std::vector<std::vector<double>> ordered;
  for (const auto& e : entries) ordered.push_back(e.values);
  auto parts = scott_knott_partition(ordered);

  auto pooled = [&](const std::vector<std::size_t>& idx) {
    std::vector<double> v;
    for (auto i : idx) v.insert(v.end(), ordered[i].begin(), ordered[i].end());
    return v;
  };
  bool merged = true;
  while (merged && parts.size() > 1) {
    merged = false;
    for (std::size_t c = 0; c + 1 < parts.size(); ++c) {
      const auto a = pooled(parts[c]);
      const auto b = pooled(parts[c + 1]);
      bool negligible;
      try {
        negligible = std::abs(cohens_d(a, b)) < kNegligibleD;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kZeroPooledVariance) throw;
        negligible = mean_of(a) == mean_of(b);
      }
      if (negligible) {
        parts[c].insert(parts[c].end(), parts[c + 1].begin(), parts[c + 1].end());
        parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(c + 1));
        merged = true;
        break;
      }
    }
  }
  for (const auto& part : parts) {
    std::vector<std::string> names;
    for (auto i : part) names.push_back(entries[i].name);
    ranking.clusters.push_back(std::move(names));
  }
  return ranking;
}

}  // namespace revtime::stats
