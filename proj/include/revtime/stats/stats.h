#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace revtime::stats {

inline constexpr double kSignificanceAlpha = 0.01;
inline constexpr std::size_t kExactWilcoxonLimit = 25;

struct WilcoxonResult {
  double w = 0;  // min(W+, W-)
  double w_plus = 0;
  double w_minus = 0;
  std::size_t n_effective = 0;
  double p_value = 1;
  bool exact = false;
};

// Average ranks (1-based) of the values, ties share the mean rank.
std::vector<double> average_ranks(std::span<const double> values);

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);
// Exact two-sided p of observing min(W+, W-) <= w under the null, for the
// given (possibly tied) ranks.
double wilcoxon_exact_p(std::span<const double> ranks, double w);

std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m);

enum class Magnitude { kNegligible, kSmall, kMedium, kLarge };
std::string_view magnitude_label(Magnitude m);  // N, S, M, L
Magnitude cliffs_magnitude(double d);

struct CliffsDelta {
  double d = 0;
  Magnitude magnitude = Magnitude::kNegligible;
};

CliffsDelta cliffs_delta(std::span<const double> a, std::span<const double> b);

double cohens_d(std::span<const double> a, std::span<const double> b);

struct ComparisonResult {
  std::string first;
  std::string second;
  double w = 0;
  double p_value = 1;
  double p_adjusted = 1;
  bool significant = false;
  double cliffs_d = 0;
  Magnitude magnitude = Magnitude::kNegligible;
};

// Paired Wilcoxon plus Cliff's delta; p_adjusted is filled by the caller via
// bonferroni. Identical samples give p = 1.
ComparisonResult compare_paired(const std::string& first, std::span<const double> a,
                                const std::string& second, std::span<const double> b);

// Bonferroni over the batch, then significance at alpha.
void adjust(std::vector<ComparisonResult>& results, std::size_t m,
            double alpha = kSignificanceAlpha);

enum class Order { kDescending, kAscending };

struct GroupSummary {
  std::size_t n = 0;
  double mean_transformed = 0;
  double median = 0;
  double skewness = 0;
};

struct EsdRanking {
  std::vector<std::vector<std::string>> clusters;  // best first
  std::map<std::string, GroupSummary> groups;

  // 1-based cluster rank of a group.
  std::size_t rank_of(const std::string& name) const;
};

inline constexpr double kScottKnottAlpha = 0.05;
inline constexpr double kNegligibleD = 0.2;

// ln(x + 1) transform, Scott-Knott partitioning, then merging of adjacent
// clusters with |d| < 0.2.
EsdRanking scott_knott_esd(const std::map<std::string, std::vector<double>>& groups,
                           Order order = Order::kDescending);

// The plain Scott-Knott partition of already-transformed groups, without the
// effect-size merge. Groups must be given in rank order.
std::vector<std::vector<std::size_t>> scott_knott_partition(
    const std::vector<std::vector<double>>& ordered_groups, double alpha = kScottKnottAlpha);

}  // namespace revtime::stats
