#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "revtime/core/csv.h"
#include "revtime/core/matrix.h"
#include "revtime/core/time.h"
#include "revtime/dataset/change_record.h"
#include "revtime/graph/collab_graph.h"

namespace revtime::features {

inline constexpr std::size_t kFeatureCount = 50;

enum class Dimension { kDate, kCollaboration, kCode, kText, kOwner, kFileHistory };

inline constexpr std::array<Dimension, 6> kAllDimensions = {
    Dimension::kDate, Dimension::kCollaboration, Dimension::kCode,
    Dimension::kText, Dimension::kOwner,         Dimension::kFileHistory};

std::string_view dimension_name(Dimension d);
std::optional<Dimension> parse_dimension(std::string_view name);

// Canonical feature order: date(3), collaboration(6), code(10), text(7),
// owner experience(18), file history(6).
const std::array<std::string_view, kFeatureCount>& feature_names();
Dimension feature_dimension(std::size_t index);
std::optional<std::size_t> feature_index(std::string_view name);
std::vector<std::size_t> dimension_columns(Dimension d);

struct KeywordPolicy {
  std::vector<std::string> refactoring;
  std::vector<std::string> perfective;
  std::vector<std::string> non_functional;

  static KeywordPolicy defaults();
  // Throws Error(kInvalidArgument) on empty lists or upper-case terms.
  void validate() const;
};

struct FeatureVector {
  std::int64_t change_number = 0;
  Timestamp created_at{};
  double target_hours = 0;
  std::array<double, kFeatureCount> values{};
};

// Rows sorted by (created_at, change_number); columns may be any subset of
// the canonical names (after selection or ablation).
struct FeatureMatrix {
  std::vector<std::string> feature_names;
  std::vector<std::int64_t> change_numbers;
  std::vector<Timestamp> created_at;
  Matrix values;
  std::vector<double> targets;

  std::size_t rows() const { return targets.size(); }
  std::size_t cols() const { return feature_names.size(); }

  FeatureMatrix select_columns(std::span<const std::size_t> columns) const;
  FeatureMatrix without_columns(std::span<const std::size_t> columns) const;
  FeatureMatrix row_range(std::size_t begin, std::size_t end) const;
  // Throws Error(kSchemaError) if rows are not in creation order.
  void check_sorted() const;
};

FeatureMatrix to_matrix(std::span<const FeatureVector> rows);

// Day of week (Monday = 0), weekend flag and the author timezone offset,
// all in the author's local time.
std::array<double, 3> extract_date_features(const ChangeRecord& record);

// Normalized Shannon entropy of the churn distribution. Throws
// Error(kEmptyInput) for an empty list.
double change_entropy(std::span<const std::int64_t> file_churns);

std::array<double, 10> extract_code_features(const ChangeRecord& record);
std::array<double, 7> extract_text_features(const ChangeRecord& record,
                                            const KeywordPolicy& policy);

// `history` may contain anything; only changes created before the record
// and closed by the time it was created are consulted, and only messages
// posted before that instant are counted.
std::array<double, 18> extract_owner_experience(const ChangeRecord& record,
                                                std::span<const ChangeRecord> history);
std::array<double, 6> extract_file_history(const ChangeRecord& record,
                                           std::span<const ChangeRecord> history);

std::array<double, 6> extract_collaboration(const graph::InteractionGraph& g,
                                            const ChangeRecord& record);

// Concatenates all six blocks; target_hours is the completion time.
FeatureVector extract_all(const ChangeRecord& record, std::span<const ChangeRecord> history,
                          const graph::InteractionGraph& graph, const KeywordPolicy& policy);

struct FeaturizeOptions {
  KeywordPolicy keywords = KeywordPolicy::defaults();
  int window_days = graph::kDefaultWindowDays;
};

// Featurizes `records` (typically the filtered dataset) against `history`
// (typically the full crawl), building one collaboration graph per record.
// Output rows are in creation order.
FeatureMatrix featurize(std::span<const ChangeRecord> records,
                        std::span<const ChangeRecord> history, const FeaturizeOptions& options);

// CSV with columns change_number, created_at, target_hours, then features.
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

using revtime::format_double;

}  // namespace revtime::features
