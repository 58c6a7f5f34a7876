#include "revtime/features/features.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "revtime/core/csv.h"
#include "revtime/core/error.h"
#include "revtime/dataset/dataset.h"

namespace revtime::features {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames = {
    // date
    "days_of_the_weeks_of_date_created", "is_created_date_a_weekend", "author_timezone",
    // collaboration graph
    "degree_centrality", "closeness_centrality", "betweenness_centrality",
    "eigenvector_centrality", "clustering_coefficient", "core_number",
    // code
    "#lines_added", "#lines_deleted", "Code_churn", "#files", "#files_type", "#directory",
    "#segs_added", "#segs_deleted", "#segs_modify", "change_entropy",
    // text
    "subject_length", "subject_word_count", "msg_length", "msg_word_count",
    "is_non_fonctional", "is_perfective", "is_refactoring",
    // owner experience
    "#owner_prior_changes", "#prior_merged_changes", "#prior_abandoned_changes", "merge_ratio",
    "#prior_subsystem_changes", "prior_code_reviews_duration_min",
    "prior_code_reviews_duration_max", "prior_code_reviews_duration_avg",
    "prior_code_reviews_duration_std", "#prior_owner_subsystem_changes",
    "prior_owner_subsystem_changes_ratio", "#reviewed_changes_owner", "#owner_previous_message",
    "#owner_exchanged_messages", "#owner_messages_avg_per_changes_min",
    "#owner_messages_avg_per_changes_max", "#owner_messages_avg_per_changes_avg",
    "#owner_messages_avg_per_changes_std",
    // file history
    "files_changes_duration_min", "files_changes_duration_max", "files_changes_duration_avg",
    "files_changes_duration_std", "#developers_file", "#prior_changes_files"};

constexpr std::size_t kDateEnd = 3, kCollabEnd = 9, kCodeEnd = 19, kTextEnd = 26, kOwnerEnd = 44;

// min, max, mean, population std; all zero on empty input.
std::array<double, 4> summarize(const std::vector<double>& xs) {
  if (xs.empty()) return {0, 0, 0, 0};
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {*lo, *hi, mean, std::sqrt(var)};
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::size_t word_count(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool contains_any(const std::string& haystack, const std::vector<std::string>& needles) {
  return std::any_of(needles.begin(), needles.end(),
                     [&](const std::string& k) { return haystack.find(k) != std::string::npos; });
}

std::string directory_of(const std::string& path) {
  const auto slash = path.rfind('/');
  return slash == std::string::npos ? "." : path.substr(0, slash);
}

std::string extension_of(const std::string& path) {
  const auto slash = path.rfind('/');
  const std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = base.rfind('.');
  if (dot == std::string::npos || dot == 0) return "";
  return base.substr(dot);
}

std::string subsystem_of(const std::string& path) {
  const auto slash = path.find('/');
  return slash == std::string::npos ? "." : path.substr(0, slash);
}

std::set<std::string> subsystems_of(const ChangeRecord& r) {
  std::set<std::string> out;
  for (const auto& f : r.files) out.insert(subsystem_of(f.path));
  return out;
}

bool touches_any(const ChangeRecord& r, const std::set<std::string>& subsystems) {
  return std::any_of(r.files.begin(), r.files.end(), [&](const FileDiff& f) {
    return subsystems.count(subsystem_of(f.path)) != 0;
  });
}

// Changes whose outcome was already known when `record` was created.
std::vector<const ChangeRecord*> prior_completed(const ChangeRecord& record,
                                                 std::span<const ChangeRecord> history) {
  std::vector<const ChangeRecord*> out;
  for (const auto& h : history) {
    if (h.number == record.number || h.created_at >= record.created_at) continue;
    if (!h.closed_at || h.status == ChangeStatus::kNew || *h.closed_at > record.created_at) continue;
    out.push_back(&h);
  }
  return out;
}

bool counts_as_message(const ReviewMessage& m, Timestamp as_of) {
  return !m.from_bot && m.author_id != kNoAccount && m.posted_at < as_of;
}

template <std::size_t N>
void put(std::array<double, kFeatureCount>& out, std::size_t offset,
         const std::array<double, N>& block) {
  std::copy(block.begin(), block.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
}

}  // namespace

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::kDate: return "date";
    case Dimension::kCollaboration: return "collaboration";
    case Dimension::kCode: return "code";
    case Dimension::kText: return "text";
    case Dimension::kOwner: return "owner";
    case Dimension::kFileHistory: return "file_history";
  }
  return "";
}

std::optional<Dimension> parse_dimension(std::string_view name) {
  for (auto d : kAllDimensions) {
    if (dimension_name(d) == name) return d;
  }
  return std::nullopt;
}

const std::array<std::string_view, kFeatureCount>& feature_names() { return kNames; }

Dimension feature_dimension(std::size_t index) {
  if (index < kDateEnd) return Dimension::kDate;
  if (index < kCollabEnd) return Dimension::kCollaboration;
  if (index < kCodeEnd) return Dimension::kCode;
  if (index < kTextEnd) return Dimension::kText;
  if (index < kOwnerEnd) return Dimension::kOwner;
  return Dimension::kFileHistory;
}

std::optional<std::size_t> feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> dimension_columns(Dimension d) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (feature_dimension(i) == d) out.push_back(i);
  }
  return out;
}

KeywordPolicy KeywordPolicy::defaults() {
  return KeywordPolicy{
      {"refactor", "refactoring", "restructure", "cleanup", "clean up", "rename", "move code"},
      {"improve", "enhancement", "polish", "simplify", "optimize"},
      {"doc", "documentation", "typo", "license", "copyright", "comment", "format", "style"}};
}

void KeywordPolicy::validate() const {
  for (const auto* list : {&refactoring, &perfective, &non_functional}) {
    if (list->empty()) throw Error(ErrorCode::kInvalidArgument, "keyword list is empty");
    for (const auto& k : *list) {
      if (k.empty() || lowercase(k) != k) {
        throw Error(ErrorCode::kInvalidArgument, "keyword '" + k + "' must be non-empty lowercase");
      }
    }
  }
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> columns) const {
  FeatureMatrix out;
  for (auto c : columns) out.feature_names.push_back(feature_names.at(c));
  out.change_numbers = change_numbers;
  out.created_at = created_at;
  out.values = values.select_columns(columns);
  out.targets = targets;
  return out;
}

FeatureMatrix FeatureMatrix::without_columns(std::span<const std::size_t> columns) const {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < cols(); ++c) {
    if (std::find(columns.begin(), columns.end(), c) == columns.end()) keep.push_back(c);
  }
  return select_columns(keep);
}

FeatureMatrix FeatureMatrix::row_range(std::size_t begin, std::size_t end) const {
  FeatureMatrix out;
  out.feature_names = feature_names;
  out.change_numbers.assign(change_numbers.begin() + static_cast<std::ptrdiff_t>(begin),
                            change_numbers.begin() + static_cast<std::ptrdiff_t>(end));
  out.created_at.assign(created_at.begin() + static_cast<std::ptrdiff_t>(begin),
                        created_at.begin() + static_cast<std::ptrdiff_t>(end));
  out.values = values.row_range(begin, end);
  out.targets.assign(targets.begin() + static_cast<std::ptrdiff_t>(begin),
                     targets.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

void FeatureMatrix::check_sorted() const {
  for (std::size_t i = 1; i < rows(); ++i) {
    const auto prev = std::make_pair(created_at[i - 1], change_numbers[i - 1]);
    const auto cur = std::make_pair(created_at[i], change_numbers[i]);
    if (!(prev < cur)) {
      throw Error(ErrorCode::kSchemaError,
                  "feature rows not in creation order at row " + std::to_string(i));
    }
  }
}

FeatureMatrix to_matrix(std::span<const FeatureVector> rows) {
  FeatureMatrix m;
  m.feature_names.assign(kNames.begin(), kNames.end());
  m.values = Matrix(0, kFeatureCount);
  for (const auto& r : rows) {
    m.change_numbers.push_back(r.change_number);
    m.created_at.push_back(r.created_at);
    m.values.append_row(r.values);
    m.targets.push_back(r.target_hours);
  }
  return m;
}

std::array<double, 3> extract_date_features(const ChangeRecord& r) {
  const int day = local_weekday(r.created_at, r.owner_tz_offset_minutes);
  return {static_cast<double>(day), day >= 5 ? 1.0 : 0.0,
          static_cast<double>(r.owner_tz_offset_minutes)};
}

double change_entropy(std::span<const std::int64_t> churns) {
  if (churns.empty()) throw Error(ErrorCode::kEmptyInput, "change_entropy needs at least one file");
  double total = 0;
  std::size_t active = 0;
  for (auto c : churns) {
    if (c > 0) {
      total += static_cast<double>(c);
      ++active;
    }
  }
  if (active < 2 || total <= 0) return 0.0;
  double h = 0;
  for (auto c : churns) {
    if (c <= 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return std::clamp(h / std::log2(static_cast<double>(active)), 0.0, 1.0);
}

std::array<double, 10> extract_code_features(const ChangeRecord& r) {
  if (r.files.empty()) return {};
  double added = 0, deleted = 0;
  std::set<std::string> types, dirs;
  int segs_added = 0, segs_deleted = 0, segs_modified = 0;
  std::vector<std::int64_t> churns;
  for (const auto& f : r.files) {
    added += static_cast<double>(f.lines_inserted);
    deleted += static_cast<double>(f.lines_deleted);
    types.insert(extension_of(f.path));
    dirs.insert(directory_of(f.path));
    churns.push_back(f.lines_inserted + f.lines_deleted);
    if (f.segments) {
      segs_added += f.segments->added;
      segs_deleted += f.segments->deleted;
      segs_modified += f.segments->modified;
    } else if (f.lines_inserted > 0 && f.lines_deleted > 0) {
      ++segs_modified;
    } else if (f.lines_inserted > 0) {
      ++segs_added;
    } else if (f.lines_deleted > 0) {
      ++segs_deleted;
    }
  }
  return {added,
          deleted,
          added + deleted,
          static_cast<double>(r.files.size()),
          static_cast<double>(types.size()),
          static_cast<double>(dirs.size()),
          static_cast<double>(segs_added),
          static_cast<double>(segs_deleted),
          static_cast<double>(segs_modified),
          change_entropy(churns)};
}

std::array<double, 7> extract_text_features(const ChangeRecord& r, const KeywordPolicy& policy) {
  const std::string description = lowercase(r.message_body);
  return {static_cast<double>(utf8_length(r.subject)),
          static_cast<double>(word_count(r.subject)),
          static_cast<double>(utf8_length(r.message_body)),
          static_cast<double>(word_count(r.message_body)),
          contains_any(description, policy.non_functional) ? 1.0 : 0.0,
          contains_any(description, policy.perfective) ? 1.0 : 0.0,
          contains_any(description, policy.refactoring) ? 1.0 : 0.0};
}

std::array<double, 18> extract_owner_experience(const ChangeRecord& r,
                                                std::span<const ChangeRecord> history) {
  const auto prior = prior_completed(r, history);
  const auto subsystems = subsystems_of(r);
  const Timestamp now = r.created_at;

  double owner_changes = 0, merged = 0, abandoned = 0, subsystem_changes = 0;
  double owner_subsystem_changes = 0, reviewed_by_owner = 0, owner_messages = 0;
  double exchanged = 0;
  std::vector<double> durations, per_change_messages;
  for (const ChangeRecord* h : prior) {
    const bool touches = touches_any(*h, subsystems);
    if (touches) ++subsystem_changes;
    if (h->owner_id == r.owner_id) {
      ++owner_changes;
      if (h->status == ChangeStatus::kMerged) ++merged;
      if (h->status == ChangeStatus::kAbandoned) ++abandoned;
      if (touches) ++owner_subsystem_changes;
      durations.push_back(completion_time_hours(*h));
      double count = 0;
      for (const auto& m : h->messages) {
        if (!counts_as_message(m, now)) continue;
        ++count;
        if (m.author_id == r.owner_id) ++owner_messages;
      }
      exchanged += count;
      per_change_messages.push_back(count);
    } else {
      const bool owner_posted = std::any_of(h->messages.begin(), h->messages.end(),
                                            [&](const ReviewMessage& m) {
                                              return counts_as_message(m, now) &&
                                                     m.author_id == r.owner_id;
                                            });
      if (owner_posted) ++reviewed_by_owner;
    }
  }
  const auto dur = summarize(durations);
  const auto msg = summarize(per_change_messages);
  return {owner_changes,
          merged,
          abandoned,
          owner_changes > 0 ? merged / owner_changes : 0.0,
          subsystem_changes,
          dur[0], dur[1], dur[2], dur[3],
          owner_subsystem_changes,
          owner_changes > 0 ? owner_subsystem_changes / owner_changes : 0.0,
          reviewed_by_owner,
          owner_messages,
          exchanged,
          msg[0], msg[1], msg[2], msg[3]};
}

std::array<double, 6> extract_file_history(const ChangeRecord& r,
                                           std::span<const ChangeRecord> history) {
  std::set<std::string> paths;
  for (const auto& f : r.files) paths.insert(f.path);
  std::vector<double> durations;
  std::set<AccountId> developers;
  for (const ChangeRecord* h : prior_completed(r, history)) {
    const bool overlaps = std::any_of(h->files.begin(), h->files.end(),
                                      [&](const FileDiff& f) { return paths.count(f.path) != 0; });
    if (!overlaps) continue;
    durations.push_back(completion_time_hours(*h));
    developers.insert(h->owner_id);
  }
  const auto s = summarize(durations);
  return {s[0], s[1], s[2], s[3], static_cast<double>(developers.size()),
          static_cast<double>(durations.size())};
}

std::array<double, 6> extract_collaboration(const graph::InteractionGraph& g,
                                            const ChangeRecord& r) {
  const auto c = graph::collab_features(g, r.owner_id);
  return {c.degree_centrality,      c.closeness_centrality,   c.betweenness_centrality,
          c.eigenvector_centrality, c.clustering_coefficient, static_cast<double>(c.core_number)};
}

FeatureVector extract_all(const ChangeRecord& r, std::span<const ChangeRecord> history,
                          const graph::InteractionGraph& g, const KeywordPolicy& policy) {
  FeatureVector v;
  v.change_number = r.number;
  v.created_at = r.created_at;
  v.target_hours = completion_time_hours(r);
  put(v.values, 0, extract_date_features(r));
  put(v.values, kDateEnd, extract_collaboration(g, r));
  put(v.values, kCollabEnd, extract_code_features(r));
  put(v.values, kCodeEnd, extract_text_features(r, policy));
  put(v.values, kTextEnd, extract_owner_experience(r, history));
  put(v.values, kOwnerEnd, extract_file_history(r, history));
  for (double x : v.values) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "non-finite feature for change " + std::to_string(r.number));
    }
  }
  return v;
}

FeatureMatrix featurize(std::span<const ChangeRecord> records,
                        std::span<const ChangeRecord> history, const FeaturizeOptions& options) {
  options.keywords.validate();
  const auto sorted_records = sort_by_creation({records.begin(), records.end()});
  const auto sorted_history = sort_by_creation({history.begin(), history.end()});
  std::vector<FeatureVector> rows;
  rows.reserve(sorted_records.size());
  for (const auto& r : sorted_records) {
    // Prefix of the history created strictly before r.
    const auto end = std::lower_bound(sorted_history.begin(), sorted_history.end(), r.created_at,
                                      [](const ChangeRecord& h, Timestamp t) {
                                        return h.created_at < t;
                                      });
    const std::span<const ChangeRecord> prior(sorted_history.data(),
                                              static_cast<std::size_t>(end - sorted_history.begin()));
    const auto g = graph::build_graph(prior, r.created_at, options.window_days);
    rows.push_back(extract_all(r, prior, g, options.keywords));
  }
  return to_matrix(rows);
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << "change_number,created_at,target_hours";
  for (const auto& n : m.feature_names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << m.change_numbers[i] << ',' << format_timestamp(m.created_at[i]) << ','
        << format_double(m.targets[i]);
    for (double v : m.values.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kSchemaError, path.string() + " is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "change_number" || header[1] != "created_at" ||
      header[2] != "target_hours") {
    throw Error(ErrorCode::kSchemaError, path.string() + ": unexpected header");
  }
  FeatureMatrix m;
  m.feature_names.assign(header.begin() + 3, header.end());
  for (const auto& n : m.feature_names) {
    if (!feature_index(n)) throw Error(ErrorCode::kSchemaError, "unknown feature column '" + n + "'");
  }
  m.values = Matrix(0, m.feature_names.size());
  std::size_t line_no = 1;
  std::vector<double> row(m.feature_names.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kSchemaError, "line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(header.size()) + " cells");
    }
    m.change_numbers.push_back(static_cast<std::int64_t>(parse_double(cells[0], line_no)));
    m.created_at.push_back(parse_timestamp(cells[1]));
    m.targets.push_back(parse_double(cells[2], line_no));
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = parse_double(cells[j + 3], line_no);
    m.values.append_row(row);
  }
  m.check_sorted();
  return m;
}

}  // namespace revtime::features
