#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "revtime/core/time.h"
#include "revtime/dataset/change_record.h"

namespace revtime {

inline constexpr const char* kDatasetSchemaVersion = "1";
inline constexpr const char* kDataFileName = "changes.jsonl";
inline constexpr const char* kManifestFileName = "manifest.json";
// Wall-clock metadata lives here so the manifest itself stays reproducible.
inline constexpr const char* kManifestMetaFileName = "manifest.meta.json";

struct FilterPolicy {
  double min_hours = 24.0;
  double max_hours = 504.0;
  bool drop_reopened = true;
  bool drop_self_reviewed = true;
  std::vector<std::string> bot_accounts = default_bot_accounts();

  // Throws Error(kInvalidArgument) unless 0 <= min_hours < max_hours.
  void validate() const;
};

struct FilterReport {
  std::size_t kept = 0;
  std::size_t dropped_reopened = 0;
  std::size_t dropped_self = 0;
  std::size_t dropped_short = 0;
  std::size_t dropped_long = 0;
  std::size_t dropped_incomplete = 0;

  std::size_t total() const {
    return kept + dropped_reopened + dropped_self + dropped_short + dropped_long +
           dropped_incomplete;
  }
  bool operator==(const FilterReport&) const = default;
};

struct DatasetManifest {
  std::string project;
  std::string crawl_query;
  std::optional<Timestamp> created_at;  // persisted in the meta side file
  std::size_t count = 0;
  std::string schema_version = kDatasetSchemaVersion;
  bool complete = true;
  std::optional<FilterPolicy> filter_policy;
  std::optional<FilterReport> filter_report;
  // True when every file's segment counts came from fetched diff content.
  bool segments_from_diff = false;
};

// T_c - T_s in hours. Throws Error(kNotCompleted) when closed_at is absent.
double completion_time_hours(const ChangeRecord& record);

// True iff no message is authored by someone other than the owner or a bot.
bool is_self_reviewed(const ChangeRecord& record, std::span<const std::string> bot_accounts);

struct FilterOutcome {
  std::vector<ChangeRecord> kept;
  FilterReport report;
};

// Rules apply in order (incomplete, reopened, self-reviewed, short, long) and
// every dropped record is attributed to the first rule it matches.
FilterOutcome apply_filters(std::span<const ChangeRecord> records, const FilterPolicy& policy);

// Stable ascending sort by created_at, ties by change number.
std::vector<ChangeRecord> sort_by_creation(std::vector<ChangeRecord> records);

nlohmann::json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j);
nlohmann::json filter_report_to_json(const FilterReport& report);
nlohmann::json filter_policy_to_json(const FilterPolicy& policy);

// Writes <dir>/changes.jsonl and <dir>/manifest.json. manifest.count is
// overwritten with records.size().
DatasetManifest write_dataset(std::span<const ChangeRecord> records,
                              const std::filesystem::path& dir, DatasetManifest manifest = {});

struct LoadedDataset {
  std::vector<ChangeRecord> records;
  DatasetManifest manifest;
};

LoadedDataset read_dataset(const std::filesystem::path& dir);

void write_manifest(const std::filesystem::path& dir, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& dir);

// Single-writer, append-only record sink used by the crawler. Appends are
// flushed line by line so an interrupted crawl leaves a valid prefix.
class DatasetAppender {
 public:
  DatasetAppender(const std::filesystem::path& dir, DatasetManifest manifest);

  void append(const ChangeRecord& record);
  // Rewrites the manifest with the current count and completeness flag.
  void checkpoint(bool complete);

  const DatasetManifest& manifest() const { return manifest_; }

 private:
  std::filesystem::path dir_;
  DatasetManifest manifest_;
  std::ofstream out_;
};

}  // namespace revtime
