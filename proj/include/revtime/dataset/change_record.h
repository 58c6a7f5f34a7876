#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "revtime/core/time.h"

namespace revtime {

using AccountId = std::int64_t;

// Messages without an author (Gerrit system messages) carry this id.
inline constexpr AccountId kNoAccount = -1;

enum class ChangeStatus { kMerged, kAbandoned, kNew };

std::string_view status_name(ChangeStatus status);
ChangeStatus parse_status(std::string_view text);

// Hunk classification of one file's first-revision diff.
struct SegmentCounts {
  int added = 0;
  int deleted = 0;
  int modified = 0;

  bool operator==(const SegmentCounts&) const = default;
};

struct FileDiff {
  std::string path;
  std::int64_t lines_inserted = 0;
  std::int64_t lines_deleted = 0;
  // Present only when the diff content was fetched.
  std::optional<SegmentCounts> segments;

  bool operator==(const FileDiff&) const = default;
};

struct ReviewMessage {
  AccountId author_id = kNoAccount;
  std::string author_name;
  Timestamp posted_at{};
  std::string text;
  std::optional<int> revision_number;
  bool from_bot = false;

  bool operator==(const ReviewMessage&) const = default;
};

struct ChangeRecord {
  std::string change_id;
  std::int64_t number = 0;
  std::string project;
  std::string branch;
  ChangeStatus status = ChangeStatus::kNew;
  Timestamp created_at{};
  std::optional<Timestamp> closed_at;
  AccountId owner_id = kNoAccount;
  std::string owner_name;
  int owner_tz_offset_minutes = 0;
  // Set when the author timezone was absent and defaulted to UTC.
  bool tz_missing = false;
  std::string subject;
  std::string message_body;
  std::vector<FileDiff> files;
  std::vector<ReviewMessage> messages;
  bool reopened = false;
  std::int64_t insertions_total = 0;
  std::int64_t deletions_total = 0;

  bool completed() const { return closed_at.has_value(); }

  bool operator==(const ChangeRecord&) const = default;
};

// Checks the ChangeRecord invariants; throws Error(kSchemaError) naming the
// violated rule.
void validate(const ChangeRecord& record);

// Case-sensitive substring match against the configured bot markers.
bool is_bot_account(std::string_view account_name, std::span<const std::string> bot_markers);

std::vector<std::string> default_bot_accounts();

void to_json(nlohmann::json& j, const ChangeRecord& r);
void from_json(const nlohmann::json& j, ChangeRecord& r);

}  // namespace revtime
