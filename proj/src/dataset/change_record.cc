#include "revtime/dataset/change_record.h"

#include <numeric>

#include "revtime/core/error.h"

namespace revtime {

using nlohmann::json;

std::string_view status_name(ChangeStatus status) {
  switch (status) {
    case ChangeStatus::kMerged: return "MERGED";
    case ChangeStatus::kAbandoned: return "ABANDONED";
    case ChangeStatus::kNew: return "NEW";
  }
  return "NEW";
}

ChangeStatus parse_status(std::string_view text) {
  if (text == "MERGED") return ChangeStatus::kMerged;
  if (text == "ABANDONED") return ChangeStatus::kAbandoned;
  if (text == "NEW") return ChangeStatus::kNew;
  throw Error(ErrorCode::kSchemaError, "unknown change status '" + std::string(text) + "'");
}

void validate(const ChangeRecord& r) {
  const bool closed = r.status != ChangeStatus::kNew;
  if (closed != r.closed_at.has_value()) {
    throw Error(ErrorCode::kSchemaError,
                "change " + std::to_string(r.number) + ": closed_at must be present iff closed");
  }
  if (r.closed_at && *r.closed_at < r.created_at) {
    throw Error(ErrorCode::kSchemaError,
                "change " + std::to_string(r.number) + ": closed_at precedes created_at");
  }
  std::int64_t ins = 0, del = 0;
  for (const auto& f : r.files) {
    if (f.path.empty()) {
      throw Error(ErrorCode::kSchemaError, "change " + std::to_string(r.number) + ": empty path");
    }
    if (f.lines_inserted < 0 || f.lines_deleted < 0) {
      throw Error(ErrorCode::kSchemaError,
                  "change " + std::to_string(r.number) + ": negative line count");
    }
    ins += f.lines_inserted;
    del += f.lines_deleted;
  }
  if (ins != r.insertions_total || del != r.deletions_total) {
    throw Error(ErrorCode::kSchemaError,
                "change " + std::to_string(r.number) + ": totals disagree with files");
  }
}

bool is_bot_account(std::string_view account_name, std::span<const std::string> bot_markers) {
  for (const auto& marker : bot_markers) {
    if (!marker.empty() && account_name.find(marker) != std::string_view::npos) return true;
  }
  return false;
}

std::vector<std::string> default_bot_accounts() {
  return {"bot", "CI", "Jenkins", "Zuul", "SonarQube"};
}

namespace {

template <typename T>
T required(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::kSchemaError, std::string("missing key '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kSchemaError, std::string("wrong type for key '") + key + "'");
  }
}

}  // namespace

void to_json(json& j, const ChangeRecord& r) {
  json files = json::array();
  for (const auto& f : r.files) {
    json jf = {{"path", f.path}, {"lines_inserted", f.lines_inserted},
               {"lines_deleted", f.lines_deleted}};
    if (f.segments) {
      jf["segments"] = {{"added", f.segments->added},
                        {"deleted", f.segments->deleted},
                        {"modified", f.segments->modified}};
    }
    files.push_back(std::move(jf));
  }
  json messages = json::array();
  for (const auto& m : r.messages) {
    json jm = {{"author_id", m.author_id}, {"author_name", m.author_name},
               {"posted_at", format_timestamp(m.posted_at)}, {"text", m.text},
               {"from_bot", m.from_bot}};
    jm["revision_number"] = m.revision_number ? json(*m.revision_number) : json(nullptr);
    messages.push_back(std::move(jm));
  }
  j = json{{"change_id", r.change_id},
           {"number", r.number},
           {"project", r.project},
           {"branch", r.branch},
           {"status", status_name(r.status)},
           {"created_at", format_timestamp(r.created_at)},
           {"closed_at", r.closed_at ? json(format_timestamp(*r.closed_at)) : json(nullptr)},
           {"owner_id", r.owner_id},
           {"owner_name", r.owner_name},
           {"owner_tz_offset_minutes", r.owner_tz_offset_minutes},
           {"tz_missing", r.tz_missing},
           {"subject", r.subject},
           {"message_body", r.message_body},
           {"files", std::move(files)},
           {"messages", std::move(messages)},
           {"reopened", r.reopened},
           {"insertions_total", r.insertions_total},
           {"deletions_total", r.deletions_total}};
}

void from_json(const json& j, ChangeRecord& r) {
  if (!j.is_object()) throw Error(ErrorCode::kSchemaError, "record is not a JSON object");
  r.change_id = required<std::string>(j, "change_id");
  r.number = required<std::int64_t>(j, "number");
  r.project = required<std::string>(j, "project");
  r.branch = required<std::string>(j, "branch");
  r.status = parse_status(required<std::string>(j, "status"));
  r.created_at = parse_timestamp(required<std::string>(j, "created_at"));
  const json& closed = j.contains("closed_at") ? j.at("closed_at") : json(nullptr);
  r.closed_at = closed.is_null() ? std::nullopt
                                 : std::optional<Timestamp>(parse_timestamp(closed.get<std::string>()));
  r.owner_id = required<AccountId>(j, "owner_id");
  r.owner_name = required<std::string>(j, "owner_name");
  r.owner_tz_offset_minutes = required<int>(j, "owner_tz_offset_minutes");
  r.tz_missing = required<bool>(j, "tz_missing");
  r.subject = required<std::string>(j, "subject");
  r.message_body = required<std::string>(j, "message_body");
  r.reopened = required<bool>(j, "reopened");
  r.insertions_total = required<std::int64_t>(j, "insertions_total");
  r.deletions_total = required<std::int64_t>(j, "deletions_total");

  r.files.clear();
  for (const auto& jf : required<json>(j, "files")) {
    FileDiff f;
    f.path = required<std::string>(jf, "path");
    f.lines_inserted = required<std::int64_t>(jf, "lines_inserted");
    f.lines_deleted = required<std::int64_t>(jf, "lines_deleted");
    if (auto it = jf.find("segments"); it != jf.end() && !it->is_null()) {
      f.segments = SegmentCounts{required<int>(*it, "added"), required<int>(*it, "deleted"),
                                 required<int>(*it, "modified")};
    }
    r.files.push_back(std::move(f));
  }
  r.messages.clear();
  for (const auto& jm : required<json>(j, "messages")) {
    ReviewMessage m;
    m.author_id = required<AccountId>(jm, "author_id");
    m.author_name = required<std::string>(jm, "author_name");
    m.posted_at = parse_timestamp(required<std::string>(jm, "posted_at"));
    m.text = required<std::string>(jm, "text");
    m.from_bot = required<bool>(jm, "from_bot");
    if (auto it = jm.find("revision_number"); it != jm.end() && !it->is_null()) {
      m.revision_number = it->get<int>();
    }
    r.messages.push_back(std::move(m));
  }
}

}  // namespace revtime
