#include "revtime/gerrit/normalize.h"

#include <algorithm>

#include "revtime/core/error.h"

namespace revtime::gerrit {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    throw Error(ErrorCode::kSchemaError, std::string("missing key '") + key + "'");
  }
  return *it;
}

std::string string_or(const json& j, const char* key, std::string fallback = {}) {
  auto it = j.find(key);
  return it != j.end() && it->is_string() ? it->get<std::string>() : fallback;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool is_pseudo_file(const std::string& path) {
  return path == "/COMMIT_MSG" || path == "/MERGE_LIST" || path == "/PATCHSET_LEVEL";
}

const json* first_revision(const json& doc) {
  auto it = doc.find("revisions");
  if (it == doc.end() || !it->is_object()) return nullptr;
  const json* first = nullptr;
  for (const auto& [sha, rev] : it->items()) {
    if (!first || rev.value("_number", 0) < first->value("_number", 0)) first = &rev;
  }
  return first;
}

}  // namespace

SegmentCounts count_segments(const json& diff_info) {
  SegmentCounts out;
  const json& content = diff_info.contains("content") ? diff_info["content"] : diff_info;
  if (!content.is_array()) return out;
  bool in_run = false, has_a = false, has_b = false;
  auto flush = [&] {
    if (in_run) {
      if (has_a && has_b) {
        ++out.modified;
      } else if (has_b) {
        ++out.added;
      } else if (has_a) {
        ++out.deleted;
      }
    }
    in_run = has_a = has_b = false;
  };
  for (const auto& entry : content) {
    if (entry.contains("ab") || entry.contains("skip")) {
      flush();
      continue;
    }
    in_run = true;
    has_a = has_a || (entry.contains("a") && !entry["a"].empty());
    has_b = has_b || (entry.contains("b") && !entry["b"].empty());
  }
  flush();
  return out;
}

ChangeRecord normalize_change(const RawChange& raw, const CrawlConfig& config) {
  const json& doc = raw.doc;
  if (!doc.is_object()) throw Error(ErrorCode::kSchemaError, "change document is not an object");

  ChangeRecord r;
  r.number = require(doc, "_number").get<std::int64_t>();
  r.status = parse_status(require(doc, "status").get<std::string>());
  r.created_at = parse_timestamp(require(doc, "created").get<std::string>());
  const json& owner = require(doc, "owner");
  r.owner_id = require(owner, "_account_id").get<AccountId>();
  r.owner_name = string_or(owner, "name", string_or(owner, "username"));
  r.change_id = string_or(doc, "change_id", string_or(doc, "id"));
  r.project = string_or(doc, "project");
  r.branch = string_or(doc, "branch");
  r.subject = string_or(doc, "subject");

  if (const json* rev = first_revision(doc)) {
    if (auto c = rev->find("commit"); c != rev->end()) {
      if (auto a = c->find("author"); a != c->end() && a->contains("tz")) {
        r.owner_tz_offset_minutes = (*a)["tz"].get<int>();
      } else {
        r.tz_missing = true;
      }
      if (auto m = c->find("message"); m != c->end() && m->is_string()) {
        const std::string text = m->get<std::string>();
        const auto nl = text.find('\n');
        r.subject = trim(text.substr(0, nl));
        r.message_body = nl == std::string::npos ? std::string() : trim(text.substr(nl + 1));
      }
    } else {
      r.tz_missing = true;
    }
    if (auto files = rev->find("files"); files != rev->end() && files->is_object()) {
      for (const auto& [path, info] : files->items()) {
        if (is_pseudo_file(path)) continue;
        FileDiff f;
        f.path = path;
        f.lines_inserted = info.value("lines_inserted", std::int64_t{0});
        f.lines_deleted = info.value("lines_deleted", std::int64_t{0});
        if (auto d = raw.file_diffs.find(path); d != raw.file_diffs.end()) {
          f.segments = count_segments(d->second);
        }
        r.files.push_back(std::move(f));
      }
    }
  } else {
    r.tz_missing = true;
  }
  for (const auto& f : r.files) {
    r.insertions_total += f.lines_inserted;
    r.deletions_total += f.lines_deleted;
  }

  std::optional<Timestamp> last_abandon;
  if (auto msgs = doc.find("messages"); msgs != doc.end() && msgs->is_array()) {
    for (const auto& jm : *msgs) {
      ReviewMessage m;
      m.posted_at = std::max(parse_timestamp(require(jm, "date").get<std::string>()), r.created_at);
      m.text = string_or(jm, "message");
      if (auto rn = jm.find("_revision_number"); rn != jm.end() && rn->is_number_integer()) {
        m.revision_number = rn->get<int>();
      }
      if (auto a = jm.find("author"); a != jm.end() && a->is_object() &&
                                      a->contains("_account_id")) {
        m.author_id = (*a)["_account_id"].get<AccountId>();
        m.author_name = string_or(*a, "name", string_or(*a, "username"));
        m.from_bot = is_bot_account(m.author_name, config.bot_accounts) ||
                     is_bot_account(string_or(*a, "username"), config.bot_accounts);
      } else {
        m.author_id = kNoAccount;
        m.author_name = "Gerrit";
        m.from_bot = true;
      }
      if (m.text.rfind(kRestoreMarker, 0) == 0) r.reopened = true;
      if (m.text.rfind("Abandoned", 0) == 0) last_abandon = m.posted_at;
      r.messages.push_back(std::move(m));
    }
  }
  std::stable_sort(r.messages.begin(), r.messages.end(),
                   [](const ReviewMessage& a, const ReviewMessage& b) {
                     return a.posted_at < b.posted_at;
                   });

  if (r.status != ChangeStatus::kNew) {
    Timestamp closed;
    if (r.status == ChangeStatus::kMerged && doc.contains("submitted")) {
      closed = parse_timestamp(doc["submitted"].get<std::string>());
    } else if (r.status == ChangeStatus::kAbandoned && last_abandon) {
      closed = *last_abandon;
    } else {
      closed = parse_timestamp(require(doc, "updated").get<std::string>());
    }
    r.closed_at = std::max(closed, r.created_at);
  }
  return r;
}

}  // namespace revtime::gerrit
