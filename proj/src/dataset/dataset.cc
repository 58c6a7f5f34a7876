#include "revtime/dataset/dataset.h"

#include <algorithm>

#include "revtime/core/error.h"

namespace revtime {

namespace fs = std::filesystem;
using nlohmann::json;

void FilterPolicy::validate() const {
  if (!(min_hours >= 0.0) || !(min_hours < max_hours)) {
    throw Error(ErrorCode::kInvalidArgument, "filter policy requires 0 <= min_hours < max_hours");
  }
}

double completion_time_hours(const ChangeRecord& record) {
  if (!record.closed_at) {
    throw Error(ErrorCode::kNotCompleted,
                "change " + std::to_string(record.number) + " has no completion time");
  }
  return hours_between(record.created_at, *record.closed_at);
}

bool is_self_reviewed(const ChangeRecord& record, std::span<const std::string> bot_accounts) {
  for (const auto& m : record.messages) {
    if (m.from_bot || m.author_id == kNoAccount) continue;
    if (m.author_id == record.owner_id) continue;
    if (is_bot_account(m.author_name, bot_accounts)) continue;
    return false;
  }
  return true;
}

FilterOutcome apply_filters(std::span<const ChangeRecord> records, const FilterPolicy& policy) {
  policy.validate();
  FilterOutcome out;
  for (const auto& r : records) {
    if (!r.closed_at || r.status == ChangeStatus::kNew) {
      ++out.report.dropped_incomplete;
      continue;
    }
    if (policy.drop_reopened && r.reopened) {
      ++out.report.dropped_reopened;
      continue;
    }
    if (policy.drop_self_reviewed && is_self_reviewed(r, policy.bot_accounts)) {
      ++out.report.dropped_self;
      continue;
    }
    const double hours = completion_time_hours(r);
    if (hours <= policy.min_hours) {
      ++out.report.dropped_short;
      continue;
    }
    if (hours > policy.max_hours) {
      ++out.report.dropped_long;
      continue;
    }
    ++out.report.kept;
    out.kept.push_back(r);
  }
  return out;
}

std::vector<ChangeRecord> sort_by_creation(std::vector<ChangeRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const ChangeRecord& a, const ChangeRecord& b) {
    if (a.created_at != b.created_at) return a.created_at < b.created_at;
    return a.number < b.number;
  });
  return records;
}

json filter_policy_to_json(const FilterPolicy& p) {
  return json{{"min_hours", p.min_hours},
              {"max_hours", p.max_hours},
              {"drop_reopened", p.drop_reopened},
              {"drop_self_reviewed", p.drop_self_reviewed},
              {"bot_accounts", p.bot_accounts}};
}

json filter_report_to_json(const FilterReport& r) {
  return json{{"kept", r.kept},
              {"dropped_reopened", r.dropped_reopened},
              {"dropped_self", r.dropped_self},
              {"dropped_short", r.dropped_short},
              {"dropped_long", r.dropped_long},
              {"dropped_incomplete", r.dropped_incomplete},
              {"total", r.total()}};
}

json manifest_to_json(const DatasetManifest& m) {
  json j{{"project", m.project},
         {"crawl_query", m.crawl_query},
         {"count", m.count},
         {"schema_version", m.schema_version},
         {"complete", m.complete},
         {"segments_from_diff", m.segments_from_diff}};
  j["filter_policy"] = m.filter_policy ? filter_policy_to_json(*m.filter_policy) : json(nullptr);
  j["filter_report"] = m.filter_report ? filter_report_to_json(*m.filter_report) : json(nullptr);
  return j;
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  try {
    m.project = j.at("project").get<std::string>();
    m.crawl_query = j.at("crawl_query").get<std::string>();
    m.count = j.at("count").get<std::size_t>();
    m.schema_version = j.at("schema_version").get<std::string>();
    m.complete = j.at("complete").get<bool>();
    m.segments_from_diff = j.value("segments_from_diff", false);
    if (j.contains("filter_policy") && !j["filter_policy"].is_null()) {
      const auto& p = j["filter_policy"];
      FilterPolicy policy;
      policy.min_hours = p.at("min_hours").get<double>();
      policy.max_hours = p.at("max_hours").get<double>();
      policy.drop_reopened = p.at("drop_reopened").get<bool>();
      policy.drop_self_reviewed = p.at("drop_self_reviewed").get<bool>();
      policy.bot_accounts = p.at("bot_accounts").get<std::vector<std::string>>();
      m.filter_policy = policy;
    }
    if (j.contains("filter_report") && !j["filter_report"].is_null()) {
      const auto& r = j["filter_report"];
      FilterReport rep;
      rep.kept = r.at("kept").get<std::size_t>();
      rep.dropped_reopened = r.at("dropped_reopened").get<std::size_t>();
      rep.dropped_self = r.at("dropped_self").get<std::size_t>();
      rep.dropped_short = r.at("dropped_short").get<std::size_t>();
      rep.dropped_long = r.at("dropped_long").get<std::size_t>();
      rep.dropped_incomplete = r.at("dropped_incomplete").get<std::size_t>();
      m.filter_report = rep;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("manifest: ") + e.what());
  }
  if (m.schema_version != kDatasetSchemaVersion) {
    throw Error(ErrorCode::kSchemaError, "unsupported dataset schema version '" +
                                             m.schema_version + "'");
  }
  return m;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

void write_manifest(const fs::path& dir, const DatasetManifest& manifest) {
  ensure_dir(dir);
  write_text(dir / kManifestFileName, manifest_to_json(manifest).dump(2) + "\n");
  if (manifest.created_at) {
    write_text(dir / kManifestMetaFileName,
               json{{"created_at", format_timestamp(*manifest.created_at)}}.dump(2) + "\n");
  }
}

DatasetManifest read_manifest(const fs::path& dir) {
  std::ifstream in(dir / kManifestFileName, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + (dir / kManifestFileName).string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError, std::string("manifest: ") + e.what());
  }
  DatasetManifest m = manifest_from_json(j);
  std::ifstream meta(dir / kManifestMetaFileName, std::ios::binary);
  if (meta) {
    try {
      const json jm = json::parse(meta);
      m.created_at = parse_timestamp(jm.at("created_at").get<std::string>());
    } catch (const json::exception&) {
      // Metadata is advisory; a damaged side file does not invalidate the data.
    }
  }
  return m;
}

DatasetManifest write_dataset(std::span<const ChangeRecord> records, const fs::path& dir,
                              DatasetManifest manifest) {
  ensure_dir(dir);
  std::string body;
  for (const auto& r : records) {
    body += json(r).dump();
    body += '\n';
  }
  write_text(dir / kDataFileName, body);
  manifest.count = records.size();
  write_manifest(dir, manifest);
  return manifest;
}

LoadedDataset read_dataset(const fs::path& dir) {
  LoadedDataset out;
  out.manifest = read_manifest(dir);
  std::ifstream in(dir / kDataFileName, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + (dir / kDataFileName).string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.records.push_back(json::parse(line).get<ChangeRecord>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaError,
                  "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchemaError, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.manifest.complete && out.manifest.count != out.records.size()) {
    throw Error(ErrorCode::kSchemaError,
                "manifest count " + std::to_string(out.manifest.count) + " but " +
                    std::to_string(out.records.size()) + " records stored");
  }
  out.manifest.count = out.records.size();
  return out;
}

DatasetAppender::DatasetAppender(const fs::path& dir, DatasetManifest manifest)
    : dir_(dir), manifest_(std::move(manifest)) {
  ensure_dir(dir_);
  out_.open(dir_ / kDataFileName, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::kIoError, "cannot append to " + (dir_ / kDataFileName).string());
}

void DatasetAppender::append(const ChangeRecord& record) {
  out_ << json(record).dump() << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::kIoError, "append failed for " + dir_.string());
  ++manifest_.count;
}

void DatasetAppender::checkpoint(bool complete) {
  manifest_.complete = complete;
  write_manifest(dir_, manifest_);
}

}  // namespace revtime
