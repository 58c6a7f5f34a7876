#include "revtime/gerrit/client.h"

#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "revtime/core/error.h"
#include "revtime/gerrit/json.h"

namespace revtime::gerrit {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

void CrawlConfig::validate() const {
  if (page_size < 1) throw Error(ErrorCode::kInvalidArgument, "page_size must be >= 1");
  if (min_request_interval_ms < 0) {
    throw Error(ErrorCode::kInvalidArgument, "min_request_interval must be >= 0");
  }
  if (max_retries < 0) throw Error(ErrorCode::kInvalidArgument, "max_retries must be >= 0");
  if (max_changes && *max_changes < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_changes must be positive");
  }
  if (max_in_flight < 1) throw Error(ErrorCode::kInvalidArgument, "max_in_flight must be >= 1");
  if (!(request_timeout_s > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "request_timeout must be positive");
  }
  parse_base_url(base_url);
}

ParsedUrl parse_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "base_url must be absolute: '" + url + "'");
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::kInvalidArgument, "unsupported scheme in '" + url + "'");
  }
  const auto host_begin = scheme_end + 3;
  const auto path_begin = url.find('/', host_begin);
  ParsedUrl out;
  out.scheme_host_port = url.substr(0, path_begin);
  if (out.scheme_host_port.size() <= host_begin) {
    throw Error(ErrorCode::kInvalidArgument, "base_url has no host: '" + url + "'");
  }
  if (path_begin != std::string::npos) {
    out.path_prefix = url.substr(path_begin);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  }
  return out;
}

std::string encode_path_segment(std::string_view segment) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : segment) {
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

void RequestPacer::wait_turn() {
  std::lock_guard lock(mutex_);
  if (last_) {
    const auto earliest = *last_ + interval_;
    if (Clock::now() < earliest) std::this_thread::sleep_until(earliest);
  }
  last_ = Clock::now();
  trace_.push_back(*last_);
}

std::vector<Clock::time_point> RequestPacer::trace() const {
  std::lock_guard lock(mutex_);
  return trace_;
}

GerritClient::GerritClient(CrawlConfig config)
    : config_(std::move(config)),
      url_(parse_base_url(config_.base_url)),
      pacer_(std::chrono::milliseconds(config_.min_request_interval_ms)) {
  config_.validate();
  const char* user = std::getenv("GERRIT_USERNAME");
  const char* password = std::getenv("GERRIT_PASSWORD");
  if (user && *user && password) credentials_ = std::make_pair(user, password);
}

std::string GerritClient::get(const std::string& path, const Params& params) {
  const std::string full_path = url_.path_prefix + (credentials_ ? "/a" : "") + path;
  httplib::Params query;
  for (const auto& [k, v] : params) query.emplace(k, v);
  const httplib::Headers headers{{"Accept", "application/json"}};

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_base_ms)
                                  * (1 << (attempt - 1)));
    }
    pacer_.wait_turn();

    httplib::Client cli(url_.scheme_host_port);
    const auto timeout = std::chrono::duration<double>(config_.request_timeout_s);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    if (credentials_) cli.set_basic_auth(credentials_->first, credentials_->second);

    auto res = cli.Get(full_path, query, headers);
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    if (res->status == 404) throw Error(ErrorCode::kNotFound, full_path);
    last_error = "HTTP " + std::to_string(res->status) + " for " + full_path;
    if (res->status != 429 && res->status < 500) break;  // not transient
  }
  throw Error(ErrorCode::kHttpError, last_error);
}

ChangePage GerritClient::fetch_change_page(std::int64_t start_offset) {
  if (start_offset < 0) throw Error(ErrorCode::kInvalidArgument, "negative start offset");
  const json body = parse_gerrit_json(get("/changes/", {{"q", config_.query},
                                                        {"n", std::to_string(config_.page_size)},
                                                        {"start", std::to_string(start_offset)}}));
  if (!body.is_array()) throw Error(ErrorCode::kMalformedJson, "change list is not an array");
  ChangePage page;
  const auto now = std::chrono::time_point_cast<std::chrono::microseconds>(
      std::chrono::system_clock::now());
  for (const auto& c : body) {
    if (c.is_object() && c.value("_more_changes", false)) page.more_available = true;
    page.changes.push_back(RawChange{c, now, {}});
  }
  return page;
}

RawChange GerritClient::fetch_change_detail(std::int64_t change_number) {
  const json body = parse_gerrit_json(get("/changes/" + std::to_string(change_number) + "/detail",
                                          {{"o", "ALL_REVISIONS"},
                                           {"o", "ALL_FILES"},
                                           {"o", "ALL_COMMITS"},
                                           {"o", "MESSAGES"},
                                           {"o", "DETAILED_ACCOUNTS"}}));
  if (!body.is_object()) throw Error(ErrorCode::kMalformedJson, "change detail is not an object");
  RawChange raw{body,
                std::chrono::time_point_cast<std::chrono::microseconds>(
                    std::chrono::system_clock::now()),
                {}};
  if (config_.fetch_diffs && body.contains("revisions")) {
    // Diff content of the first revision only.
    const json* first = nullptr;
    for (const auto& [sha, rev] : body["revisions"].items()) {
      if (!first || rev.value("_number", 0) < first->value("_number", 0)) first = &rev;
    }
    if (first && first->contains("files")) {
      const int revision = first->value("_number", 1);
      for (const auto& [path, info] : (*first)["files"].items()) {
        if (!path.empty() && path.front() == '/') continue;  // magic files
        raw.file_diffs[path] = fetch_file_diff(change_number, revision, path);
      }
    }
  }
  return raw;
}

json GerritClient::fetch_file_diff(std::int64_t change_number, int revision,
                                   const std::string& path) {
  return parse_gerrit_json(get("/changes/" + std::to_string(change_number) + "/revisions/" +
                                   std::to_string(revision) + "/files/" +
                                   encode_path_segment(path) + "/diff",
                               {}));
}

}  // namespace revtime::gerrit
