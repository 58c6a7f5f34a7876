#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "revtime/core/time.h"
#include "revtime/dataset/change_record.h"

namespace revtime::gerrit {

struct CrawlConfig {
  std::string project;  // label stored in the dataset manifest
  std::string base_url;
  std::string query = "status:merged OR status:abandoned";
  int page_size = 100;
  std::optional<int> max_changes;
  double request_timeout_s = 30.0;
  int max_retries = 3;
  int min_request_interval_ms = 100;
  int backoff_base_ms = 500;
  int max_in_flight = 4;
  bool fetch_diffs = false;
  std::vector<std::string> bot_accounts = default_bot_accounts();

  // Throws Error(kInvalidArgument) on violated invariants.
  void validate() const;
};

// A change document as served, plus anything fetched alongside it.
struct RawChange {
  nlohmann::json doc;
  Timestamp fetched_at{};
  // First-revision diff content keyed by file path (only with fetch_diffs).
  std::map<std::string, nlohmann::json> file_diffs;
};

struct ChangePage {
  std::vector<RawChange> changes;
  bool more_available = false;
};

struct ParsedUrl {
  std::string scheme_host_port;  // e.g. "https://review.example.org:8443"
  std::string path_prefix;       // without trailing slash, may be empty
};

// Throws Error(kInvalidArgument) unless the URL is absolute http(s).
ParsedUrl parse_base_url(const std::string& url);

// Percent-encodes everything outside the RFC 3986 unreserved set.
std::string encode_path_segment(std::string_view segment);

// Serializes request starts so consecutive starts are at least `interval`
// apart, across all threads sharing the pacer.
class RequestPacer {
 public:
  explicit RequestPacer(std::chrono::milliseconds interval) : interval_(interval) {}

  void wait_turn();
  std::vector<std::chrono::steady_clock::time_point> trace() const;

 private:
  std::chrono::milliseconds interval_;
  mutable std::mutex mutex_;
  std::optional<std::chrono::steady_clock::time_point> last_;
  std::vector<std::chrono::steady_clock::time_point> trace_;
};

// Thread-safe REST client for a Gerrit server. Optional basic-auth
// credentials are read from GERRIT_USERNAME / GERRIT_PASSWORD; when set,
// requests go to the authenticated "/a/" endpoints.
class GerritClient {
 public:
  explicit GerritClient(CrawlConfig config);

  const CrawlConfig& config() const { return config_; }

  ChangePage fetch_change_page(std::int64_t start_offset);
  RawChange fetch_change_detail(std::int64_t change_number);
  nlohmann::json fetch_file_diff(std::int64_t change_number, int revision,
                                 const std::string& path);

  // Start times of every HTTP attempt issued so far, in order.
  std::vector<std::chrono::steady_clock::time_point> request_trace() const {
    return pacer_.trace();
  }

 private:
  using Params = std::vector<std::pair<std::string, std::string>>;
  std::string get(const std::string& path, const Params& params);

  CrawlConfig config_;
  ParsedUrl url_;
  std::optional<std::pair<std::string, std::string>> credentials_;
  RequestPacer pacer_;
};

}  // namespace revtime::gerrit
