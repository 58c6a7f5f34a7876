#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

namespace httplib {
class Server;
}

namespace revtime::gerrit {

// In-process HTTP server that answers the Gerrit REST endpoints used by the
// crawler from a fixed list of change detail documents. Every response
// carries the XSSI guard. A document may hold a "_fixture_diffs" object
// (path -> DiffInfo) which is stripped from detail responses and served on
// the per-file diff endpoint instead.
class FixtureGerritServer {
 public:
  explicit FixtureGerritServer(std::vector<nlohmann::json> changes);
  ~FixtureGerritServer();

  FixtureGerritServer(const FixtureGerritServer&) = delete;
  FixtureGerritServer& operator=(const FixtureGerritServer&) = delete;

  std::string base_url() const;

  // Detail requests beyond `n` (counted from now) answer 503.
  void fail_details_after(int n);
  // The next `n` requests of any kind answer 503 (transient failure).
  void fail_next_requests(int n) { transient_failures_ = n; }

  int detail_requests() const { return detail_requests_; }
  int total_requests() const { return total_requests_; }

 private:
  std::vector<nlohmann::json> changes_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> detail_requests_{0};
  std::atomic<int> total_requests_{0};
  std::atomic<int> detail_budget_{-1};
  std::atomic<int> transient_failures_{0};
};

// Loads a JSON array of change documents from disk.
std::vector<nlohmann::json> load_fixture_changes(const std::string& path);

}  // namespace revtime::gerrit
