#include "revtime/gerrit/fixture_server.h"

#include <fstream>

#include "httplib.h"
#include "revtime/core/error.h"
#include "revtime/gerrit/json.h"

namespace revtime::gerrit {

using nlohmann::json;

namespace {

std::string guarded(const json& j) { return std::string(kXssiGuard) + "\n" + j.dump(); }

json summary_of(const json& change) {
  json s = change;
  for (const char* key : {"revisions", "messages", "_fixture_diffs", "current_revision"}) {
    s.erase(key);
  }
  return s;
}

}  // namespace

FixtureGerritServer::FixtureGerritServer(std::vector<json> changes)
    : changes_(std::move(changes)), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;

  srv.set_pre_routing_handler([this](const httplib::Request&, httplib::Response& res) {
    ++total_requests_;
    if (transient_failures_ > 0) {
      --transient_failures_;
      res.status = 503;
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  srv.Get("/changes/", [this](const httplib::Request& req, httplib::Response& res) {
    const std::size_t n = req.has_param("n") ? std::stoul(req.get_param_value("n")) : 25;
    const std::size_t start = req.has_param("start") ? std::stoul(req.get_param_value("start")) : 0;
    json out = json::array();
    for (std::size_t i = start; i < changes_.size() && i < start + n; ++i) {
      out.push_back(summary_of(changes_[i]));
    }
    if (!out.empty() && start + n < changes_.size()) out.back()["_more_changes"] = true;
    res.set_content(guarded(out), "application/json");
  });

  srv.Get(R"(/changes/(\d+)/detail)", [this](const httplib::Request& req, httplib::Response& res) {
    ++detail_requests_;
    int budget = detail_budget_.load();
    if (budget == 0) {
      res.status = 503;
      return;
    }
    if (budget > 0) --detail_budget_;
    const auto number = std::stoll(req.matches[1]);
    for (const auto& c : changes_) {
      if (c.value("_number", std::int64_t{-1}) == number) {
        json detail = c;
        detail.erase("_fixture_diffs");
        res.set_content(guarded(detail), "application/json");
        return;
      }
    }
    res.status = 404;
    res.set_content("Not found: " + std::to_string(number), "text/plain");
  });

  srv.Get(R"(/changes/(\d+)/revisions/([^/]+)/files/(.+)/diff)",
          [this](const httplib::Request& req, httplib::Response& res) {
            const auto number = std::stoll(req.matches[1]);
            const std::string path = req.matches[3];
            for (const auto& c : changes_) {
              if (c.value("_number", std::int64_t{-1}) != number) continue;
              if (c.contains("_fixture_diffs") && c["_fixture_diffs"].contains(path)) {
                res.set_content(guarded(c["_fixture_diffs"][path]), "application/json");
              } else {
                res.set_content(guarded(json{{"content", json::array()}}), "application/json");
              }
              return;
            }
            res.status = 404;
          });

  port_ = srv.bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw Error(ErrorCode::kIoError, "fixture server could not bind a port");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

FixtureGerritServer::~FixtureGerritServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string FixtureGerritServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

void FixtureGerritServer::fail_details_after(int n) { detail_budget_ = n; }

std::vector<json> load_fixture_changes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read fixture " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedJson, path + ": " + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::kSchemaError, path + ": expected an array of changes");
  return j.get<std::vector<json>>();
}

}  // namespace revtime::gerrit
