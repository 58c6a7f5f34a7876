#include "revtime/gerrit/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "revtime/core/time.h"

namespace revtime::gerrit {

using nlohmann::json;

namespace {

struct Developer {
  std::int64_t id;
  std::string name;
  int tz;
  double speed;
  double weight;
};

constexpr std::array<const char*, 5> kSubsystems = {"core", "ui", "net", "docs", "build"};
constexpr std::array<double, 5> kSubsystemFactor = {1.3, 1.0, 1.15, 0.6, 0.8};
constexpr std::array<const char*, 5> kExtensions = {".cc", ".h", ".py", ".md", ".txt"};
constexpr std::array<int, 8> kTimezones = {-420, -300, 0, 0, 60, 120, 330, 540};
constexpr std::array<const char*, 8> kVerbs = {"Fix crash in",  "Refactor",        "Improve",
                                               "Add support for", "Fix typo in",    "Update",
                                               "Clean up",      "Optimize"};

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  double exponential(double mean) { return std::exponential_distribution<double>(1.0 / mean)(rng_); }
  std::size_t weighted(const std::vector<double>& w) {
    return std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng_);
  }

 private:
  std::mt19937_64 rng_;
};

std::string at(Timestamp ts) { return format_gerrit_timestamp(ts); }

Timestamp plus_hours(Timestamp ts, double hours) {
  return ts + std::chrono::microseconds(static_cast<std::int64_t>(hours * 3600.0 * 1e6));
}

json account(const Developer& d) {
  return json{{"_account_id", d.id},
              {"name", d.name},
              {"username", d.name},
              {"email", d.name + "@example.org"}};
}

json diff_content(Sampler& s, std::int64_t inserted, std::int64_t deleted) {
  json content = json::array();
  content.push_back(json{{"ab", json::array({"context"})}});
  const int hunks = static_cast<int>(std::max<std::int64_t>(
      1, std::min<std::int64_t>(3, std::max(inserted, deleted) / 5 + 1)));
  std::int64_t ins_left = inserted, del_left = deleted;
  for (int h = 0; h < hunks; ++h) {
    const bool last = h == hunks - 1;
    const std::int64_t ins = last ? ins_left : ins_left / (hunks - h);
    const std::int64_t del = last ? del_left : (s.uniform() < 0.5 ? 0 : del_left / (hunks - h));
    ins_left -= ins;
    del_left -= del;
    json entry = json::object();
    if (del > 0) entry["a"] = json::array();
    for (std::int64_t k = 0; k < del; ++k) entry["a"].push_back("old line");
    if (ins > 0) entry["b"] = json::array();
    for (std::int64_t k = 0; k < ins; ++k) entry["b"].push_back("new line");
    if (!entry.empty()) content.push_back(entry);
    content.push_back(json{{"ab", json::array({"context"})}});
  }
  return json{{"content", content}};
}

}  // namespace

std::vector<json> generate_synthetic_corpus(const SyntheticCorpusOptions& o) {
  Sampler s(o.seed);
  std::vector<Developer> devs;
  std::vector<double> weights;
  for (int i = 0; i < o.developers; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "dev%02d", i);
    Developer d{1000 + i, name, kTimezones[static_cast<std::size_t>(i) % kTimezones.size()],
                std::exp(0.35 * s.normal()), 1.0 / (1.0 + i * 0.3)};
    weights.push_back(d.weight);
    devs.push_back(std::move(d));
  }
  const Developer bot{900, "Jenkins CI", 0, 1.0, 0.0};

  std::vector<std::vector<std::string>> file_pool(kSubsystems.size());
  for (std::size_t k = 0; k < kSubsystems.size(); ++k) {
    for (int f = 0; f < 12; ++f) {
      const std::string dir = std::string(kSubsystems[k]) + (f % 3 == 0 ? "" : "/sub" + std::to_string(f % 3));
      file_pool[k].push_back(dir + "/file" + std::to_string(f) +
                             kExtensions[static_cast<std::size_t>(f + static_cast<int>(k)) % kExtensions.size()]);
    }
  }
  file_pool[4].push_back("Makefile");

  std::vector<json> out;
  Timestamp created = parse_timestamp("2020-01-06 09:00:00.000000000");
  for (int i = 0; i < o.changes; ++i) {
    created = plus_hours(created, s.exponential(5.0) + 0.01);
    const std::int64_t number = 1001 + i;
    const Developer& owner = devs[s.weighted(weights)];
    const std::size_t subsystem = static_cast<std::size_t>(s.integer(0, static_cast<int>(kSubsystems.size()) - 1));

    // Files of the first revision.
    const int n_files = 1 + std::min(7, static_cast<int>(s.exponential(1.5)));
    std::vector<std::string> paths;
    for (int f = 0; f < n_files; ++f) {
      const std::size_t sub = s.uniform() < 0.8 ? subsystem
                                                : static_cast<std::size_t>(s.integer(0, static_cast<int>(kSubsystems.size()) - 1));
      const auto& pool = file_pool[sub];
      const std::string& p = pool[static_cast<std::size_t>(s.integer(0, static_cast<int>(pool.size()) - 1))];
      if (std::find(paths.begin(), paths.end(), p) == paths.end()) paths.push_back(p);
    }
    json files = json::object();
    json diffs = json::object();
    files["/COMMIT_MSG"] = json{{"lines_inserted", 8}, {"lines_deleted", 0}};
    std::int64_t churn = 0, ins_total = 0, del_total = 0;
    for (const auto& p : paths) {
      const std::int64_t ins = static_cast<std::int64_t>(s.exponential(40.0));
      const std::int64_t del = s.uniform() < 0.4 ? 0 : static_cast<std::int64_t>(s.exponential(15.0));
      files[p] = json{{"lines_inserted", ins}, {"lines_deleted", del}};
      diffs[p] = diff_content(s, ins, del);
      churn += ins + del;
      ins_total += ins;
      del_total += del;
    }

    double hours = 36.0 * owner.speed * kSubsystemFactor[subsystem] *
                   (1.0 + 0.25 * std::log1p(static_cast<double>(churn))) *
                   (1.0 + 0.12 * static_cast<double>(paths.size())) * std::exp(0.2 * s.normal());
    const double kind = s.uniform();
    double cut = o.short_fraction;
    if (kind < cut) {
      hours = 1.0 + 20.0 * s.uniform();
    } else if (kind < (cut += o.long_fraction)) {
      hours = 520.0 + 300.0 * s.uniform();
    }
    hours = std::min(hours, 490.0 + (kind < cut ? 400.0 : 0.0));
    const bool reopened = s.uniform() < o.reopened_fraction;
    const bool self_reviewed = s.uniform() < o.self_reviewed_fraction;
    const bool open = s.uniform() < o.open_fraction;
    const bool abandoned = !open && s.uniform() < o.abandoned_fraction;
    const Timestamp closed = plus_hours(created, hours);

    const std::string verb = kVerbs[static_cast<std::size_t>(s.integer(0, static_cast<int>(kVerbs.size()) - 1))];
    const std::string subject = verb + " " + kSubsystems[subsystem] + " module " + std::to_string(i % 17);
    std::string body = "This change touches " + std::to_string(paths.size()) + " files.";
    if (s.uniform() < 0.3) body += " Also updates the documentation.";
    if (s.uniform() < 0.2) body += " Simplify the control flow.";

    json messages = json::array();
    auto add_message = [&](const Developer* author, Timestamp when, const std::string& text) {
      json m{{"id", "m" + std::to_string(number) + "_" + std::to_string(messages.size())},
             {"date", at(when)},
             {"message", text},
             {"_revision_number", 1}};
      if (author) m["author"] = account(*author);
      messages.push_back(std::move(m));
    };
    add_message(&owner, created, "Uploaded patch set 1.");
    add_message(&bot, plus_hours(created, 0.5), "Patch Set 1: Verified+1\n\nBuild succeeded.");
    if (!self_reviewed) {
      const int n_reviewers = s.integer(1, 3);
      std::vector<const Developer*> reviewers;
      while (static_cast<int>(reviewers.size()) < n_reviewers) {
        const Developer* r = &devs[s.weighted(weights)];
        if (r->id != owner.id && std::find(reviewers.begin(), reviewers.end(), r) == reviewers.end()) {
          reviewers.push_back(r);
        }
      }
      for (const Developer* r : reviewers) {
        add_message(r, plus_hours(created, hours * (0.2 + 0.6 * s.uniform())),
                    "Patch Set 1: Code-Review+1");
      }
      if (s.uniform() < 0.5) {
        add_message(&owner, plus_hours(created, hours * 0.85), "Patch Set 1:\n\n(1 comment)");
      }
    }
    if (reopened) {
      add_message(&owner, plus_hours(created, hours * 0.9), "Abandoned");
      add_message(&owner, plus_hours(created, hours * 0.95), "Restored");
    }
    if (!open) {
      if (abandoned) {
        add_message(&owner, closed, "Abandoned");
      } else {
        add_message(nullptr, closed, "Change has been successfully merged by " + owner.name);
      }
    }
    std::stable_sort(messages.begin(), messages.end(), [](const json& a, const json& b) {
      return a["date"].get<std::string>() < b["date"].get<std::string>();
    });

    json author{{"name", owner.name}, {"email", owner.name + "@example.org"}, {"date", at(created)}};
    if (s.uniform() >= 0.02) author["tz"] = owner.tz;
    const std::string change_id = "I" + std::to_string(number) + "0000000000000000000000000000000000000";
    json change{{"id", "synthetic~master~" + change_id},
                {"project", "synthetic"},
                {"branch", "master"},
                {"change_id", change_id},
                {"subject", subject},
                {"status", open ? "NEW" : (abandoned ? "ABANDONED" : "MERGED")},
                {"created", at(created)},
                {"updated", at(open ? plus_hours(created, hours) : closed)},
                {"insertions", ins_total},
                {"deletions", del_total},
                {"_number", number},
                {"owner", account(owner)},
                {"messages", messages},
                {"_fixture_diffs", diffs}};
    if (!open && !abandoned) change["submitted"] = at(closed);
    const std::string sha = "sha" + std::to_string(number);
    change["current_revision"] = sha;
    change["revisions"] = json{{sha, json{{"_number", 1},
                                          {"commit", json{{"author", author},
                                                          {"message", subject + "\n\n" + body +
                                                                          "\n\nChange-Id: " +
                                                                          change_id + "\n"}}},
                                          {"files", files}}}};
    out.push_back(std::move(change));
  }
  return out;
}

}  // namespace revtime::gerrit
