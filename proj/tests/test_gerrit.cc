#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "revtime/core/error.h"
#include "revtime/gerrit/client.h"
#include "revtime/gerrit/crawl.h"
#include "revtime/gerrit/fixture_server.h"
#include "revtime/gerrit/json.h"
#include "revtime/gerrit/normalize.h"
#include "revtime/gerrit/synthetic.h"
#include "support/error_code.h"
#include "support/fixture_corpus.h"
#include "support/temp_dir.h"

using namespace revtime;
using namespace revtime::gerrit;
using nlohmann::json;
using support::error_of;

namespace {

CrawlConfig fast_config(const FixtureGerritServer& server) {
  CrawlConfig c;
  c.project = "demo";
  c.base_url = server.base_url();
  c.page_size = 10;
  c.min_request_interval_ms = 0;
  c.backoff_base_ms = 1;
  c.request_timeout_s = 5;
  return c;
}

std::vector<json> first_n(std::size_t n) {
  auto docs = support::fixture_documents();
  docs.resize(n);
  return docs;
}

std::vector<std::int64_t> stored_numbers(const std::filesystem::path& dir) {
  std::vector<std::int64_t> out;
  for (const auto& r : read_dataset(dir).records) out.push_back(r.number);
  return out;
}

bool unique(std::vector<std::int64_t> v) {
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) == v.end();
}

}  // namespace

TEST(GerritJson, Examples) {
  EXPECT_EQ(parse_gerrit_json(")]}'\n[]"), json::array());
  EXPECT_EQ(parse_gerrit_json("[]"), json::array());
  const auto j = parse_gerrit_json(")]}'\n{\"_number\":42}");
  EXPECT_EQ(j.at("_number").get<int>(), 42);
  EXPECT_EQ(error_of([] { parse_gerrit_json(")]}'\n{oops"); }), ErrorCode::kMalformedJson);
  EXPECT_EQ(error_of([] { parse_gerrit_json(""); }), ErrorCode::kMalformedJson);
}

TEST(GerritJson, GuardIsTransparent) {
  const std::vector<std::string> bodies = {"{}", "[1,2,3]", "\"text\"", "{\"a\":{\"b\":[null,true,1.5]}}",
                                           "42", "{\"s\":\"\\u00e9\"}"};
  for (const auto& b : bodies) {
    EXPECT_EQ(parse_gerrit_json(std::string(kXssiGuard) + "\n" + b), parse_gerrit_json(b)) << b;
    EXPECT_EQ(parse_gerrit_json(b), json::parse(b));
  }
}

TEST(CrawlConfig, Validation) {
  CrawlConfig c;
  c.base_url = "http://localhost:1";
  EXPECT_NO_THROW(c.validate());
  EXPECT_FALSE(c.bot_accounts.empty());
  auto bad = c;
  bad.page_size = 0;
  EXPECT_EQ(error_of([&] { bad.validate(); }), ErrorCode::kInvalidArgument);
  bad = c;
  bad.min_request_interval_ms = -1;
  EXPECT_EQ(error_of([&] { bad.validate(); }), ErrorCode::kInvalidArgument);
  bad = c;
  bad.base_url = "review.example.org";
  EXPECT_EQ(error_of([&] { bad.validate(); }), ErrorCode::kInvalidArgument);
  bad = c;
  bad.max_changes = 0;
  EXPECT_EQ(error_of([&] { bad.validate(); }), ErrorCode::kInvalidArgument);
}

TEST(Url, ParseAndEncode) {
  const auto u = parse_base_url("https://review.example.org:8443/gerrit/");
  EXPECT_EQ(u.scheme_host_port, "https://review.example.org:8443");
  EXPECT_EQ(u.path_prefix, "/gerrit");
  EXPECT_EQ(parse_base_url("http://h").path_prefix, "");
  EXPECT_EQ(error_of([] { parse_base_url("ftp://h"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(encode_path_segment("src/a b.c"), "src%2Fa%20b.c");
  EXPECT_EQ(encode_path_segment("A-z_0.~"), "A-z_0.~");
}

TEST(FetchChangePage, Examples) {
  FixtureGerritServer three(first_n(3));
  GerritClient small(fast_config(three));
  auto page = small.fetch_change_page(0);
  EXPECT_EQ(page.changes.size(), 3u);
  EXPECT_FALSE(page.more_available);

  FixtureGerritServer server(support::fixture_documents());
  GerritClient client(fast_config(server));
  page = client.fetch_change_page(0);
  EXPECT_EQ(page.changes.size(), 10u);
  EXPECT_TRUE(page.more_available);
  page = client.fetch_change_page(20);
  EXPECT_EQ(page.changes.size(), 5u);
  EXPECT_FALSE(page.more_available);
  page = client.fetch_change_page(40);
  EXPECT_TRUE(page.changes.empty());
  EXPECT_FALSE(page.more_available);
  EXPECT_EQ(error_of([&] { client.fetch_change_page(-1); }), ErrorCode::kInvalidArgument);
}

TEST(FetchChangeDetail, Examples) {
  auto docs = support::fixture_documents();
  docs[1].erase("messages");
  FixtureGerritServer server(docs);
  GerritClient client(fast_config(server));
  const auto raw = client.fetch_change_detail(101);
  EXPECT_EQ(raw.doc.at("_number").get<int>(), 101);
  const auto record = normalize_change(raw, client.config());
  EXPECT_EQ(record.files.size(), 2u);

  const auto quiet = normalize_change(client.fetch_change_detail(102), client.config());
  EXPECT_TRUE(quiet.messages.empty());

  EXPECT_EQ(error_of([&] { client.fetch_change_detail(999); }), ErrorCode::kNotFound);
}

TEST(FetchChangeDetail, DiffEndpointServesFixtureContent) {
  FixtureGerritServer server(support::fixture_documents());
  GerritClient client(fast_config(server));
  const auto raw = client.fetch_change_detail(105);
  EXPECT_FALSE(raw.doc.contains("_fixture_diffs"));
  const auto diff = client.fetch_file_diff(105, 1, "src/ui/view.h");
  EXPECT_EQ(count_segments(diff), (SegmentCounts{1, 0, 0}));
}

TEST(Normalize, Examples) {
  const CrawlConfig config;
  json doc = {{"_number", 7},
              {"status", "MERGED"},
              {"created", "2021-04-27 10:00:00.000000000"},
              {"submitted", "2021-04-28 10:00:00.000000000"},
              {"owner", {{"_account_id", 5}, {"name", "Ann"}}},
              {"revisions",
               {{"abc",
                 {{"_number", 1},
                  {"files", {{"/COMMIT_MSG", {{"lines_inserted", 5}}}, {"a.c", {{"lines_inserted", 3}}}}}}}}},
              {"messages", json::array()}};
  RawChange raw{doc, {}, {}};
  auto r = normalize_change(raw, config);
  EXPECT_EQ(r.created_at, parse_timestamp("2021-04-27T10:00:00Z"));
  ASSERT_EQ(r.files.size(), 1u);
  EXPECT_EQ(r.files[0].path, "a.c");
  EXPECT_EQ(r.insertions_total, 3);
  EXPECT_TRUE(r.tz_missing);
  EXPECT_FALSE(r.reopened);

  raw.doc["messages"] = json::array({{{"author", {{"_account_id", 5}, {"name", "Ann"}}},
                                      {"date", "2021-04-27 12:00:00.000000000"},
                                      {"message", "Restored"}}});
  r = normalize_change(raw, config);
  EXPECT_TRUE(r.reopened);

  raw.doc.erase("created");
  try {
    normalize_change(raw, config);
    FAIL() << "expected SchemaError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaError);
    EXPECT_NE(std::string(e.what()).find("created"), std::string::npos);
  }
}

TEST(Normalize, FixtureSpecifics) {
  std::map<std::int64_t, ChangeRecord> by_number;
  for (auto& r : support::fixture_records()) by_number[r.number] = r;
  EXPECT_TRUE(by_number.at(108).reopened);
  EXPECT_EQ(by_number.at(109).status, ChangeStatus::kNew);
  EXPECT_FALSE(by_number.at(109).closed_at);
  EXPECT_TRUE(by_number.at(114).tz_missing);
  EXPECT_EQ(by_number.at(114).owner_tz_offset_minutes, 0);
  EXPECT_EQ(by_number.at(102).owner_tz_offset_minutes, -300);
  // First revision is chosen even when listed second.
  EXPECT_EQ(by_number.at(116).files.size(), 2u);
  const auto& bot_only = by_number.at(107);
  EXPECT_TRUE(std::any_of(bot_only.messages.begin(), bot_only.messages.end(),
                          [](const ReviewMessage& m) { return m.from_bot; }));
  for (const auto& [n, r] : by_number) {
    EXPECT_NO_THROW(validate(r)) << n;
    for (const auto& f : r.files) EXPECT_NE(f.path.front(), '/') << n;
  }
  const auto& ui = by_number.at(105);
  for (const auto& f : ui.files) {
    if (f.path == "src/ui/view.cc") EXPECT_EQ(f.segments, (SegmentCounts{1, 1, 1}));
    if (f.path == "README") EXPECT_FALSE(f.segments);
  }
}

TEST(CountSegments, Classification) {
  const json diff = {{"content", json::parse(R"([{"a":["1","2"],"b":["3"]},{"ab":["k"]},{"b":["4"]},
      {"ab":["k"]},{"a":["7"]},{"skip":4},{"a":["8"]},{"b":["9"]}])")}};
  EXPECT_EQ(count_segments(diff), (SegmentCounts{1, 1, 2}));
  EXPECT_EQ(count_segments(json{{"content", json::array()}}), (SegmentCounts{}));
  EXPECT_EQ(count_segments(json{{"content", json::parse(R"([{"ab":["x"]}])")}}), (SegmentCounts{}));
}

TEST(Crawl, FixtureCountsAndBound) {
  FixtureGerritServer server(support::fixture_documents());
  support::TempDir dir("crawl");
  auto config = fast_config(server);
  const auto manifest = crawl_project(config, dir / "all");
  EXPECT_EQ(manifest.count, 25u);
  EXPECT_TRUE(manifest.complete);
  EXPECT_EQ(read_manifest(dir / "all").count, 25u);
  const auto numbers = stored_numbers(dir / "all");
  EXPECT_EQ(numbers.size(), 25u);
  EXPECT_TRUE(unique(numbers));
  for (const auto& r : read_dataset(dir / "all").records) {
    if (r.status != ChangeStatus::kNew) {
      ASSERT_TRUE(r.closed_at);
      EXPECT_GE(*r.closed_at, r.created_at);
    }
  }

  config.max_changes = 10;
  EXPECT_EQ(crawl_project(config, dir / "ten").count, 10u);
  EXPECT_EQ(stored_numbers(dir / "ten").size(), 10u);
}

TEST(Crawl, MatchesDirectNormalization) {
  FixtureGerritServer server(support::fixture_documents());
  support::TempDir dir("crawl_equal");
  auto config = fast_config(server);
  config.fetch_diffs = true;
  const auto manifest = crawl_project(config, dir.path());
  EXPECT_TRUE(manifest.segments_from_diff);
  auto crawled = read_dataset(dir.path()).records;
  auto direct = support::fixture_records();
  auto by_number = [](const ChangeRecord& a, const ChangeRecord& b) { return a.number < b.number; };
  std::sort(crawled.begin(), crawled.end(), by_number);
  std::sort(direct.begin(), direct.end(), by_number);
  ASSERT_EQ(crawled.size(), direct.size());
  for (std::size_t i = 0; i < crawled.size(); ++i) {
    // Without fetched content the direct path falls back to no segments.
    for (auto& f : crawled[i].files) {
      const auto it = std::find_if(direct[i].files.begin(), direct[i].files.end(),
                                   [&](const FileDiff& d) { return d.path == f.path; });
      ASSERT_NE(it, direct[i].files.end());
      if (!it->segments) f.segments.reset();
    }
    EXPECT_EQ(crawled[i], direct[i]) << crawled[i].number;
  }
}

TEST(Crawl, ResumesAfterInterruption) {
  FixtureGerritServer server(support::fixture_documents());
  support::TempDir dir("resume");
  auto config = fast_config(server);
  config.max_retries = 0;
  server.fail_details_after(7);
  EXPECT_EQ(error_of([&] { crawl_project(config, dir.path()); }), ErrorCode::kHttpError);
  const auto partial = read_manifest(dir.path());
  EXPECT_FALSE(partial.complete);
  const auto before = stored_numbers(dir.path());
  EXPECT_LE(before.size(), 7u);
  EXPECT_EQ(partial.count, before.size());

  server.fail_details_after(-1);
  const auto manifest = crawl_project(config, dir.path());
  EXPECT_EQ(manifest.count, 25u);
  EXPECT_TRUE(manifest.complete);
  const auto after = stored_numbers(dir.path());
  EXPECT_EQ(after.size(), 25u);
  EXPECT_TRUE(unique(after));
}

TEST(Crawl, TornTrailingLineIsDiscarded) {
  FixtureGerritServer server(support::fixture_documents());
  support::TempDir dir("torn");
  auto config = fast_config(server);
  config.max_changes = 5;
  crawl_project(config, dir.path());
  {
    std::ofstream out(dir / kDataFileName, std::ios::app | std::ios::binary);
    out << "{\"number\": 1";
  }
  config.max_changes.reset();
  EXPECT_EQ(crawl_project(config, dir.path()).count, 25u);
  const auto numbers = stored_numbers(dir.path());
  EXPECT_EQ(numbers.size(), 25u);
  EXPECT_TRUE(unique(numbers));
}

TEST(Crawl, NoDuplicatesUnderRepeatedInterruptions) {
  FixtureGerritServer server(support::fixture_documents());
  support::TempDir dir("many");
  auto config = fast_config(server);
  config.max_retries = 0;
  for (int budget : {3, 1, 0, 5, 2}) {
    server.fail_details_after(budget);
    try {
      crawl_project(config, dir.path());
    } catch (const Error&) {
    }
    EXPECT_TRUE(unique(stored_numbers(dir.path())));
  }
  server.fail_details_after(-1);
  EXPECT_EQ(crawl_project(config, dir.path()).count, 25u);
  EXPECT_TRUE(unique(stored_numbers(dir.path())));
}

TEST(Client, RetriesTransientFailures) {
  FixtureGerritServer server(first_n(3));
  auto config = fast_config(server);
  config.max_retries = 3;
  GerritClient client(config);
  server.fail_next_requests(2);
  EXPECT_EQ(client.fetch_change_page(0).changes.size(), 3u);
  EXPECT_EQ(server.total_requests(), 3);

  config.max_retries = 1;
  GerritClient impatient(config);
  server.fail_next_requests(5);
  EXPECT_EQ(error_of([&] { impatient.fetch_change_page(0); }), ErrorCode::kHttpError);
}

TEST(Client, RequestPacing) {
  FixtureGerritServer server(support::fixture_documents());
  auto config = fast_config(server);
  config.min_request_interval_ms = 20;
  config.max_in_flight = 4;
  GerritClient client(config);
  support::TempDir dir("pacing");
  crawl_project(client, dir.path());
  const auto trace = client.request_trace();
  ASSERT_GE(trace.size(), 28u);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    EXPECT_GE(trace[i] - trace[i - 1], std::chrono::milliseconds(20)) << "request " << i;
  }
}

TEST(Synthetic, DeterministicAndServable) {
  SyntheticCorpusOptions options;
  options.changes = 40;
  const auto a = generate_synthetic_corpus(options);
  EXPECT_EQ(a, generate_synthetic_corpus(options));
  EXPECT_EQ(a.size(), 40u);
  options.seed = 2;
  EXPECT_NE(a, generate_synthetic_corpus(options));

  FixtureGerritServer server(a);
  support::TempDir dir("synthetic");
  auto config = fast_config(server);
  config.fetch_diffs = true;
  EXPECT_EQ(crawl_project(config, dir.path()).count, 40u);
  for (const auto& r : read_dataset(dir.path()).records) EXPECT_NO_THROW(validate(r));
}
