#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "revtime/features/features.h"
#include "support/criteria.h"
#include "support/error_code.h"
#include "support/fixture_corpus.h"
#include "support/temp_dir.h"

using namespace revtime;
using namespace revtime::features;
using support::error_of;

namespace {

const Timestamp kBase = parse_timestamp("2021-01-04T00:00:00Z");

Timestamp at_hours(double h) {
  return kBase + std::chrono::microseconds(static_cast<std::int64_t>(h * 3.6e9));
}

ChangeRecord change(std::int64_t number, AccountId owner, double created_h, double duration_h,
                    std::vector<std::string> paths = {"src/a.c"}) {
  ChangeRecord r;
  r.change_id = "I" + std::to_string(number);
  r.number = number;
  r.project = "p";
  r.branch = "main";
  r.status = ChangeStatus::kMerged;
  r.created_at = at_hours(created_h);
  r.closed_at = at_hours(created_h + duration_h);
  r.owner_id = owner;
  r.owner_name = "dev" + std::to_string(owner);
  for (auto& p : paths) {
    r.files.push_back({p, 1, 1, std::nullopt});
    r.insertions_total += 1;
    r.deletions_total += 1;
  }
  return r;
}

void add_message(ChangeRecord& r, AccountId author, double offset_h) {
  ReviewMessage m;
  m.author_id = author;
  m.author_name = "dev" + std::to_string(author);
  m.posted_at = r.created_at + std::chrono::microseconds(static_cast<std::int64_t>(offset_h * 3.6e9));
  m.text = "comment";
  r.messages.push_back(m);
}

double value(const FeatureVector& v, std::string_view name) { return v.values[*feature_index(name)]; }

template <std::size_t N>
double block(const std::array<double, N>& a, std::string_view name, std::size_t offset) {
  return a[*feature_index(name) - offset];
}

std::vector<ChangeRecord> completed_only(const std::vector<ChangeRecord>& all) {
  std::vector<ChangeRecord> out;
  std::copy_if(all.begin(), all.end(), std::back_inserter(out), [](const auto& r) { return r.completed(); });
  return out;
}

constexpr std::size_t kOwnerOffset = 3 + 6 + 10 + 7;
constexpr std::size_t kFileOffset = kOwnerOffset + 18;

}  // namespace

TEST(FeatureNames, CanonicalLayout) {
  EXPECT_EQ(feature_names().size(), 50u);
  std::size_t total = 0;
  const std::array<std::size_t, 6> sizes = {3, 6, 10, 7, 18, 6};
  for (std::size_t d = 0; d < kAllDimensions.size(); ++d) {
    EXPECT_EQ(dimension_columns(kAllDimensions[d]).size(), sizes[d]);
    total += sizes[d];
    EXPECT_EQ(parse_dimension(dimension_name(kAllDimensions[d])), kAllDimensions[d]);
  }
  EXPECT_EQ(total, 50u);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(feature_index(feature_names()[i]), i);
  EXPECT_FALSE(feature_index("no_such_feature"));
  EXPECT_FALSE(parse_dimension("nope"));
}

TEST(DateFeatures, Examples) {
  ChangeRecord r = change(1, 1, 0, 1);
  r.created_at = parse_timestamp("2021-04-26T10:00:00Z");
  r.owner_tz_offset_minutes = 0;
  auto d = extract_date_features(r);
  EXPECT_EQ(d[0], 0);
  EXPECT_EQ(d[1], 0);
  EXPECT_EQ(d[2], 0);

  r.created_at = parse_timestamp("2021-04-25T23:30:00Z");
  r.owner_tz_offset_minutes = 120;
  d = extract_date_features(r);
  EXPECT_EQ(d[0], 0);
  EXPECT_EQ(d[1], 0);
  EXPECT_EQ(d[2], 120);

  r.created_at = parse_timestamp("2021-04-26T00:10:00Z");
  r.owner_tz_offset_minutes = -720;
  d = extract_date_features(r);
  EXPECT_EQ(d[0], 6);
  EXPECT_EQ(d[1], 1);
  EXPECT_EQ(d[2], -720);
}

TEST(ChangeEntropy, Examples) {
  EXPECT_EQ(change_entropy(std::vector<std::int64_t>{10}), 0.0);
  EXPECT_DOUBLE_EQ(change_entropy(std::vector<std::int64_t>{5, 5}), 1.0);
  const double want = -(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25));
  EXPECT_NEAR(change_entropy(std::vector<std::int64_t>{3, 1}), want, 1e-12);
  EXPECT_NEAR(change_entropy(std::vector<std::int64_t>{3, 1}), 0.8113, 1e-4);
  EXPECT_EQ(change_entropy(std::vector<std::int64_t>{0, 0}), 0.0);
  EXPECT_EQ(change_entropy(std::vector<std::int64_t>{0, 7}), 0.0);
  EXPECT_EQ(error_of([] { change_entropy(std::vector<std::int64_t>{}); }), ErrorCode::kEmptyInput);
}

TEST(ChangeEntropy, BoundedAndPermutationInvariant) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::int64_t> churns(1 + rng() % 12);
    for (auto& c : churns) c = static_cast<std::int64_t>(rng() % 50);
    const double h = change_entropy(churns);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, 1.0 + 1e-12);
    std::shuffle(churns.begin(), churns.end(), rng);
    EXPECT_NEAR(change_entropy(churns), h, 1e-12);
  }
}

TEST(CodeFeatures, Examples) {
  ChangeRecord r = change(1, 1, 0, 1, {});
  r.files = {{"a/x.c", 10, 2, std::nullopt}, {"b/y.h", 0, 5, std::nullopt}};
  auto c = extract_code_features(r);
  EXPECT_EQ(c[0], 10);
  EXPECT_EQ(c[1], 7);
  EXPECT_EQ(c[2], 17);
  EXPECT_EQ(c[3], 2);
  EXPECT_EQ(c[4], 2);
  EXPECT_EQ(c[5], 2);
  // No diff content: one segment per file, classified by its line counts.
  EXPECT_EQ(c[6], 0);
  EXPECT_EQ(c[7], 1);
  EXPECT_EQ(c[8], 1);

  r.files.clear();
  for (double v : extract_code_features(r)) EXPECT_EQ(v, 0);

  r.files = {{"x.c", 1, 0, std::nullopt}, {"y.c", 2, 0, std::nullopt}};
  c = extract_code_features(r);
  EXPECT_EQ(c[4], 1);
  EXPECT_EQ(c[5], 1);
  EXPECT_EQ(c[6], 2);
}

TEST(CodeFeatures, UsesSegmentCountsWhenPresent) {
  ChangeRecord r = change(1, 1, 0, 1, {});
  r.files = {{"a/x.c", 10, 2, SegmentCounts{2, 1, 3}}, {"Makefile", 1, 0, SegmentCounts{1, 0, 0}}};
  const auto c = extract_code_features(r);
  EXPECT_EQ(c[4], 2);
  EXPECT_EQ(c[6], 3);
  EXPECT_EQ(c[7], 1);
  EXPECT_EQ(c[8], 3);
}

TEST(TextFeatures, Examples) {
  const auto policy = KeywordPolicy::defaults();
  ChangeRecord r = change(1, 1, 0, 1);
  r.subject = "Fix crash";
  auto t = extract_text_features(r, policy);
  EXPECT_EQ(t[0], 9);
  EXPECT_EQ(t[1], 2);

  r.message_body = "We refactor the parser";
  t = extract_text_features(r, policy);
  EXPECT_EQ(block(t, "is_refactoring", 19), 1);
  EXPECT_EQ(block(t, "is_perfective", 19), 0);
  EXPECT_EQ(block(t, "msg_length", 19), 22);
  EXPECT_EQ(block(t, "msg_word_count", 19), 4);

  r.subject.clear();
  r.message_body.clear();
  for (double v : extract_text_features(r, policy)) EXPECT_EQ(v, 0);
}

TEST(TextFeatures, KeywordMatchIsCaseInsensitive) {
  ChangeRecord r = change(1, 1, 0, 1);
  r.message_body = "Update DOCUMENTATION and Optimize loops";
  const auto t = extract_text_features(r, KeywordPolicy::defaults());
  EXPECT_EQ(block(t, "is_non_fonctional", 19), 1);
  EXPECT_EQ(block(t, "is_perfective", 19), 1);
  EXPECT_EQ(block(t, "is_refactoring", 19), 0);
}

TEST(KeywordPolicy, Validation) {
  EXPECT_NO_THROW(KeywordPolicy::defaults().validate());
  auto p = KeywordPolicy::defaults();
  p.perfective.clear();
  EXPECT_EQ(error_of([&] { p.validate(); }), ErrorCode::kInvalidArgument);
  p = KeywordPolicy::defaults();
  p.refactoring.push_back("Rename");
  EXPECT_EQ(error_of([&] { p.validate(); }), ErrorCode::kInvalidArgument);
}

TEST(OwnerExperience, FirstChangeIsAllZero) {
  const auto r = change(10, 1, 100, 5);
  for (double v : extract_owner_experience(r, {})) EXPECT_EQ(v, 0);
  const std::vector<ChangeRecord> others = {change(1, 2, 0, 5), change(2, 3, 10, 5, {"doc/x"})};
  const auto o = extract_owner_experience(r, others);
  EXPECT_EQ(block(o, "#owner_prior_changes", kOwnerOffset), 0);
  EXPECT_EQ(block(o, "#prior_subsystem_changes", kOwnerOffset), 1);
}

TEST(OwnerExperience, DurationsAndMergeRatio) {
  std::vector<ChangeRecord> history = {change(1, 1, 0, 30), change(2, 1, 10, 50),
                                       change(3, 1, 20, 40)};
  history[2].status = ChangeStatus::kAbandoned;
  add_message(history[0], 1, 1);
  add_message(history[0], 2, 2);
  add_message(history[1], 2, 1);
  auto r = change(10, 1, 200, 5);
  auto o = extract_owner_experience(r, history);
  EXPECT_EQ(block(o, "#owner_prior_changes", kOwnerOffset), 3);
  EXPECT_EQ(block(o, "#prior_merged_changes", kOwnerOffset), 2);
  EXPECT_EQ(block(o, "#prior_abandoned_changes", kOwnerOffset), 1);
  EXPECT_NEAR(block(o, "merge_ratio", kOwnerOffset), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(block(o, "prior_code_reviews_duration_min", kOwnerOffset), 30);
  EXPECT_EQ(block(o, "prior_code_reviews_duration_max", kOwnerOffset), 50);
  EXPECT_NEAR(block(o, "prior_code_reviews_duration_avg", kOwnerOffset), 40, 1e-9);
  EXPECT_NEAR(block(o, "prior_code_reviews_duration_std", kOwnerOffset), std::sqrt(200.0 / 3.0), 1e-9);
  EXPECT_EQ(block(o, "#owner_previous_message", kOwnerOffset), 1);
  EXPECT_EQ(block(o, "#owner_exchanged_messages", kOwnerOffset), 3);
  EXPECT_EQ(block(o, "#owner_messages_avg_per_changes_max", kOwnerOffset), 2);
  EXPECT_EQ(block(o, "#owner_messages_avg_per_changes_min", kOwnerOffset), 0);

  history.pop_back();
  o = extract_owner_experience(r, history);
  EXPECT_EQ(block(o, "prior_code_reviews_duration_avg", kOwnerOffset), 40);
  EXPECT_EQ(block(o, "prior_code_reviews_duration_std", kOwnerOffset), 10);
}

TEST(OwnerExperience, ReviewedChangesAndSubsystems) {
  std::vector<ChangeRecord> history = {change(1, 2, 0, 5, {"src/b.c"}), change(2, 3, 1, 5, {"doc/x"}),
                                       change(3, 1, 2, 5, {"src/c.c"})};
  add_message(history[0], 1, 1);
  add_message(history[1], 1, 1);
  const auto o = extract_owner_experience(change(10, 1, 100, 5), history);
  EXPECT_EQ(block(o, "#reviewed_changes_owner", kOwnerOffset), 2);
  EXPECT_EQ(block(o, "#prior_subsystem_changes", kOwnerOffset), 2);
  EXPECT_EQ(block(o, "#prior_owner_subsystem_changes", kOwnerOffset), 1);
  EXPECT_NEAR(block(o, "prior_owner_subsystem_changes_ratio", kOwnerOffset), 1.0, 1e-15);
}

TEST(FileHistory, Examples) {
  const auto r = change(10, 1, 500, 5, {"src/a.c", "src/b.c"});
  for (double v : extract_file_history(r, std::vector<ChangeRecord>{change(1, 2, 0, 5, {"other.c"})})) EXPECT_EQ(v, 0);

  const std::vector<ChangeRecord> two = {change(1, 1, 0, 40, {"src/a.c"}), change(2, 2, 10, 60, {"src/b.c"}),
                                         change(3, 3, 20, 70, {"src/z.c"})};
  auto f = extract_file_history(r, two);
  EXPECT_EQ(block(f, "files_changes_duration_min", kFileOffset), 40);
  EXPECT_EQ(block(f, "files_changes_duration_max", kFileOffset), 60);
  EXPECT_EQ(block(f, "files_changes_duration_avg", kFileOffset), 50);
  EXPECT_EQ(block(f, "files_changes_duration_std", kFileOffset), 10);
  EXPECT_EQ(block(f, "#developers_file", kFileOffset), 2);
  EXPECT_EQ(block(f, "#prior_changes_files", kFileOffset), 2);

  f = extract_file_history(r, std::vector<ChangeRecord>{two[0]});
  EXPECT_EQ(block(f, "files_changes_duration_std", kFileOffset), 0);
  EXPECT_EQ(block(f, "#prior_changes_files", kFileOffset), 1);
}

TEST(ExtractAll, EmptyHistoryZerosHistoricalBlocks) {
  const auto r = change(1, 1, 0, 30);
  const graph::InteractionGraph g = graph::build_graph({}, r.created_at, graph::kDefaultWindowDays);
  const auto v = extract_all(r, {}, g, KeywordPolicy::defaults());
  EXPECT_EQ(v.values.size(), 50u);
  EXPECT_NEAR(v.target_hours, 30, 1e-9);
  for (auto d : {Dimension::kCollaboration, Dimension::kOwner, Dimension::kFileHistory}) {
    for (auto c : dimension_columns(d)) EXPECT_EQ(v.values[c], 0) << feature_names()[c];
  }
  EXPECT_EQ(value(v, "#files"), 1);
}

TEST(Temporal, FutureRecordsNeverChangeOutput) {
  std::mt19937_64 rng(11);
  std::vector<ChangeRecord> history;
  for (int i = 0; i < 60; ++i) {
    const std::vector<std::string> paths = {"m" + std::to_string(rng() % 4) + "/f" + std::to_string(rng() % 5) + ".c"};
    auto c = change(i + 1, 1 + static_cast<AccountId>(rng() % 5), i * 10.0, 1 + rng() % 100, paths);
    add_message(c, 1 + static_cast<AccountId>(rng() % 5), 0.5);
    add_message(c, c.owner_id, 0.7);
    if (rng() % 4 == 0) c.status = ChangeStatus::kAbandoned;
    history.push_back(c);
  }
  for (std::size_t k = 30; k < 35; ++k) {
    const auto& t = history[k];
    const auto base = extract_all(t, std::span(history).first(k), graph::build_graph(std::span(history).first(k), t.created_at),
                                  KeywordPolicy::defaults());
    // Every later change, plus one created at exactly the target's instant.
    auto polluted = history;
    auto twin = change(1000, t.owner_id, 0, 3, {t.files[0].path});
    twin.created_at = t.created_at;
    twin.closed_at = t.created_at + std::chrono::hours(1);
    add_message(twin, 2, 0.1);
    polluted.push_back(twin);
    const auto after = extract_all(t, polluted, graph::build_graph(polluted, t.created_at), KeywordPolicy::defaults());
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      EXPECT_EQ(base.values[c], after.values[c]) << "change " << t.number << " " << feature_names()[c];
    }
    const auto batch = featurize(std::vector<ChangeRecord>{t}, polluted, FeaturizeOptions{});
    for (std::size_t c = 0; c < kFeatureCount; ++c) EXPECT_EQ(batch.values(0, c), base.values[c]);
  }
}

TEST(Temporal, UnfinishedPriorsAreNotExperience) {
  auto prior = change(1, 1, 0, 100);
  auto r = change(2, 1, 50, 5);
  const auto o = extract_owner_experience(r, std::vector<ChangeRecord>{prior});
  EXPECT_EQ(block(o, "prior_code_reviews_duration_max", kOwnerOffset), 0);
}

TEST(Featurize, QuadrupleInvariantsOnFixture) {
  const auto all = support::fixture_records();
  const auto m = featurize(completed_only(all), all, FeaturizeOptions{});
  EXPECT_NO_THROW(m.check_sorted());
  const std::array<std::string, 3> bases = {"prior_code_reviews_duration", "#owner_messages_avg_per_changes",
                                            "files_changes_duration"};
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (const auto& b : bases) {
      const double mn = m.values(i, *feature_index(b + "_min"));
      const double mx = m.values(i, *feature_index(b + "_max"));
      const double avg = m.values(i, *feature_index(b + "_avg"));
      const double sd = m.values(i, *feature_index(b + "_std"));
      EXPECT_LE(mn, avg + 1e-12);
      EXPECT_LE(avg, mx + 1e-12);
      EXPECT_GE(sd, 0);
    }
    const double ratio = m.values(i, *feature_index("merge_ratio"));
    EXPECT_GE(ratio, 0);
    EXPECT_LE(ratio, 1);
    EXPECT_EQ(m.values(i, *feature_index("#prior_merged_changes")) +
                  m.values(i, *feature_index("#prior_abandoned_changes")),
              m.values(i, *feature_index("#owner_prior_changes")));
  }
}

TEST(FeatureMatrix, CsvRoundTripAndColumnOps) {
  const auto all = support::fixture_records();
  const auto m = featurize(completed_only(all), all, FeaturizeOptions{});
  support::TempDir dir("features");
  write_feature_csv(dir / "f.csv", m);
  const auto back = read_feature_csv(dir / "f.csv");
  EXPECT_EQ(back.feature_names, m.feature_names);
  EXPECT_EQ(back.change_numbers, m.change_numbers);
  EXPECT_EQ(back.created_at, m.created_at);
  EXPECT_EQ(back.targets, m.targets);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t c = 0; c < m.cols(); ++c) EXPECT_EQ(back.values(i, c), m.values(i, c));
  }

  const auto date = dimension_columns(Dimension::kDate);
  const auto only = m.select_columns(date);
  EXPECT_EQ(only.cols(), 3u);
  EXPECT_EQ(only.feature_names[0], "days_of_the_weeks_of_date_created");
  const auto rest = m.without_columns(date);
  EXPECT_EQ(rest.cols(), 47u);
  EXPECT_EQ(rest.feature_names[0], "degree_centrality");
  const auto tail = m.row_range(2, 5);
  EXPECT_EQ(tail.rows(), 3u);
  EXPECT_EQ(tail.change_numbers[0], m.change_numbers[2]);

  write_feature_csv(dir / "sub.csv", rest);
  EXPECT_EQ(read_feature_csv(dir / "sub.csv").cols(), 47u);
}

TEST(FeatureMatrix, CheckSortedRejectsDisorder) {
  const auto all = support::fixture_records();
  auto m = featurize(completed_only(all), all, FeaturizeOptions{});
  std::swap(m.created_at[0], m.created_at[1]);
  EXPECT_EQ(error_of([&] { m.check_sorted(); }), ErrorCode::kSchemaError);
}

TEST(FeatureGolden, FixtureMatchesIndependentReference) {
  const auto outcome = criteria::feature_golden_file();
  EXPECT_TRUE(outcome.passed) << outcome.detail;
}
