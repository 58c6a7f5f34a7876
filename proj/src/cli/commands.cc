#include "revtime/cli/commands.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "revtime/core/csv.h"
#include "revtime/gerrit/crawl.h"
#include "revtime/gerrit/fixture_server.h"
#include "revtime/importance/importance.h"

namespace revtime::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string finish(const RunConfig& c, const std::string& command, const std::string& summary) {
  write_text(c.out / (command + ".summary.txt"), summary);
  return summary;
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

features::FeatureMatrix load_features(const RunConfig& c, const CommandInput& in) {
  auto m = features::read_feature_csv(in.input.value_or(c.out / layout::kFeatures));
  m.check_sorted();
  return m;
}

fs::path eval_path(const RunConfig& c, const std::string& name) {
  return c.out / layout::kEval / (name + ".csv");
}

std::string metric_line(const eval::EvalResult& r) {
  const auto mae = r.summary(&eval::EvalRecord::mae);
  const auto mre = r.summary(&eval::EvalRecord::mre);
  const auto sa = r.summary(&eval::EvalRecord::sa);
  return "MAE mean " + fixed(mae.mean) + " median " + fixed(mae.median) + ", MRE mean " + fixed(mre.mean) +
         " median " + fixed(mre.median) + ", SA mean " + fixed(sa.mean) + " median " + fixed(sa.median);
}

std::string comparisons_text(const std::vector<stats::ComparisonResult>& rows) {
  std::string s;
  for (const auto& r : rows) {
    s += "  " + r.first + " vs " + r.second + ": p = " + format_double(r.p_value) +
         ", adjusted " + format_double(r.p_adjusted) + (r.significant ? " (significant)" : "") +
         ", Cliff's d " + fixed(r.cliffs_d) + " (" + std::string(stats::magnitude_label(r.magnitude)) + ")\n";
  }
  return s;
}

std::string ranking_text(const stats::EsdRanking& ranking) {
  std::string s;
  for (std::size_t i = 0; i < ranking.clusters.size(); ++i) {
    s += "  " + std::to_string(i + 1) + ":";
    for (const auto& g : ranking.clusters[i]) s += " " + g;
    s += "\n";
  }
  return s;
}

std::vector<std::string> importance_units(const RunConfig& c, const features::FeatureMatrix& data) {
  const auto& s = c.importance;
  if (s.all_features) return data.feature_names;
  if (!s.units.empty()) return s.units;
  std::vector<std::string> dims;
  for (auto d : features::kAllDimensions) {
    const std::string name(features::dimension_name(d));
    bool present = false;
    for (const auto& f : data.feature_names) {
      const auto idx = features::feature_index(f);
      present = present || (idx && features::feature_dimension(*idx) == d);
    }
    if (present) dims.push_back(name);
  }
  return dims;
}

}  // namespace

std::string cmd_crawl(const RunConfig& c) {
  const fs::path dir = c.out / layout::kDataset;
  DatasetManifest manifest;
  std::string origin;
  if (c.source.offline()) {
    std::vector<json> docs;
    if (c.source.fixture) {
      docs = gerrit::load_fixture_changes(c.source.fixture->string());
      origin = "fixture " + c.source.fixture->filename().string();
    } else {
      docs = gerrit::generate_synthetic_corpus(*c.source.synthetic);
      origin = "synthetic corpus of " + std::to_string(docs.size()) + " changes";
    }
    gerrit::FixtureGerritServer server(std::move(docs));
    auto crawl = c.crawl;
    crawl.base_url = server.base_url();
    manifest = gerrit::crawl_project(crawl, dir);
  } else {
    if (c.crawl.base_url.empty()) throw Error(ErrorCode::kConfigError, "crawl.base_url is not set");
    manifest = gerrit::crawl_project(c.crawl, dir);
    origin = c.crawl.base_url;
  }
  return finish(c, "crawl",
                "crawl: " + std::to_string(manifest.count) + " changes from " + origin +
                    (manifest.complete ? "" : " (incomplete)") + "\n");
}

std::string cmd_filter(const RunConfig& c, const CommandInput& in) {
  const auto loaded = read_dataset(in.input.value_or(c.out / layout::kDataset));
  const auto outcome = apply_filters(loaded.records, c.filter);
  DatasetManifest manifest = loaded.manifest;
  manifest.created_at.reset();
  manifest.filter_policy = c.filter;
  manifest.filter_report = outcome.report;
  write_dataset(outcome.kept, c.out / layout::kFiltered, manifest);
  const json report = {{"policy", filter_policy_to_json(c.filter)},
                       {"report", filter_report_to_json(outcome.report)}};
  write_text(c.out / layout::kFilterReport, report.dump(2) + "\n");
  const auto& r = outcome.report;
  std::ostringstream s;
  s << "filter: kept " << r.kept << " of " << r.total() << "; dropped incomplete " << r.dropped_incomplete
    << ", reopened " << r.dropped_reopened << ", self-reviewed " << r.dropped_self << ", short "
    << r.dropped_short << ", long " << r.dropped_long << "\n";
  return finish(c, "filter", s.str());
}

std::string cmd_featurize(const RunConfig& c, const CommandInput& in) {
  const fs::path filtered = in.input.value_or(c.out / layout::kFiltered);
  const auto records = read_dataset(filtered).records;
  const fs::path history_dir = c.out / layout::kDataset;
  const auto history = fs::exists(history_dir / kDataFileName) ? read_dataset(history_dir).records : records;
  const auto m = features::featurize(records, history, c.features);
  write_feature_csv(c.out / layout::kFeatures, m);
  return finish(c, "featurize",
                "featurize: " + std::to_string(m.rows()) + " rows x " + std::to_string(m.cols()) +
                    " features against " + std::to_string(history.size()) + " changes of history\n");
}

std::string cmd_evaluate(const RunConfig& c, const CommandInput& in) {
  const auto data = load_features(c, in);
  if (c.pipelines.empty()) throw Error(ErrorCode::kConfigError, "no pipelines configured");
  fs::create_directories(c.out / layout::kEval);
  std::string s;
  for (const auto& p : c.pipelines) {
    const auto result = eval::run_online_validation(data, p);
    write_eval_csv(eval_path(c, p.name), result);
    write_text(c.out / layout::kEval / (p.name + ".summary.json"),
               eval::eval_summary_json(result, p).dump(2) + "\n");
    s += "evaluate " + p.name + ": " + std::to_string(result.records.size()) + " records, " + metric_line(result) +
         (result.any_failed ? " (some records failed)" : "") + "\n";
  }
  return finish(c, "evaluate", s);
}

std::string cmd_compare(const RunConfig& c) {
  if (c.pipelines.size() < 2) throw Error(ErrorCode::kTooFewGroups, "compare needs at least two pipelines");
  std::vector<eval::EvalResult> results;
  for (const auto& p : c.pipelines) results.push_back(eval::read_eval_csv(eval_path(c, p.name), p.name));
  const fs::path dir = c.out / layout::kCompare;
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, double eval::EvalRecord::*>> metrics = {
      {"mae", &eval::EvalRecord::mae}, {"mre", &eval::EvalRecord::mre}, {"sa", &eval::EvalRecord::sa}};
  std::string s = "compare: " + std::to_string(results.size()) + " pipelines\n";
  for (const auto& [name, metric] : metrics) {
    std::vector<stats::ComparisonResult> rows;
    for (std::size_t i = 0; i < results.size(); ++i) {
      for (std::size_t j = i + 1; j < results.size(); ++j) {
        rows.push_back(importance::compare_results(results[i], results[j], metric));
      }
    }
    stats::adjust(rows, rows.size());
    importance::write_comparisons_csv(dir / (name + ".csv"), rows);
    s += name + " (Bonferroni m = " + std::to_string(rows.size()) + "):\n" + comparisons_text(rows);
  }
  for (const auto& [name, metric] : metrics) {
    if (name == "sa") continue;
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : results) groups[r.config_name] = r.metric_values(metric);
    const auto ranking = stats::scott_knott_esd(groups, stats::Order::kAscending);
    importance::write_ranking_csv(dir / ("ranking_" + name + ".csv"), ranking);
    s += "Scott-Knott ESD on " + name + " (best first):\n" + ranking_text(ranking);
  }
  return finish(c, "compare", s);
}

std::string cmd_ablate(const RunConfig& c, const CommandInput& in) {
  const auto data = load_features(c, in);
  const auto& p = c.pipeline(c.ablation_pipeline);
  const auto result = importance::dimension_ablation(data, p);
  const fs::path dir = c.out / layout::kAblation;
  fs::create_directories(dir);
  std::string s = "ablate " + p.name + ":\n";
  for (const auto& mode : result.modes) {
    const auto& r = result.results.at(mode);
    write_eval_csv(dir / (mode + ".csv"), r);
    s += "  " + mode + ": " + metric_line(r) + "\n";
  }
  importance::write_comparisons_csv(dir / "comparisons.csv", result.comparisons);
  s += "all vs single dimension on MAE:\n" + comparisons_text(result.comparisons);
  return finish(c, "ablate", s);
}

std::string cmd_rank(const RunConfig& c, const CommandInput& in) {
  const auto data = load_features(c, in);
  const auto& p = c.pipeline(c.importance.pipeline);
  const auto units = importance_units(c, data);
  const auto r = importance::loco_all(data, p, units);
  const fs::path dir = c.out / layout::kRank;
  fs::create_directories(dir);
  importance::write_importance_csv(dir / "importance.csv", r);
  importance::write_ranking_csv(dir / "ranking.csv", r.ranking);
  write_eval_csv(dir / "full.csv", r.full);
  return finish(c, "rank",
                "rank " + p.name + " (" + r.fingerprint + "), " + std::to_string(units.size()) +
                    " units, LOCO + Scott-Knott ESD (most important first):\n" + ranking_text(r.ranking));
}

std::vector<std::string> run_artifacts(const fs::path& out) {
  std::vector<std::string> files;
  if (!fs::exists(out)) return files;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), out).generic_string();
    if (rel != layout::kReport) files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string cmd_report(const RunConfig& c) {
  const auto files = run_artifacts(c.out);
  if (files.empty()) throw Error(ErrorCode::kIoError, "nothing to report in " + c.out.string());
  auto describe = [](const std::string& f) -> std::string {
    if (f.rfind("meta/", 0) == 0) return "run metadata (timestamps)";
    if (f.ends_with(".summary.txt")) return "command summary";
    if (f.ends_with(".summary.json")) return "evaluation summary";
    if (f.ends_with("manifest.json")) return "dataset manifest";
    if (f.ends_with("manifest.meta.json")) return "dataset manifest metadata";
    if (f.ends_with(".jsonl")) return "change records";
    if (f == layout::kFilterReport) return "filter report";
    if (f == layout::kFeatures) return "feature matrix";
    if (f.rfind("eval/", 0) == 0) return "online validation records";
    if (f.rfind("compare/ranking_", 0) == 0) return "Scott-Knott ESD ranking";
    if (f.rfind("compare/", 0) == 0) return "pairwise comparisons";
    if (f == "ablation/comparisons.csv") return "ablation comparisons";
    if (f.rfind("ablation/", 0) == 0) return "ablation validation records";
    if (f == "rank/importance.csv") return "LOCO importance";
    if (f == "rank/ranking.csv") return "importance ranking";
    if (f == "rank/full.csv") return "LOCO baseline records";
    return "file";
  };

  std::string md = "# Run report\n\n";
  md += "Seed " + std::to_string(c.seed) + ", " + std::to_string(c.pipelines.size()) + " pipeline(s).\n\n";
  const std::vector<std::string> sections = {"crawl", "filter", "featurize", "evaluate", "compare", "ablate", "rank"};
  for (const auto& cmd : sections) {
    const fs::path p = c.out / (cmd + ".summary.txt");
    if (!fs::exists(p)) continue;
    md += "## " + cmd + "\n\n```\n" + read_text(p) + "```\n\n";
  }
  md += "## Artifacts\n\n| artifact | content |\n|---|---|\n";
  for (const auto& f : files) md += "| `" + f + "` | " + describe(f) + " |\n";
  write_text(c.out / layout::kReport, md);
  return "report: " + std::to_string(files.size()) + " artifacts\n";
}

std::string cmd_synth(const gerrit::SyntheticCorpusOptions& options, const fs::path& path) {
  const auto docs = gerrit::generate_synthetic_corpus(options);
  write_text(path, json(docs).dump(1) + "\n");
  return "synth: " + std::to_string(docs.size()) + " changes\n";
}

void write_command_meta(const fs::path& out, const std::string& command, const std::vector<std::string>& argv,
                        double seconds) {
  const auto now = std::chrono::time_point_cast<std::chrono::microseconds>(std::chrono::system_clock::now());
  const json meta = {{"command", command}, {"argv", argv}, {"finished_at", format_timestamp(now)},
                     {"seconds", seconds}};
  write_text(out / layout::kMeta / (command + ".json"), meta.dump(2) + "\n");
}

int exit_code_for(ErrorCode code) { return 10 + static_cast<int>(code); }

}  // namespace revtime::cli
