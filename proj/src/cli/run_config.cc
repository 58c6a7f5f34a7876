#include "revtime/cli/run_config.h"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "revtime/core/error.h"
#include "revtime/ml/models.h"

namespace revtime::cli {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
  const auto mark = node.Mark();
  std::string where = mark.is_null() ? "" : " (line " + std::to_string(mark.line + 1) + ")";
  throw Error(ErrorCode::kConfigError, what + where);
}

void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
  if (!node.IsMap()) fail(node, "'" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      const std::string path = section.empty() ? key : section + "." + key;
      fail(kv.first, "unknown key '" + path + "'");
    }
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "bad value for '" + key + "'");
  }
}

template <typename T>
void read(const YAML::Node& parent, const std::string& section, const char* key, T& out) {
  if (const auto n = parent[key]) out = scalar<T>(n, section + "." + key);
}

std::vector<std::string> string_list(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) fail(node, "'" + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& item : node) out.push_back(scalar<std::string>(item, key));
  return out;
}

void read_crawl(const YAML::Node& n, RunConfig& c, const fs::path& base_dir) {
  check_keys(n, "crawl",
             {"project", "base_url", "query", "page_size", "max_changes", "request_timeout_s",
              "max_retries", "min_request_interval_ms", "backoff_base_ms", "max_in_flight",
              "fetch_diffs", "bot_accounts", "fixture", "synthetic"});
  auto& k = c.crawl;
  read(n, "crawl", "project", k.project);
  read(n, "crawl", "base_url", k.base_url);
  read(n, "crawl", "query", k.query);
  read(n, "crawl", "page_size", k.page_size);
  if (const auto m = n["max_changes"]) k.max_changes = scalar<int>(m, "crawl.max_changes");
  read(n, "crawl", "request_timeout_s", k.request_timeout_s);
  read(n, "crawl", "max_retries", k.max_retries);
  read(n, "crawl", "min_request_interval_ms", k.min_request_interval_ms);
  read(n, "crawl", "backoff_base_ms", k.backoff_base_ms);
  read(n, "crawl", "max_in_flight", k.max_in_flight);
  read(n, "crawl", "fetch_diffs", k.fetch_diffs);
  if (const auto b = n["bot_accounts"]) k.bot_accounts = string_list(b, "crawl.bot_accounts");
  if (const auto f = n["fixture"]) {
    fs::path p = scalar<std::string>(f, "crawl.fixture");
    c.source.fixture = p.is_relative() ? base_dir / p : p;
  }
  if (const auto s = n["synthetic"]) {
    check_keys(s, "crawl.synthetic",
               {"changes", "developers", "short_fraction", "long_fraction", "reopened_fraction",
                "self_reviewed_fraction", "open_fraction", "abandoned_fraction"});
    gerrit::SyntheticCorpusOptions o;
    read(s, "crawl.synthetic", "changes", o.changes);
    read(s, "crawl.synthetic", "developers", o.developers);
    read(s, "crawl.synthetic", "short_fraction", o.short_fraction);
    read(s, "crawl.synthetic", "long_fraction", o.long_fraction);
    read(s, "crawl.synthetic", "reopened_fraction", o.reopened_fraction);
    read(s, "crawl.synthetic", "self_reviewed_fraction", o.self_reviewed_fraction);
    read(s, "crawl.synthetic", "open_fraction", o.open_fraction);
    read(s, "crawl.synthetic", "abandoned_fraction", o.abandoned_fraction);
    c.source.synthetic = o;
  }
  if (c.source.fixture && c.source.synthetic) fail(n, "crawl.fixture and crawl.synthetic are exclusive");
}

void read_filter(const YAML::Node& n, FilterPolicy& f) {
  check_keys(n, "filter", {"min_hours", "max_hours", "drop_reopened", "drop_self_reviewed", "bot_accounts"});
  read(n, "filter", "min_hours", f.min_hours);
  read(n, "filter", "max_hours", f.max_hours);
  read(n, "filter", "drop_reopened", f.drop_reopened);
  read(n, "filter", "drop_self_reviewed", f.drop_self_reviewed);
  if (const auto b = n["bot_accounts"]) f.bot_accounts = string_list(b, "filter.bot_accounts");
}

void read_features(const YAML::Node& n, features::FeaturizeOptions& f) {
  check_keys(n, "features", {"window_days", "keywords"});
  read(n, "features", "window_days", f.window_days);
  if (f.window_days < 1) fail(n["window_days"], "features.window_days must be positive");
  if (const auto k = n["keywords"]) {
    check_keys(k, "features.keywords", {"refactoring", "perfective", "non_functional"});
    if (const auto l = k["refactoring"]) f.keywords.refactoring = string_list(l, "features.keywords.refactoring");
    if (const auto l = k["perfective"]) f.keywords.perfective = string_list(l, "features.keywords.perfective");
    if (const auto l = k["non_functional"]) {
      f.keywords.non_functional = string_list(l, "features.keywords.non_functional");
    }
  }
}

eval::PipelineConfig read_pipeline(const YAML::Node& n, std::size_t index) {
  const std::string section = "pipelines[" + std::to_string(index) + "]";
  check_keys(n, section, {"name", "algorithm", "normalizer", "selection", "selection_limit", "grid", "repeats"});
  eval::PipelineConfig p;
  const auto algo_node = n["algorithm"];
  if (!algo_node) fail(n, section + ".algorithm is required");
  const auto algo = ml::parse_algorithm(scalar<std::string>(algo_node, section + ".algorithm"));
  if (!algo) fail(algo_node, "unknown algorithm '" + algo_node.as<std::string>() + "'");
  p.grid = ml::default_grid(*algo);
  p.name = std::string(ml::algorithm_name(*algo));
  read(n, section, "name", p.name);
  if (const auto v = n["normalizer"]) {
    const auto k = preprocess::parse_normalizer(scalar<std::string>(v, section + ".normalizer"));
    if (!k) fail(v, "unknown normalizer '" + v.as<std::string>() + "'");
    p.normalizer = *k;
  }
  if (const auto v = n["selection"]) {
    const auto s = eval::parse_selection(scalar<std::string>(v, section + ".selection"));
    if (!s) fail(v, "unknown selection '" + v.as<std::string>() + "'");
    p.selection = *s;
  }
  read(n, section, "selection_limit", p.selection_limit);
  read(n, section, "repeats", p.repeats);
  if (const auto g = n["grid"]) {
    if (!g.IsMap()) fail(g, section + ".grid must be a mapping");
    p.grid.values.clear();
    for (const auto& kv : g) {
      const auto key = kv.first.as<std::string>();
      std::vector<double> values;
      if (kv.second.IsSequence()) {
        for (const auto& v : kv.second) values.push_back(scalar<double>(v, section + ".grid." + key));
      } else {
        values.push_back(scalar<double>(kv.second, section + ".grid." + key));
      }
      p.grid.values[key] = values;
    }
  }
  try {
    p.validate();
  } catch (const Error& e) {
    fail(n, section + ": " + e.what());
  }
  return p;
}

void read_importance(const YAML::Node& n, ImportanceSettings& s) {
  check_keys(n, "importance", {"pipeline", "units"});
  read(n, "importance", "pipeline", s.pipeline);
  if (const auto u = n["units"]) {
    s.dimensions = false;
    if (u.IsScalar()) {
      const auto word = u.as<std::string>();
      if (word == "features") {
        s.all_features = true;
      } else if (word == "dimensions") {
        s.dimensions = true;
      } else {
        fail(u, "importance.units must be 'features', 'dimensions' or a list");
      }
    } else {
      s.units = string_list(u, "importance.units");
    }
  }
}

}  // namespace

std::uint64_t pipeline_seed(std::uint64_t run_seed, const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return ml::mix_seed(run_seed, h);
}

const eval::PipelineConfig& RunConfig::pipeline(const std::string& name) const {
  if (pipelines.empty()) throw Error(ErrorCode::kConfigError, "no pipelines configured");
  if (name.empty()) return pipelines.front();
  for (const auto& p : pipelines) {
    if (p.name == name) return p;
  }
  throw Error(ErrorCode::kConfigError, "no pipeline named '" + name + "'");
}

void RunConfig::apply_overrides(std::optional<std::uint64_t> new_seed, std::optional<int> new_jobs,
                                std::optional<fs::path> new_out) {
  if (new_seed) seed = *new_seed;
  if (new_jobs) jobs = *new_jobs;
  if (new_out) out = *new_out;
  if (jobs < 1) throw Error(ErrorCode::kConfigError, "jobs must be >= 1");
  for (auto& p : pipelines) {
    p.base_seed = pipeline_seed(seed, p.name);
    p.jobs = jobs;
  }
  if (source.synthetic) source.synthetic->seed = seed;
}

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kConfigError, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  RunConfig c;
  if (root.IsNull()) {
    c.apply_overrides({}, {}, {});
    return c;
  }
  check_keys(root, "", {"seed", "jobs", "out", "crawl", "filter", "features", "pipelines", "ablation", "importance"});
  read(root, "", "seed", c.seed);
  read(root, "", "jobs", c.jobs);
  if (const auto o = root["out"]) {
    fs::path p = scalar<std::string>(o, "out");
    c.out = p.is_relative() ? base_dir / p : p;
  }
  if (const auto n = root["crawl"]) read_crawl(n, c, base_dir);
  if (const auto n = root["filter"]) read_filter(n, c.filter);
  if (const auto n = root["features"]) read_features(n, c.features);
  if (const auto n = root["pipelines"]) {
    if (!n.IsSequence()) fail(n, "'pipelines' must be a list");
    std::set<std::string> names;
    for (std::size_t i = 0; i < n.size(); ++i) {
      c.pipelines.push_back(read_pipeline(n[i], i));
      if (!names.insert(c.pipelines.back().name).second) {
        fail(n[i], "duplicate pipeline name '" + c.pipelines.back().name + "'");
      }
    }
  }
  if (const auto n = root["ablation"]) {
    check_keys(n, "ablation", {"pipeline"});
    read(n, "ablation", "pipeline", c.ablation_pipeline);
  }
  if (const auto n = root["importance"]) read_importance(n, c.importance);

  try {
    c.filter.validate();
    c.features.keywords.validate();
    if (!c.source.offline() && !c.crawl.base_url.empty()) c.crawl.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  c.apply_overrides({}, {}, {});
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str(), path.parent_path());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kConfigError) throw;
    const std::string prefix = std::string(error_code_name(e.code())) + ": ";
    throw Error(ErrorCode::kConfigError, path.string() + ": " + std::string(e.what()).substr(prefix.size()));
  }
}

}  // namespace revtime::cli
