#include "revtime/importance/importance.h"

#include <algorithm>
#include <fstream>

#include "revtime/core/csv.h"
#include "revtime/core/error.h"

namespace revtime::importance {

std::vector<std::size_t> unit_columns(const FeatureMatrix& data, const std::string& unit) {
  const auto& names = data.feature_names;
  auto it = std::find(names.begin(), names.end(), unit);
  if (it != names.end()) return {static_cast<std::size_t>(it - names.begin())};
  if (auto dim = features::parse_dimension(unit)) {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < names.size(); ++j) {
      const auto idx = features::feature_index(names[j]);
      if (idx && features::feature_dimension(*idx) == *dim) cols.push_back(j);
    }
    if (cols.empty()) {
      throw Error(ErrorCode::kUnknownUnit, "dimension '" + unit + "' has no columns in the data");
    }
    return cols;
  }
  throw Error(ErrorCode::kUnknownUnit, "'" + unit + "' is neither a feature nor a dimension");
}

std::vector<double> loco_deltas(const eval::EvalResult& full, const eval::EvalResult& minus) {
  if (full.records.size() != minus.records.size()) {
    throw Error(ErrorCode::kLengthMismatch, "LOCO runs differ in record count");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < full.records.size(); ++i) {
    const auto& f = full.records[i];
    const auto& m = minus.records[i];
    if (f.failed || m.failed) {
      throw Error(ErrorCode::kConvergenceFailure,
                  "LOCO record failed: " + (f.failed ? f.error : m.error));
    }
    out.push_back(m.mae - f.mae);
  }
  return out;
}

std::vector<double> loco_importance(const FeatureMatrix& data, const PipelineConfig& config,
                                    const std::string& unit, const eval::EvalResult& full) {
  const auto cols = unit_columns(data, unit);
  PipelineConfig c = config;
  c.selection = eval::SelectionMethod::kNone;
  const auto minus = eval::run_online_validation(data.without_columns(cols), c);
  return loco_deltas(full, minus);
}

std::vector<double> loco_importance(const FeatureMatrix& data, const PipelineConfig& config,
                                    const std::string& unit) {
  unit_columns(data, unit);
  PipelineConfig c = config;
  c.selection = eval::SelectionMethod::kNone;
  const auto full = eval::run_online_validation(data, c);
  return loco_importance(data, c, unit, full);
}

stats::EsdRanking rank_features(const std::map<std::string, std::vector<double>>& deltas) {
  if (deltas.size() < 2) throw Error(ErrorCode::kTooFewGroups, "ranking needs at least 2 units");
  double lo = 0;
  bool first = true;
  for (const auto& [_, v] : deltas) {
    for (double x : v) {
      lo = first ? x : std::min(lo, x);
      first = false;
    }
  }
  std::map<std::string, std::vector<double>> shifted;
  for (const auto& [name, v] : deltas) {
    auto& s = shifted[name];
    for (double x : v) s.push_back(x - lo);
  }
  return stats::scott_knott_esd(shifted, stats::Order::kDescending);
}

ImportanceResult loco_all(const FeatureMatrix& data, PipelineConfig config,
                          const std::vector<std::string>& units) {
  config.selection = eval::SelectionMethod::kNone;
  for (const auto& u : units) unit_columns(data, u);
  ImportanceResult r;
  r.units = units;
  r.full = eval::run_online_validation(data, config);
  for (const auto& u : units) r.deltas[u] = loco_importance(data, config, u, r.full);
  r.ranking = rank_features(r.deltas);
  r.fingerprint = std::string(ml::algorithm_name(config.grid.algorithm)) + "/" +
                  std::string(preprocess::normalizer_name(config.normalizer)) + "/repeats=" +
                  std::to_string(config.repeats) + "/seed=" + std::to_string(config.base_seed);
  return r;
}

void write_importance_csv(const std::filesystem::path& path, const ImportanceResult& r) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << "unit,n,delta_mean,delta_median,delta_min,delta_max,esd_rank\n";
  for (const auto& u : r.units) {
    auto v = r.deltas.at(u);
    std::sort(v.begin(), v.end());
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    const std::size_t m = v.size() / 2;
    const double median = v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
    out << csv_escape(u) << ',' << v.size() << ',' << format_double(mean) << ','
        << format_double(median) << ',' << format_double(v.front()) << ','
        << format_double(v.back()) << ',' << r.ranking.rank_of(u) << '\n';
  }
}

void write_ranking_csv(const std::filesystem::path& path, const stats::EsdRanking& ranking) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << "rank,group,n,mean_transformed,median,skewness\n";
  for (std::size_t c = 0; c < ranking.clusters.size(); ++c) {
    for (const auto& g : ranking.clusters[c]) {
      const auto& s = ranking.groups.at(g);
      out << c + 1 << ',' << csv_escape(g) << ',' << s.n << ',' << format_double(s.mean_transformed)
          << ',' << format_double(s.median) << ',' << format_double(s.skewness) << '\n';
    }
  }
}

stats::ComparisonResult compare_results(const eval::EvalResult& a, const eval::EvalResult& b,
                                        double eval::EvalRecord::*metric) {
  std::map<std::pair<int, int>, double> lookup;
  for (const auto& r : b.records) {
    if (!r.failed) lookup[{r.repeat, r.iteration}] = r.*metric;
  }
  std::vector<double> xa, xb;
  for (const auto& r : a.records) {
    if (r.failed) continue;
    auto it = lookup.find({r.repeat, r.iteration});
    if (it == lookup.end()) continue;
    xa.push_back(r.*metric);
    xb.push_back(it->second);
  }
  if (xa.empty()) throw Error(ErrorCode::kEmptyInput, "no paired records to compare");
  return stats::compare_paired(a.config_name, xa, b.config_name, xb);
}

namespace {

AblationResult ablate(const FeatureMatrix& data, const PipelineConfig& config,
                      const std::vector<features::Dimension>& dims) {
  AblationResult out;
  out.modes.push_back(kAllMode);
  PipelineConfig all = config;
  all.name = kAllMode;
  out.results[kAllMode] = eval::run_online_validation(data, all);
  for (auto d : dims) {
    const std::string mode(features::dimension_name(d));
    const auto cols = unit_columns(data, mode);
    PipelineConfig c = config;
    c.name = mode;
    out.modes.push_back(mode);
    out.results[mode] = eval::run_online_validation(data.select_columns(cols), c);
    out.comparisons.push_back(
        compare_results(out.results[kAllMode], out.results[mode], &eval::EvalRecord::mae));
  }
  stats::adjust(out.comparisons, features::kAllDimensions.size());
  return out;
}

}  // namespace

AblationResult dimension_ablation(const FeatureMatrix& data, const PipelineConfig& config) {
  return ablate(data, config,
                std::vector<features::Dimension>(features::kAllDimensions.begin(),
                                                 features::kAllDimensions.end()));
}

AblationResult dimension_ablation(const FeatureMatrix& data, const PipelineConfig& config,
                                  features::Dimension only) {
  return ablate(data, config, {only});
}

void write_comparisons_csv(const std::filesystem::path& path,
                           const std::vector<stats::ComparisonResult>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << "first,second,w,p_value,p_adjusted,significant,cliffs_d,magnitude\n";
  for (const auto& r : rows) {
    out << csv_escape(r.first) << ',' << csv_escape(r.second) << ',' << format_double(r.w) << ','
        << format_double(r.p_value) << ',' << format_double(r.p_adjusted) << ','
        << (r.significant ? 1 : 0) << ',' << format_double(r.cliffs_d) << ','
        << stats::magnitude_label(r.magnitude) << '\n';
  }
}

}  // namespace revtime::importance
