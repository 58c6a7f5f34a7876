#include "revtime/eval/evaluation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "revtime/core/csv.h"
#include "revtime/core/error.h"
#include "revtime/ml/models.h"

namespace revtime::eval {

Range FoldPlan::train(int iteration) const {
  return {0, folds.at(static_cast<std::size_t>(iteration + 3)).end};
}

Range FoldPlan::test(int iteration) const {
  return folds.at(static_cast<std::size_t>(iteration + 4));
}

FoldPlan make_online_folds(std::size_t n) {
  if (n < kFoldCount) {
    throw Error(ErrorCode::kTooFewRecords,
                "online validation needs at least 10 records, got " + std::to_string(n));
  }
  FoldPlan plan;
  const std::size_t base = n / kFoldCount, extra = n % kFoldCount;
  std::size_t begin = 0;
  for (std::size_t f = 0; f < kFoldCount; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    plan.folds.push_back({begin, begin + size});
    begin += size;
  }
  return plan;
}

namespace {

void check_pair(std::span<const double> pred, std::span<const double> actual) {
  if (pred.size() != actual.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(pred.size()) + " predictions vs " +
                                                std::to_string(actual.size()) + " actuals");
  }
  if (pred.empty()) throw Error(ErrorCode::kEmptyInput, "no predictions");
}

}  // namespace

double mae(std::span<const double> pred, std::span<const double> actual) {
  check_pair(pred, actual);
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - actual[i]);
  return s / static_cast<double>(pred.size());
}

double mre(std::span<const double> pred, std::span<const double> actual) {
  check_pair(pred, actual);
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(actual[i] > 0)) {
      throw Error(ErrorCode::kNonPositiveActual, "actual value at " + std::to_string(i) +
                                                     " is not positive");
    }
    s += std::abs(pred[i] - actual[i]) / actual[i];
  }
  return s / static_cast<double>(pred.size());
}

double random_guess_mae(std::span<const double> actual, std::span<const double> train_targets,
                        std::uint64_t seed, int trials) {
  if (train_targets.empty()) throw Error(ErrorCode::kEmptyInput, "no training targets to guess from");
  if (actual.empty()) throw Error(ErrorCode::kEmptyInput, "no actual values");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, train_targets.size() - 1);
  std::vector<double> guess(actual.size());
  double mean = 0;
  for (int t = 0; t < trials; ++t) {
    for (auto& g : guess) g = train_targets[pick(rng)];
    // Incremental mean keeps identical trial values exact.
    mean += (mae(guess, actual) - mean) / static_cast<double>(t + 1);
  }
  return mean;
}

double sa(std::span<const double> pred, std::span<const double> actual,
          std::span<const double> train_targets, std::uint64_t seed, int trials) {
  const double model = mae(pred, actual);
  const double guess = random_guess_mae(actual, train_targets, seed, trials);
  if (guess == 0) return model == 0 ? 100.0 : 0.0;
  return (1.0 - model / guess) * 100.0;
}

std::string_view selection_name(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::kNone: return "none";
    case SelectionMethod::kRfe: return "rfe";
    case SelectionMethod::kSequential: return "sequential";
  }
  return "?";
}

std::optional<SelectionMethod> parse_selection(std::string_view name) {
  for (auto m : {SelectionMethod::kNone, SelectionMethod::kRfe, SelectionMethod::kSequential}) {
    if (selection_name(m) == name) return m;
  }
  return std::nullopt;
}

void PipelineConfig::validate() const {
  if (repeats < 1) throw Error(ErrorCode::kInvalidArgument, "repeats must be >= 1");
  if (jobs < 1) throw Error(ErrorCode::kInvalidArgument, "jobs must be >= 1");
  grid.validate();
  const auto a = grid.algorithm;
  if ((a == ml::Algorithm::kNN || a == ml::Algorithm::kSVM) &&
      normalizer == preprocess::NormalizerKind::kNone) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(ml::algorithm_name(a)) + " requires a normalizer (minmax or zscore)");
  }
  if (selection == SelectionMethod::kRfe && !ml::has_importance(a)) {
    throw Error(ErrorCode::kUnsupportedEstimator,
                std::string(ml::algorithm_name(a)) + " cannot drive RFE; use sequential");
  }
}

bool PipelineConfig::deterministic() const { return ml::is_deterministic(grid.algorithm); }

std::uint64_t repeat_seed(const PipelineConfig& c, int repeat) {
  return c.base_seed + static_cast<std::uint64_t>(repeat);
}

std::uint64_t guess_seed(std::uint64_t seed, int iteration) {
  return ml::mix_seed(seed, 0x5A00u + static_cast<std::uint64_t>(iteration));
}

IterationOutcome evaluate_iteration(const FeatureMatrix& data, const PipelineConfig& config,
                                    const FoldPlan& plan, int repeat, int iteration) {
  IterationOutcome out;
  auto& rec = out.record;
  rec.repeat = repeat;
  rec.iteration = iteration;
  rec.train = plan.train(iteration);
  rec.test = plan.test(iteration);
  const auto seed = repeat_seed(config, repeat);
  try {
    const Matrix x_train_raw = data.values.row_range(rec.train.begin, rec.train.end);
    const Matrix x_test_raw = data.values.row_range(rec.test.begin, rec.test.end);
    const std::span<const double> y_train(data.targets.data() + rec.train.begin, rec.train.size());
    const std::span<const double> y_test(data.targets.data() + rec.test.begin, rec.test.size());

    const auto norm = preprocess::fit_normalizer(config.normalizer, x_train_raw);
    Matrix x_train = preprocess::apply_normalizer(norm, x_train_raw);
    Matrix x_test = preprocess::apply_normalizer(norm, x_test_raw);
    std::vector<std::string> names = data.feature_names;

    if (config.selection != SelectionMethod::kNone) {
      FeatureMatrix train_fm;
      train_fm.feature_names = data.feature_names;
      train_fm.values = x_train;
      train_fm.targets.assign(y_train.begin(), y_train.end());
      const ml::RegressorSpec estimator(config.grid.algorithm, config.grid.points().front(), seed);
      const std::size_t p = x_train.cols();
      const auto sel =
          config.selection == SelectionMethod::kRfe
              ? preprocess::rfe_select(estimator, train_fm,
                                       config.selection_limit == 0 ? 1 : config.selection_limit)
              : preprocess::sequential_forward_select(
                    estimator, train_fm, config.selection_limit == 0 ? p : config.selection_limit);
      x_train = x_train.select_columns(sel.columns);
      x_test = x_test.select_columns(sel.columns);
      names = sel.selected;
    }
    rec.n_features = names.size();

    const auto spec = ml::grid_search(config.grid, x_train, y_train, seed);
    rec.chosen = spec.describe();
    const auto model = ml::fit(spec, x_train, y_train, names);
    out.predictions = model.predict(x_test, names);
    rec.mae = mae(out.predictions, y_test);
    rec.mre = mre(out.predictions, y_test);
    rec.sa = sa(out.predictions, y_test, y_train, guess_seed(seed, iteration));
  } catch (const Error& e) {
    rec.failed = true;
    rec.error = e.what();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.mae = rec.mre = rec.sa = nan;
  }
  return out;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

EvalResult run_online_validation(const FeatureMatrix& data, const PipelineConfig& config) {
  config.validate();
  data.check_sorted();
  const auto plan = make_online_folds(data.rows());
  const int distinct_repeats = config.deterministic() ? 1 : config.repeats;
  const std::size_t tasks = static_cast<std::size_t>(distinct_repeats) * kIterations;
  std::vector<EvalRecord> computed(tasks);
  parallel_for(tasks, config.jobs, [&](std::size_t t) {
    const int r = static_cast<int>(t / kIterations);
    const int i = static_cast<int>(t % kIterations) + 1;
    computed[t] = evaluate_iteration(data, config, plan, r, i).record;
  });

  EvalResult result;
  result.config_name = config.name;
  for (int r = 0; r < config.repeats; ++r) {
    for (int i = 1; i <= kIterations; ++i) {
      const auto src = static_cast<std::size_t>((r % distinct_repeats) * kIterations + i - 1);
      EvalRecord rec = computed[src];
      rec.repeat = r;
      result.any_failed = result.any_failed || rec.failed;
      result.records.push_back(std::move(rec));
    }
  }
  return result;
}

std::vector<double> EvalResult::metric_values(double EvalRecord::*metric) const {
  std::vector<double> out;
  for (const auto& r : records) {
    if (!r.failed) out.push_back(r.*metric);
  }
  return out;
}

MetricSummary EvalResult::summary(double EvalRecord::*metric) const {
  auto v = metric_values(metric);
  if (v.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  const double median = v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
  return {mean, median};
}

namespace {

constexpr const char* kEvalHeader =
    "repeat,iteration,train_begin,train_end,test_begin,test_end,n_train,n_test,n_features,mae,"
    "mre,sa,failed,chosen,error";

}  // namespace

void write_eval_csv(const std::filesystem::path& path, const EvalResult& result) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << kEvalHeader << '\n';
  for (const auto& r : result.records) {
    out << r.repeat << ',' << r.iteration << ',' << r.train.begin << ',' << r.train.end << ','
        << r.test.begin << ',' << r.test.end << ',' << r.n_train() << ',' << r.n_test() << ','
        << r.n_features << ',' << format_double(r.mae) << ',' << format_double(r.mre) << ','
        << format_double(r.sa) << ',' << (r.failed ? 1 : 0) << ',' << csv_escape(r.chosen) << ','
        << csv_escape(r.error) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

EvalResult read_eval_csv(const std::filesystem::path& path, const std::string& name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kEvalHeader) {
    throw Error(ErrorCode::kSchemaError, path.string() + ": unexpected header");
  }
  EvalResult result;
  result.config_name = name;
  std::size_t line_no = 1;
  auto parse_nan = [](const std::string& s, std::size_t ln) {
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    return parse_double(s, ln);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 15) {
      throw Error(ErrorCode::kSchemaError, path.string() + " line " + std::to_string(line_no) +
                                               ": expected 15 cells");
    }
    auto as_size = [&](const std::string& s) {
      return static_cast<std::size_t>(parse_double(s, line_no));
    };
    EvalRecord r;
    r.repeat = static_cast<int>(parse_double(c[0], line_no));
    r.iteration = static_cast<int>(parse_double(c[1], line_no));
    r.train = {as_size(c[2]), as_size(c[3])};
    r.test = {as_size(c[4]), as_size(c[5])};
    r.n_features = as_size(c[8]);
    r.mae = parse_nan(c[9], line_no);
    r.mre = parse_nan(c[10], line_no);
    r.sa = parse_nan(c[11], line_no);
    r.failed = c[12] == "1";
    r.chosen = c[13];
    r.error = c[14];
    result.any_failed = result.any_failed || r.failed;
    result.records.push_back(std::move(r));
  }
  return result;
}

nlohmann::json eval_summary_json(const EvalResult& result, const PipelineConfig& config) {
  auto metric = [&](double EvalRecord::*m) {
    const auto s = result.summary(m);
    return nlohmann::json{{"mean", s.mean}, {"median", s.median}};
  };
  nlohmann::json grid = nlohmann::json::object();
  for (const auto& [k, v] : config.grid.values) grid[k] = v;
  std::size_t failures = 0;
  for (const auto& r : result.records) failures += r.failed ? 1 : 0;
  return {{"name", result.config_name},
          {"algorithm", ml::algorithm_name(config.grid.algorithm)},
          {"grid", grid},
          {"normalizer", preprocess::normalizer_name(config.normalizer)},
          {"selection", selection_name(config.selection)},
          {"repeats", config.repeats},
          {"base_seed", config.base_seed},
          {"records", result.records.size()},
          {"failures", failures},
          {"mae", metric(&EvalRecord::mae)},
          {"mre", metric(&EvalRecord::mre)},
          {"sa", metric(&EvalRecord::sa)}};
}

}  // namespace revtime::eval
