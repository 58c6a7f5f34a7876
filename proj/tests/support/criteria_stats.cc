#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "revtime/core/csv.h"
#include "revtime/stats/stats.h"
#include "support/criteria.h"

namespace criteria {

namespace {

// Differences 1..n with negative signs on a rank set summing to w.
std::vector<double> signed_ranks_with_w(int n, int w) {
  std::vector<double> d(static_cast<std::size_t>(n));
  int left = w;
  for (int r = n; r >= 1; --r) {
    d[static_cast<std::size_t>(r - 1)] = r;
    if (r <= left) {
      d[static_cast<std::size_t>(r - 1)] = -r;
      left -= r;
    }
  }
  return d;
}

double p_for(int n, int w) {
  if (w < 0) return 0.0;
  const auto d = signed_ranks_with_w(n, w);
  const std::vector<double> zero(d.size(), 0.0);
  return revtime::stats::wilcoxon_signed_rank(d, zero).p_value;
}

}  // namespace

Outcome statistical_goldens() {
  namespace st = revtime::stats;
  std::ostringstream out;
  bool ok = true;

  // Wilcoxon critical-value table.
  std::ifstream in(std::string(REVTIME_TEST_DATA_DIR) + "/wilcoxon_critical.csv");
  std::string line;
  std::getline(in, line);
  int rows = 0, bad_rows = 0;
  while (std::getline(in, line)) {
    const auto cells = revtime::split_csv_line(line);
    const double alpha = std::stod(cells[0]);
    const int n = std::stoi(cells[1]);
    const int c = std::stoi(cells[2]);
    const double p_at = std::stod(cells[3]);
    const double p_above = std::stod(cells[4]);
    ++rows;
    const double got_at = p_for(n, c);
    const double got_above = p_for(n, c + 1);
    const bool row_ok = std::abs(got_at - p_at) < 1e-12 && std::abs(got_above - p_above) < 1e-12 &&
                        got_at <= alpha && got_above > alpha;
    if (!row_ok) {
      if (bad_rows == 0) out << "first wilcoxon miss n=" << n << " alpha=" << alpha << "; ";
      ++bad_rows;
    }
  }
  if (rows == 0 || bad_rows > 0) ok = false;
  out << "wilcoxon " << rows - bad_rows << "/" << rows << " table rows";

  // Cliff's delta against pair counting.
  std::mt19937_64 rng(20240601);
  int cliff_bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::uniform_int_distribution<int> size(1, 50);
    std::uniform_int_distribution<int> value(0, 20);
    std::vector<double> a(static_cast<std::size_t>(size(rng))), b(static_cast<std::size_t>(size(rng)));
    for (auto& x : a) x = value(rng);
    for (auto& x : b) x = value(rng);
    long gt = 0, lt = 0;
    for (double x : a) {
      for (double y : b) {
        gt += x > y;
        lt += x < y;
      }
    }
    const double want = static_cast<double>(gt - lt) / static_cast<double>(a.size() * b.size());
    if (st::cliffs_delta(a, b).d != want) ++cliff_bad;
  }
  if (cliff_bad) ok = false;
  out << "; cliff " << 500 - cliff_bad << "/500";

  // Scott-Knott ESD on identical and widely separated groups. Group size
  // matches a LOCO distribution at the default 30 repeats x 5 iterations.
  constexpr int kGroupSize = 150;
  int single = 0, separated = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 g(1000 + static_cast<std::uint64_t>(trial));
    std::normal_distribution<double> noise(10.0, 2.0);
    std::map<std::string, std::vector<double>> same;
    for (const char* name : {"a", "b"}) {
      for (int i = 0; i < kGroupSize; ++i) same[name].push_back(noise(g));
    }
    if (st::scott_knott_esd(same).clusters.size() == 1) ++single;

    std::normal_distribution<double> tiny(0.0, 0.01);
    std::map<std::string, std::vector<double>> apart;
    for (int i = 0; i < kGroupSize; ++i) {
      apart["low"].push_back(1.0 + tiny(g));
      apart["high"].push_back(100.0 + tiny(g));
    }
    const auto r = st::scott_knott_esd(apart);
    if (r.clusters.size() == 2 && r.clusters[0] == std::vector<std::string>{"high"}) ++separated;
  }
  if (single < 95 || separated < 100) ok = false;
  out << "; esd single-cluster " << single << "/100, separated " << separated << "/100";
  return {ok, out.str()};
}

}  // namespace criteria
