#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

namespace revtime::gerrit {

struct SyntheticCorpusOptions {
  int changes = 200;
  std::uint64_t seed = 1;
  int developers = 16;
  // Fractions of changes deliberately planted to exercise each filter rule.
  double short_fraction = 0.08;
  double long_fraction = 0.05;
  double reopened_fraction = 0.04;
  double self_reviewed_fraction = 0.05;
  double open_fraction = 0.02;
  double abandoned_fraction = 0.15;
};

// Generates Gerrit change detail documents (with "_fixture_diffs") whose
// completion time depends on owner speed, subsystem, churn and file count,
// so that a reasonable regressor can beat random guessing. Output is a pure
// function of the options.
std::vector<nlohmann::json> generate_synthetic_corpus(const SyntheticCorpusOptions& options);

}  // namespace revtime::gerrit
