#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "palletmap/rng.hpp"

namespace palletmap {

enum class ParamScale { kLinear, kLog };

struct ParamRange {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  ParamScale scale = ParamScale::kLinear;
};

struct ParamSpace {
  std::vector<ParamRange> params;
  void validate() const;
};

using ParamAssignment = std::map<std::string, double>;

enum class TrialState { kRunning, kComplete, kPruned, kFailed };

struct TrialRecord {
  int id = 0;
  ParamAssignment params;
  std::vector<std::pair<int, double>> intermediates;  // (step, value)
  std::optional<double> final_value;
  TrialState state = TrialState::kRunning;

  std::optional<double> value_at_step(int step) const;
};

struct StudyConfig {
  int n_trials = 20;
  int n_startup_trials = 5;
  double gamma = 0.25;
  int n_candidates = 24;
  int pruner_warmup_steps = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

// Univariate TPE: after the startup phase, completed trials split into a
// good quantile and the rest; candidates drawn from the good kernel
// density are scored by the good/bad density ratio.
ParamAssignment sample(const ParamSpace& space,
                       const std::vector<TrialRecord>& history,
                       const StudyConfig& cfg, SplitMix64& rng);

// Median rule: never before the warmup step; afterwards prune iff the
// trial's intermediate is strictly below the median of peer values
// recorded at the same step.
bool should_prune(const TrialRecord& trial,
                  const std::vector<TrialRecord>& peers, int step,
                  const StudyConfig& cfg);

// Reports intermediates; returns true when the trial should stop.
class TrialReporter {
 public:
  virtual ~TrialReporter() = default;
  virtual bool report(int step, double value) = 0;
};

using ObjectiveFn =
    std::function<double(const ParamAssignment&, TrialReporter&)>;

struct StudyResult {
  std::vector<TrialRecord> history;
  TrialRecord best;  // highest final value among completed trials
};

StudyResult run_study(const ParamSpace& space, const StudyConfig& cfg,
                      const ObjectiveFn& objective);

}  // namespace palletmap
