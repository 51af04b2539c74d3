#include "palletmap/tuner.hpp"

#include <algorithm>
#include <cmath>

#include "palletmap/error.hpp"

namespace palletmap {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double to_internal(double v, const ParamRange& r) {
  return r.scale == ParamScale::kLog ? std::log(v) : v;
}

double from_internal(double v, const ParamRange& r) {
  return r.scale == ParamScale::kLog ? std::exp(v) : v;
}

double internal_lower(const ParamRange& r) { return to_internal(r.lower, r); }
double internal_upper(const ParamRange& r) { return to_internal(r.upper, r); }

double uniform_in_range(const ParamRange& r, SplitMix64& rng) {
  const double v = rng.uniform(internal_lower(r), internal_upper(r));
  return std::clamp(from_internal(v, r), r.lower, r.upper);
}

// Scott's rule with a floor of 1e-3 of the (internal) range.
double kde_bandwidth(const std::vector<double>& xs, const ParamRange& r) {
  const double range = internal_upper(r) - internal_lower(r);
  const double floor_bw = 1e-3 * range;
  if (xs.size() < 2) return std::max(range / 4.0, floor_bw);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
  const double sigma = std::sqrt(var);
  const double bw =
      1.06 * sigma * std::pow(static_cast<double>(xs.size()), -0.2);
  return std::max(bw, floor_bw);
}

double kde_density(double x, const std::vector<double>& centers, double bw) {
  if (centers.empty()) return 0.0;
  double acc = 0.0;
  const double norm = 1.0 / (bw * std::sqrt(2.0 * kPi));
  for (double c : centers) {
    const double z = (x - c) / bw;
    acc += norm * std::exp(-0.5 * z * z);
  }
  return acc / static_cast<double>(centers.size());
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

}  // namespace

void ParamSpace::validate() const {
  if (params.empty()) throw ConfigError("parameter space is empty");
  for (const auto& p : params) {
    if (!(p.lower < p.upper)) {
      throw ConfigError("parameter '" + p.name + "': lower must be < upper");
    }
    if (p.scale == ParamScale::kLog && p.lower <= 0.0) {
      throw ConfigError("parameter '" + p.name +
                        "': log scale requires lower > 0");
    }
  }
}

void StudyConfig::validate() const {
  if (n_trials <= 0) throw ConfigError("n_trials must be positive");
  if (n_startup_trials > n_trials) {
    throw ConfigError("n_startup_trials must not exceed n_trials");
  }
  if (gamma <= 0.0 || gamma >= 1.0) throw ConfigError("gamma must lie in (0,1)");
  if (n_candidates <= 0) throw ConfigError("n_candidates must be positive");
}

std::optional<double> TrialRecord::value_at_step(int step) const {
  for (const auto& [s, v] : intermediates) {
    if (s == step) return v;
  }
  return std::nullopt;
}

ParamAssignment sample(const ParamSpace& space,
                       const std::vector<TrialRecord>& history,
                       const StudyConfig& cfg, SplitMix64& rng) {
  space.validate();
  cfg.validate();

  std::vector<const TrialRecord*> completed;
  for (const auto& t : history) {
    if (t.state == TrialState::kComplete && t.final_value) {
      completed.push_back(&t);
    }
  }

  ParamAssignment out;
  if (static_cast<int>(history.size()) < cfg.n_startup_trials ||
      completed.size() < 2) {
    for (const auto& p : space.params) out[p.name] = uniform_in_range(p, rng);
    return out;
  }

  std::sort(completed.begin(), completed.end(),
            [](const TrialRecord* a, const TrialRecord* b) {
              if (*a->final_value != *b->final_value) {
                return *a->final_value > *b->final_value;
              }
              return a->id < b->id;
            });
  const auto n_good = static_cast<std::size_t>(std::ceil(
      cfg.gamma * static_cast<double>(completed.size())));

  for (const auto& p : space.params) {
    std::vector<double> good, bad;
    for (std::size_t i = 0; i < completed.size(); ++i) {
      const auto it = completed[i]->params.find(p.name);
      if (it == completed[i]->params.end()) continue;
      (i < n_good ? good : bad).push_back(to_internal(it->second, p));
    }
    if (good.empty() || bad.empty()) {
      out[p.name] = uniform_in_range(p, rng);
      continue;
    }
    const double bw_good = kde_bandwidth(good, p);
    const double bw_bad = kde_bandwidth(bad, p);

    double best_x = 0.0;
    double best_ratio = -1.0;
    for (int c = 0; c < cfg.n_candidates; ++c) {
      const std::size_t pick = rng.next_below(good.size());
      double x = good[pick] + bw_good * rng.next_normal();
      x = std::clamp(x, internal_lower(p), internal_upper(p));
      const double dg = kde_density(x, good, bw_good);
      const double db = kde_density(x, bad, bw_bad);
      const double ratio = dg / (db + 1e-12);
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best_x = x;
      }
    }
    out[p.name] = std::clamp(from_internal(best_x, p), p.lower, p.upper);
  }
  return out;
}

bool should_prune(const TrialRecord& trial,
                  const std::vector<TrialRecord>& peers, int step,
                  const StudyConfig& cfg) {
  if (step < cfg.pruner_warmup_steps) return false;
  const auto own = trial.value_at_step(step);
  if (!own) throw ConfigError("trial has no intermediate value at this step");
  std::vector<double> peer_values;
  for (const auto& peer : peers) {
    if (peer.id == trial.id) continue;
    if (const auto v = peer.value_at_step(step)) peer_values.push_back(*v);
  }
  if (peer_values.empty()) return false;
  return *own < median(std::move(peer_values));
}

namespace {

class StudyReporter : public TrialReporter {
 public:
  StudyReporter(TrialRecord& trial, const std::vector<TrialRecord>& history,
                const StudyConfig& cfg)
      : trial_(trial), history_(history), cfg_(cfg) {}

  bool report(int step, double value) override {
    if (!trial_.intermediates.empty() &&
        trial_.intermediates.back().first >= step) {
      throw ConfigError("intermediate steps must be strictly increasing");
    }
    trial_.intermediates.emplace_back(step, value);
    if (should_prune(trial_, history_, step, cfg_)) {
      pruned_ = true;
      return true;
    }
    return false;
  }

  bool pruned() const { return pruned_; }

 private:
  TrialRecord& trial_;
  const std::vector<TrialRecord>& history_;
  const StudyConfig& cfg_;
  bool pruned_ = false;
};

}  // namespace

StudyResult run_study(const ParamSpace& space, const StudyConfig& cfg,
                      const ObjectiveFn& objective) {
  space.validate();
  cfg.validate();
  SplitMix64 rng(cfg.seed);

  StudyResult result;
  for (int i = 0; i < cfg.n_trials; ++i) {
    TrialRecord trial;
    trial.id = i;
    trial.params = sample(space, result.history, cfg, rng);
    StudyReporter reporter(trial, result.history, cfg);
    try {
      const double value = objective(trial.params, reporter);
      if (reporter.pruned()) {
        trial.state = TrialState::kPruned;
      } else {
        trial.state = TrialState::kComplete;
        trial.final_value = value;
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      trial.state = TrialState::kFailed;
    }
    result.history.push_back(std::move(trial));
  }

  const TrialRecord* best = nullptr;
  for (const auto& t : result.history) {
    if (t.state != TrialState::kComplete) continue;
    if (!best || *t.final_value > *best->final_value) best = &t;
  }
  if (!best) throw ConfigError("study finished with zero completed trials");
  result.best = *best;
  return result;
}

}  // namespace palletmap
