#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "monitoring.hpp"
#include "timing.hpp"

namespace gsd {

// Stateless counter-based stream: every draw is a pure function of
// (seed, stream, counter), so trials can run in any order on any number of
// workers and still reproduce bit-exactly.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  double uniform(std::uint64_t counter) const;      // in (0, 1)
  double normal(std::uint64_t counter) const;
  double exponential(std::uint64_t counter, double rate) const;

 private:
  std::uint64_t key_;
};

struct SimConfig {
  TrialModel model;
  DesignSpec spec;
  BoundaryTable table;
  double hr_true = 1.0;
  long n_trials = 1;
  std::uint64_t seed = 0;
  bool honor_futility = true;
  double overrun_fraction = 0.0;  // uniform +- perturbation of event triggers
  int threads = 0;                // 0 = hardware concurrency
  double ssd_lag_weeks = 6.0;

  void validate() const;
};

struct ConductedLook {
  std::string label;
  int events = 0;
  double z = 0.0;
  double hr = 0.0;
  double month = 0.0;  // CCOD, months from first patient in
  std::optional<RecalculatedBounds> recalculated;
  Decision decision = Decision::Continue;
};

struct SimOutcome {
  std::string stop_label;
  Decision decision = Decision::Continue;
  bool rejected = false;
  int events = 0;             // at the deciding analysis
  double duration_months = 0.0;
  std::vector<ConductedLook> looks;
};

struct OperatingCharacteristics {
  double rejection = 0.0;
  double rejection_se = 0.0;
  std::map<std::string, double> futility_stop_prob;
  double expected_events = 0.0;
  double expected_duration = 0.0;
  long n_trials = 0;
};

SimOutcome simulate_trial(const SimConfig& config, long trial_index);

OperatingCharacteristics operating_characteristics(const SimConfig& config);

// All trial outcomes, in trial order (drives the per-trial CSV export).
std::vector<SimOutcome> simulate_all(const SimConfig& config);

OperatingCharacteristics aggregate(const std::vector<SimOutcome>& outcomes);

// Rebuilds a monitoring-engine course (with reporting-stage designations) from
// a simulated outcome. Dates are derived from first_patient_in when given.
TrialCourse replay_report(const SimConfig& config, const SimOutcome& outcome,
                          const std::optional<std::string>& first_patient_in = {});

}  // namespace gsd
