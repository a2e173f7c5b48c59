#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "numerics.hpp"

namespace gsd {

// Efficacy-look history of a trial stopped for efficacy: information levels
// and the frozen z-bounds of the efficacy looks, the stage the stop occurred
// at, and the observed statistic there.
struct StoppedTrialDatum {
  std::vector<double> info;    // observed events at each efficacy look
  std::vector<double> bounds;  // z-bounds actually used at looks before the stop
  std::size_t stop_stage = 0;  // zero-based index into info
  double z_obs = 0.0;
  double allocation_ratio = 1.0;

  void validate() const;
};

struct HrCi {
  double hr = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Unadjusted estimate: log-HR +- z_{1-level/2} * (1+r)/sqrt(d*r).
HrCi naive_hr_ci(double observed_hr, int events, double level,
                 double allocation_ratio = 1.0);

// Stagewise-ordering tail probability: P_theta(stop for efficacy at an earlier
// stage, or reach the observed stage with Z >= z_obs). Increasing in theta.
double stagewise_p(const StoppedTrialDatum& datum, double theta);

// Solves stagewise_p(theta) = 1/2; returns exp(-theta).
double median_unbiased_hr(const StoppedTrialDatum& datum);

// Solves stagewise_p = 1 - level/2 and level/2; returns (lower_hr, upper_hr).
std::pair<double, double> adjusted_ci(const StoppedTrialDatum& datum, double level);

}  // namespace gsd
