#include "inference.hpp"

#include <cmath>
#include <stdexcept>

namespace gsd {

void StoppedTrialDatum::validate() const {
  if (info.empty() || stop_stage >= info.size()) {
    throw std::invalid_argument("StoppedTrialDatum: stop stage out of range");
  }
  if (bounds.size() < stop_stage) {
    throw std::invalid_argument(
        "StoppedTrialDatum: a frozen bound is required for every look before the stop");
  }
  double prev = 0.0;
  for (std::size_t k = 0; k <= stop_stage; ++k) {
    if (!(info[k] > prev)) {
      throw std::invalid_argument(
          "StoppedTrialDatum: information levels must be strictly increasing");
    }
    prev = info[k];
  }
}

HrCi naive_hr_ci(double observed_hr, int events, double level,
                 double allocation_ratio) {
  if (!(observed_hr > 0.0)) throw std::domain_error("naive_hr_ci: hr must be positive");
  if (events < 1) throw std::domain_error("naive_hr_ci: events must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw std::domain_error("naive_hr_ci: bad level");
  const double r = allocation_ratio;
  const double se = (1.0 + r) / std::sqrt(double(events) * r);
  const double z = norm_quantile(1.0 - level / 2.0);
  const double lg = std::log(observed_hr);
  return {observed_hr, std::exp(lg - z * se), std::exp(lg + z * se)};
}

double stagewise_p(const StoppedTrialDatum& datum, double theta) {
  datum.validate();
  const std::size_t s = datum.stop_stage;
  if (s == 0) {
    return norm_sf(datum.z_obs - DriftParameter{theta}.stage_mean(datum.info[0]));
  }
  ContinuationRegion region;
  for (std::size_t k = 0; k < s; ++k) {
    region.info.push_back(datum.info[k]);
    region.lower.push_back(kNegInf);
    region.upper.push_back(datum.bounds[k]);
  }
  region.info.push_back(datum.info[s]);
  region.lower.push_back(kNegInf);
  region.upper.push_back(datum.z_obs);
  return exit_probabilities(region, DriftParameter{theta}).total_upper();
}

namespace {

double solve_theta(const StoppedTrialDatum& datum, double p_target) {
  double lo = -2.0, hi = 2.0;
  auto f = [&](double th) { return stagewise_p(datum, th) - p_target; };
  for (int i = 0; i < 12 && f(lo) > 0.0; ++i) lo *= 2.0;
  for (int i = 0; i < 12 && f(hi) < 0.0; ++i) hi *= 2.0;
  if (f(lo) > 0.0 || f(hi) < 0.0) {
    throw std::runtime_error("inference: failed to bracket the drift parameter");
  }
  return find_root(f, lo, hi, 1e-10);
}

}  // namespace

double median_unbiased_hr(const StoppedTrialDatum& datum) {
  return std::exp(-solve_theta(datum, 0.5));
}

std::pair<double, double> adjusted_ci(const StoppedTrialDatum& datum, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::domain_error("adjusted_ci: bad level");
  const double theta_hi = solve_theta(datum, 1.0 - level / 2.0);
  const double theta_lo = solve_theta(datum, level / 2.0);
  return {std::exp(-theta_hi), std::exp(-theta_lo)};
}

}  // namespace gsd
