#include "design.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gsd {

void DesignSpec::validate() const {
  if (!(alpha_one_sided > 0.0 && alpha_one_sided < 0.5)) {
    throw std::invalid_argument("DesignSpec: alpha_one_sided must lie in (0, 0.5)");
  }
  if (!(power_target > 0.0 && power_target < 1.0)) {
    throw std::invalid_argument("DesignSpec: power must lie in (0, 1)");
  }
  if (power_target <= alpha_one_sided) {
    throw std::invalid_argument("DesignSpec: power must exceed alpha");
  }
  if (!(hr_alternative > 0.0 && hr_alternative < 1.0)) {
    throw std::invalid_argument(
        "DesignSpec: hr_alternative must lie in (0, 1) for a superiority design");
  }
  if (!(allocation_ratio > 0.0)) {
    throw std::invalid_argument("DesignSpec: allocation_ratio must be positive");
  }
  if (analyses.empty()) {
    throw std::invalid_argument("DesignSpec: at least one analysis required");
  }
  double prev = 0.0;
  bool any_efficacy = false;
  for (const auto& a : analyses) {
    if (!(a.information_fraction > prev && a.information_fraction <= 1.0)) {
      throw std::invalid_argument(
          "DesignSpec: information fractions must be strictly increasing in (0, 1]");
    }
    prev = a.information_fraction;
    any_efficacy = any_efficacy || a.efficacy;
    if (a.futility_hr && *a.futility_hr < hr_alternative) {
      throw std::invalid_argument(
          "DesignSpec: futility HR threshold below the alternative is rejected");
    }
  }
  if (analyses.back().information_fraction != 1.0) {
    throw std::invalid_argument("DesignSpec: last information fraction must be 1");
  }
  if (!any_efficacy) {
    throw std::invalid_argument("DesignSpec: at least one efficacy analysis required");
  }
  if (!analyses.back().efficacy) {
    throw std::invalid_argument("DesignSpec: the last analysis must test efficacy");
  }
}

double spend(double t, double alpha) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw std::domain_error("spend: information fraction must lie in (0, 1]");
  }
  if (t == 1.0) return alpha;
  const double z = norm_quantile(1.0 - alpha / 2.0);
  return 2.0 * norm_sf(z / std::sqrt(t));
}

double hr_to_z(double hr, double events, double allocation_ratio) {
  if (!(hr > 0.0)) throw std::domain_error("hr_to_z: hr must be positive");
  if (!(events >= 1.0)) throw std::domain_error("hr_to_z: events must be >= 1");
  if (!(allocation_ratio > 0.0)) {
    throw std::domain_error("hr_to_z: allocation ratio must be positive");
  }
  const double r = allocation_ratio;
  return -std::log(hr) * std::sqrt(events * r) / (1.0 + r);
}

double z_to_hr(double z, double events, double allocation_ratio) {
  if (!(events >= 1.0)) throw std::domain_error("z_to_hr: events must be >= 1");
  if (!(allocation_ratio > 0.0)) {
    throw std::domain_error("z_to_hr: allocation ratio must be positive");
  }
  const double r = allocation_ratio;
  return std::exp(-z * (1.0 + r) / std::sqrt(events * r));
}

int fixed_design_events(double alpha_one_sided, double power_target,
                        double hr_alternative, double allocation_ratio) {
  if (hr_alternative == 1.0) {
    throw std::invalid_argument("fixed_design_events: hr_alternative must differ from 1");
  }
  if (power_target <= alpha_one_sided) {
    throw std::invalid_argument("fixed_design_events: power must exceed alpha");
  }
  const double za = norm_quantile(1.0 - alpha_one_sided);
  const double zb = norm_quantile(power_target);
  const double r = allocation_ratio;
  const double lg = std::log(hr_alternative);
  const double d = (za + zb) * (za + zb) * (1.0 + r) * (1.0 + r) / (r * lg * lg);
  return static_cast<int>(std::ceil(d - 1e-9));
}

double minimal_detectable_difference(int events, double alpha_level_one_sided,
                                     double allocation_ratio) {
  if (events < 1) throw std::domain_error("minimal_detectable_difference: events >= 1");
  if (!(alpha_level_one_sided > 0.0 && alpha_level_one_sided < 0.5)) {
    throw std::domain_error("minimal_detectable_difference: level must lie in (0, 0.5)");
  }
  return z_to_hr(norm_quantile(1.0 - alpha_level_one_sided), events, allocation_ratio);
}

// The target is the smallest event count whose information fraction reaches t
// (e.g. thirds of 385 give 129/257/385).
int target_events_for_fraction(double t, int max_events) {
  return static_cast<int>(std::ceil(t * max_events - 1e-9));
}

namespace {

// Region over the efficacy analyses only (non-binding futility excluded).
struct EfficacyLooks {
  std::vector<double> info;    // target events
  std::vector<std::size_t> row_index;
};

EfficacyLooks efficacy_looks(const DesignSpec& spec, int max_events) {
  EfficacyLooks looks;
  for (std::size_t i = 0; i < spec.analyses.size(); ++i) {
    if (!spec.analyses[i].efficacy) continue;
    looks.info.push_back(
        target_events_for_fraction(spec.analyses[i].information_fraction, max_events));
    looks.row_index.push_back(i);
  }
  return looks;
}

}  // namespace

BoundaryTable compute_boundaries(const DesignSpec& spec, int max_events) {
  spec.validate();
  if (max_events < 1) throw std::invalid_argument("compute_boundaries: max_events >= 1");

  BoundaryTable table;
  table.max_events = max_events;
  const auto looks = efficacy_looks(spec, max_events);
  const double alpha = spec.alpha_one_sided;

  ContinuationRegion region;  // grows one efficacy stage at a time
  std::vector<double> z_bounds;
  std::vector<double> cum_alpha;
  for (std::size_t k = 0; k < looks.info.size(); ++k) {
    const double t = looks.info[k] / static_cast<double>(max_events);
    const double target = spend(std::min(t, 1.0), alpha);
    region.info.push_back(looks.info[k]);
    region.lower.push_back(kNegInf);
    region.upper.push_back(0.0);  // overwritten by the solve
    double z;
    if (k == 0) {
      if (target <= 0.0) {
        throw std::invalid_argument(
            "compute_boundaries: spending at the first efficacy look is below "
            "achievable resolution");
      }
      z = norm_quantile(1.0 - target);
    } else {
      auto total_exit = [&](double zk) {
        region.upper[k] = zk;
        return exit_probabilities(region, DriftParameter{0.0}).total_upper() - target;
      };
      z = find_root(total_exit, 0.0, 10.0, 1e-10);
    }
    region.upper[k] = z;
    z_bounds.push_back(z);
    cum_alpha.push_back(target);
  }

  std::size_t eff_idx = 0;
  double spent = 0.0;
  for (std::size_t i = 0; i < spec.analyses.size(); ++i) {
    const auto& plan = spec.analyses[i];
    BoundaryRow row;
    row.label = plan.label;
    row.information_fraction = plan.information_fraction;
    row.target_events = target_events_for_fraction(plan.information_fraction, max_events);
    if (plan.efficacy) {
      const double z = z_bounds[eff_idx];
      row.efficacy_z = z;
      row.efficacy_hr = z_to_hr(z, row.target_events, spec.allocation_ratio);
      row.nominal_level_one_sided = 1.0 - norm_cdf(z);
      spent = cum_alpha[eff_idx];
      ++eff_idx;
    }
    row.cumulative_alpha = spent;
    if (plan.futility_hr) {
      row.futility_hr = plan.futility_hr;
      row.futility_z = hr_to_z(*plan.futility_hr, row.target_events, spec.allocation_ratio);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

double power(const DesignSpec& spec, int max_events, double hr_true,
             bool honor_futility) {
  spec.validate();
  if (!(hr_true > 0.0)) throw std::invalid_argument("power: hr_true must be positive");
  const BoundaryTable table = compute_boundaries(spec, max_events);

  ContinuationRegion region;
  std::vector<bool> is_efficacy;
  for (const auto& row : table.rows) {
    const bool fut = honor_futility && row.futility_z.has_value();
    const bool eff = row.efficacy_z.has_value();
    if (!fut && !eff) continue;  // pure pass-through stage
    region.info.push_back(row.target_events);
    region.lower.push_back(fut ? *row.futility_z : kNegInf);
    region.upper.push_back(eff ? *row.efficacy_z : kPosInf);
    is_efficacy.push_back(eff);
  }
  const DriftParameter drift{-std::log(hr_true)};
  const auto probs = exit_probabilities(region, drift);
  double p = 0.0;
  for (std::size_t k = 0; k < is_efficacy.size(); ++k) {
    if (is_efficacy[k]) p += probs.upper[k];
  }
  return p;
}

int required_max_events(const DesignSpec& spec) {
  spec.validate();
  int d = fixed_design_events(spec.alpha_one_sided, spec.power_target,
                              spec.hr_alternative, spec.allocation_ratio);
  // Power is monotone in the event count; interims only ever cost events.
  for (int iter = 0; iter < 10000; ++iter, ++d) {
    if (power(spec, d, spec.hr_alternative, false) >= spec.power_target) return d;
  }
  throw std::runtime_error("required_max_events: no event count reached the target power");
}

}  // namespace gsd
