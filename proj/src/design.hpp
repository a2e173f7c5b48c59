#pragma once

#include <optional>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace gsd {

struct AnalysisPlan {
  std::string label;
  double information_fraction = 1.0;  // in (0,1]
  bool efficacy = false;
  std::optional<double> futility_hr;  // stop recommended if observed HR >= this
};

enum class SpendingFamily { LanDeMetsOBF };

struct DesignSpec {
  double alpha_one_sided = 0.025;
  double power_target = 0.80;
  double hr_alternative = 0.75;
  double allocation_ratio = 1.0;  // experimental : control
  SpendingFamily spending = SpendingFamily::LanDeMetsOBF;
  bool binding_futility = false;
  std::vector<AnalysisPlan> analyses;

  void validate() const;  // throws std::invalid_argument
};

struct BoundaryRow {
  std::string label;
  double information_fraction = 1.0;
  int target_events = 0;
  double cumulative_alpha = 0.0;  // spent through this analysis (one-sided)
  std::optional<double> nominal_level_one_sided;
  std::optional<double> efficacy_z;
  std::optional<double> efficacy_hr;
  std::optional<double> futility_hr;
  std::optional<double> futility_z;
};

struct BoundaryTable {
  std::vector<BoundaryRow> rows;
  int max_events = 0;
};

// Lan-DeMets O'Brien-Fleming spending: alpha(t) = 2*(1 - Phi(z_{1-a/2}/sqrt(t))).
double spend(double t, double alpha);

// Schoenfeld scale conversions: z = -log(hr) * sqrt(d * r) / (1 + r).
double hr_to_z(double hr, double events, double allocation_ratio = 1.0);
double z_to_hr(double z, double events, double allocation_ratio = 1.0);

// Schoenfeld event count for a fixed (single-look) design.
int fixed_design_events(double alpha_one_sided, double power_target,
                        double hr_alternative, double allocation_ratio = 1.0);

// Critical value of the test on the hazard-ratio scale.
double minimal_detectable_difference(int events, double alpha_level_one_sided,
                                     double allocation_ratio = 1.0);

// Event target at an information fraction (smallest count reaching it).
int target_events_for_fraction(double t, int max_events);

BoundaryTable compute_boundaries(const DesignSpec& spec, int max_events);

// Smallest max_events with power >= power_target (futility ignored).
int required_max_events(const DesignSpec& spec);

double power(const DesignSpec& spec, int max_events, double hr_true,
             bool honor_futility);

}  // namespace gsd
