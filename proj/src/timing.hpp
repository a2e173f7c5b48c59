#pragma once

#include <optional>
#include <string>
#include <vector>

#include "design.hpp"

namespace gsd {

struct AccrualPiece {
  double rate = 0.0;      // patients per month
  double duration = 0.0;  // months
};

struct TrialModel {
  std::vector<AccrualPiece> accrual;
  int n_total = 0;
  double allocation_ratio = 1.0;
  double median_survival_control = 0.0;       // months
  double median_survival_experimental = 0.0;  // months
  double annual_dropout_rate = 0.0;

  double accrual_end() const;
  double hazard_control() const;       // ln 2 / median
  double hazard_experimental() const;
  double dropout_hazard() const;       // monthly, -ln(1-p)/12

  void validate() const;
};

// Expected event count at calendar time tau under uniform accrual within each
// piece and exponential event/dropout competing risks.
double expected_events(const TrialModel& model, double tau);

// Calendar time (months) at which the expected event count reaches target.
// Throws std::invalid_argument("unreachable target") past the asymptote.
double ccod_for_events(const TrialModel& model, double target);

// ccod minus accrual end; clamps at 0 (sets *warned) if accrual is still open.
double minimal_follow_up(const TrialModel& model, double ccod,
                         bool* warned = nullptr);

struct UpdatedAnalysisRule {
  int target_events = 0;
  double min_followup_months = 0.0;  // per-patient follow-up cap
};

struct ScheduleRow {
  std::string label;
  int target_events = 0;
  double predicted_month = 0.0;
  double minimal_followup_months = 0.0;
};

std::vector<ScheduleRow> predicted_schedule(
    const TrialModel& model, const BoundaryTable& table,
    const std::optional<UpdatedAnalysisRule>& updated);

}  // namespace gsd
