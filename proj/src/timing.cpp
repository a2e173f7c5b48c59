#include "timing.hpp"

#include <cmath>
#include <stdexcept>

namespace gsd {

double TrialModel::accrual_end() const {
  double t = 0.0;
  for (const auto& p : accrual) t += p.duration;
  return t;
}

double TrialModel::hazard_control() const {
  return std::log(2.0) / median_survival_control;
}

double TrialModel::hazard_experimental() const {
  return std::log(2.0) / median_survival_experimental;
}

double TrialModel::dropout_hazard() const {
  return -std::log(1.0 - annual_dropout_rate) / 12.0;
}

void TrialModel::validate() const {
  if (accrual.empty()) throw std::invalid_argument("TrialModel: accrual schedule empty");
  double total = 0.0;
  for (const auto& p : accrual) {
    if (!(p.rate >= 0.0) || !(p.duration > 0.0)) {
      throw std::invalid_argument("TrialModel: invalid accrual piece");
    }
    total += p.rate * p.duration;
  }
  if (std::fabs(total - n_total) > 1e-6 * std::max(1.0, double(n_total))) {
    throw std::invalid_argument("TrialModel: accrual must integrate to n_total");
  }
  if (!(median_survival_control > 0.0) || !(median_survival_experimental > 0.0)) {
    throw std::invalid_argument("TrialModel: medians must be positive");
  }
  if (!(annual_dropout_rate >= 0.0 && annual_dropout_rate < 1.0)) {
    throw std::invalid_argument("TrialModel: dropout rate must lie in [0, 1)");
  }
  if (!(allocation_ratio > 0.0)) {
    throw std::invalid_argument("TrialModel: allocation ratio must be positive");
  }
}

namespace {

// Expected events from one accrual piece [t0, t0+dur) for one arm with event
// hazard lam and dropout hazard eta, at calendar time tau.
double piece_events(double rate, double t0, double dur, double lam, double eta,
                    double tau) {
  if (tau <= t0 || rate == 0.0) return 0.0;
  const double m = std::min(tau, t0 + dur);
  const double c = lam + eta;
  // integral over entry u of 1 - exp(-c (tau - u))
  const double integral = (m - t0) - (std::exp(-c * (tau - m)) - std::exp(-c * (tau - t0))) / c;
  return rate * (lam / c) * integral;
}

}  // namespace

double expected_events(const TrialModel& model, double tau) {
  model.validate();
  if (tau < 0.0) throw std::invalid_argument("expected_events: tau must be >= 0");
  const double eta = model.dropout_hazard();
  const double r = model.allocation_ratio;
  const double frac_exp = r / (1.0 + r);
  double total = 0.0;
  double t0 = 0.0;
  for (const auto& p : model.accrual) {
    total += piece_events(p.rate * (1.0 - frac_exp), t0, p.duration,
                          model.hazard_control(), eta, tau);
    total += piece_events(p.rate * frac_exp, t0, p.duration,
                          model.hazard_experimental(), eta, tau);
    t0 += p.duration;
  }
  return total;
}

double ccod_for_events(const TrialModel& model, double target) {
  model.validate();
  if (target < 0.0) throw std::invalid_argument("ccod_for_events: target must be >= 0");
  if (target == 0.0) return 0.0;
  double hi = model.accrual_end() + 12.0;
  while (expected_events(model, hi) < target) {
    hi *= 2.0;
    if (hi > 1e7) throw std::invalid_argument("unreachable target");
  }
  return find_root([&](double tau) { return expected_events(model, tau) - target; },
                   0.0, hi, 0.01);
}

double minimal_follow_up(const TrialModel& model, double ccod, bool* warned) {
  if (warned) *warned = false;
  const double end = model.accrual_end();
  if (ccod < end) {
    if (warned) *warned = true;
    return 0.0;
  }
  return ccod - end;
}

std::vector<ScheduleRow> predicted_schedule(
    const TrialModel& model, const BoundaryTable& table,
    const std::optional<UpdatedAnalysisRule>& updated) {
  model.validate();
  std::vector<ScheduleRow> out;
  for (const auto& row : table.rows) {
    ScheduleRow s;
    s.label = row.label;
    s.target_events = row.target_events;
    s.predicted_month = ccod_for_events(model, row.target_events);
    s.minimal_followup_months = minimal_follow_up(model, s.predicted_month);
    out.push_back(std::move(s));
  }
  if (updated) {
    ScheduleRow s;
    s.label = "Updated analysis";
    s.target_events = updated->target_events;
    const double by_events = ccod_for_events(model, updated->target_events);
    const double by_followup = model.accrual_end() + updated->min_followup_months;
    s.predicted_month = std::min(by_events, by_followup);
    s.minimal_followup_months = minimal_follow_up(model, s.predicted_month);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace gsd
