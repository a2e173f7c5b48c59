#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "dates.hpp"
#include "errors.hpp"
#include "inference.hpp"

namespace gsd {

namespace {

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

const ScheduleRow* schedule_row(const std::vector<ScheduleRow>& schedule,
                                const std::string& label) {
  for (const auto& s : schedule) {
    if (s.label == label) return &s;
  }
  return nullptr;
}

}  // namespace

std::string boundary_table_csv(const BoundaryTable& table,
                               const std::vector<ScheduleRow>& schedule) {
  std::ostringstream out;
  out << "label,information_fraction,target_events,predicted_month,futility_hr,"
         "nominal_alpha_2sided,efficacy_z,efficacy_hr\n";
  auto emit = [&](const std::string& label, const std::string& t, int events,
                  const ScheduleRow* sched, const BoundaryRow* row) {
    out << label << ',' << t << ',' << events << ',';
    if (sched) out << fmt(sched->predicted_month, 1);
    out << ',';
    if (row && row->futility_hr) out << fmt(*row->futility_hr, 3);
    out << ',';
    if (row && row->nominal_level_one_sided)
      out << fmt(2.0 * *row->nominal_level_one_sided, 3);
    out << ',';
    if (row && row->efficacy_z) out << fmt(*row->efficacy_z, 3);
    out << ',';
    if (row && row->efficacy_hr) out << fmt(*row->efficacy_hr, 3);
    out << '\n';
  };
  for (const auto& row : table.rows) {
    emit(row.label, fmt(row.information_fraction, 2), row.target_events,
         schedule_row(schedule, row.label), &row);
  }
  for (const auto& s : schedule) {
    bool in_table = false;
    for (const auto& row : table.rows) in_table = in_table || row.label == s.label;
    if (!in_table) emit(s.label, "", s.target_events, &s, nullptr);
  }
  return out.str();
}

std::string boundary_table_text(const BoundaryTable& table,
                                const std::vector<ScheduleRow>& schedule,
                                bool two_sided) {
  std::ostringstream out;
  out << "Analysis                    IF    Events  Month   Futility HR  "
      << (two_sided ? "Nominal alpha (2-sided)" : "Nominal alpha (1-sided)")
      << "  Efficacy HR\n";
  auto line = [&](const std::string& label, const std::string& t, int events,
                  const ScheduleRow* sched, const BoundaryRow* row) {
    char buf[160];
    std::string month = sched ? fmt(sched->predicted_month, 1) : "";
    std::string fut = row && row->futility_hr ? fmt(*row->futility_hr, 1) : "";
    std::string alpha;
    if (row && row->nominal_level_one_sided) {
      alpha = fmt((two_sided ? 2.0 : 1.0) * *row->nominal_level_one_sided, 3);
    }
    std::string hr = row && row->efficacy_hr ? fmt(*row->efficacy_hr, 3) : "";
    std::snprintf(buf, sizeof(buf), "%-27s %-5s %-7d %-7s %-12s %-24s %s\n",
                  label.c_str(), t.c_str(), events, month.c_str(), fut.c_str(),
                  alpha.c_str(), hr.c_str());
    out << buf;
  };
  for (const auto& row : table.rows) {
    line(row.label, fmt(row.information_fraction, 2), row.target_events,
         schedule_row(schedule, row.label), &row);
  }
  for (const auto& s : schedule) {
    bool in_table = false;
    for (const auto& row : table.rows) in_table = in_table || row.label == s.label;
    if (!in_table) line(s.label, "", s.target_events, &s, nullptr);
  }
  return out.str();
}

std::string schedule_csv(const std::vector<ScheduleRow>& schedule,
                         const std::optional<std::string>& first_patient_in) {
  std::ostringstream out;
  out << "analysis,target_events,predicted_month,predicted_date,"
         "minimal_followup_months\n";
  for (const auto& s : schedule) {
    out << s.label << ',' << s.target_events << ',' << fmt(s.predicted_month, 1) << ',';
    if (first_patient_in) out << date_after_months(*first_patient_in, s.predicted_month);
    out << ',' << fmt(s.minimal_followup_months, 1) << '\n';
  }
  return out.str();
}

std::string oc_summary_text(const OperatingCharacteristics& oc) {
  std::ostringstream out;
  out << "trials: " << oc.n_trials << '\n';
  out << "rejection probability: " << fmt(oc.rejection, 4) << " (MC SE "
      << fmt(oc.rejection_se, 4) << ")\n";
  for (const auto& [label, p] : oc.futility_stop_prob) {
    out << "futility stop at " << label << ": " << fmt(p, 4) << " (MC SE "
        << fmt(std::sqrt(p * (1.0 - p) / oc.n_trials), 4) << ")\n";
  }
  out << "expected events at decision: " << fmt(oc.expected_events, 1) << '\n';
  out << "expected duration (months): " << fmt(oc.expected_duration, 1) << '\n';
  return out.str();
}

std::string outcomes_csv(const std::vector<SimOutcome>& outcomes) {
  std::ostringstream out;
  out << "stop_label,decision,events,z,hr,duration_months\n";
  for (const auto& o : outcomes) {
    const ConductedLook* last = o.looks.empty() ? nullptr : &o.looks.back();
    out << o.stop_label << ',' << to_string(o.decision) << ',' << o.events << ',';
    if (last) out << fmt(last->z, 4) << ',' << fmt(last->hr, 4);
    else out << ',';
    out << ',' << fmt(o.duration_months, 2) << '\n';
  }
  return out.str();
}

namespace {

std::string reporting_name(const TrialCourse& course, const ObservedAnalysis& a) {
  if (course.designations) {
    if (const ReportingLabel* l = course.designations->find(a.label)) {
      switch (*l) {
        case ReportingLabel::FutilityAnalysis: return "futility analysis";
        case ReportingLabel::ConfirmatoryAnalysis: return "confirmatory analysis";
        case ReportingLabel::UpdatedAnalysis: return "updated analysis";
        case ReportingLabel::NotConducted: break;
      }
    }
  }
  return "analysis";
}

void lint(const std::string& text) {
  if (text.find("final analysis") != std::string::npos) {
    throw ContractViolation(
        "report lint: the token \"final analysis\" is not reporting-stage "
        "terminology");
  }
}

}  // namespace

std::string render_report(const TrialCourse& course) {
  std::ostringstream out;
  const int max_events = course.table.max_events;

  if (!course.complete()) {
    out << "Trial status: ongoing.\n";
    for (const auto& a : course.analyses) {
      out << "Conducted analysis at " << a.observed_events << " events";
      if (!a.ccod.empty()) out << " (clinical cutoff date " << a.ccod << ")";
      out << "; observed hazard ratio "
          << fmt(z_to_hr(a.observed_z, a.observed_events, course.spec.allocation_ratio), 3)
          << "; decision: " << to_string(a.decision) << ".\n";
    }
    std::string text = out.str();
    lint(text);
    return text;
  }

  const ObservedAnalysis* deciding = nullptr;
  for (const auto& a : course.analyses) {
    if (a.decision != Decision::Continue) deciding = &a;
  }
  if (!deciding) throw std::logic_error("render_report: closed course without a decision");
  const auto& a = *deciding;
  const std::string name = reporting_name(course, a);
  const double observed_hr =
      z_to_hr(a.observed_z, a.observed_events, course.spec.allocation_ratio);
  const double t_obs = double(a.observed_events) / max_events;

  out << "Trial report\n============\n\n";
  out << "The " << name << " was conducted at a clinical cutoff date";
  if (!a.ccod.empty()) out << " of " << a.ccod;
  if (!a.ssd.empty()) out << " with snapshot date " << a.ssd;
  out << ".\n";
  out << "At the clinical cutoff date, " << a.observed_events
      << " events had been observed, corresponding to an information fraction of "
      << fmt(t_obs, 3) << " relative to the target of " << max_events << " events.\n";

  if (a.recalculated) {
    out << "The nominal significance level was recalculated from the observed "
           "information fraction to "
        << fmt(2.0 * a.recalculated->alpha_one_sided, 4)
        << " (two-sided), giving a critical hazard ratio threshold of "
        << fmt(a.recalculated->hr_bound, 3) << ".\n";
  }
  out << "The observed hazard ratio at this " << name << " was " << fmt(observed_hr, 3)
      << " based on " << a.observed_events << " events.\n";

  switch (course.hypothesis_state) {
    case HypothesisState::Rejected: {
      out << "The null hypothesis was rejected; the trial ";
      out << (a.decision == Decision::StopEfficacy
                  ? "was recommended to stop for efficacy.\n"
                  : "met its primary objective.\n");
      // Adjusted inference for the early stop.
      StoppedTrialDatum datum;
      datum.allocation_ratio = course.spec.allocation_ratio;
      for (const auto& obs : course.analyses) {
        if (!obs.recalculated) continue;
        datum.info.push_back(obs.observed_events);
        if (&obs == &a) break;
        datum.bounds.push_back(obs.recalculated->z_bound);
      }
      datum.stop_stage = datum.info.size() - 1;
      datum.z_obs = a.observed_z;
      const HrCi naive = naive_hr_ci(observed_hr, a.observed_events, 0.05,
                                     course.spec.allocation_ratio);
      const auto [lo, hi] = adjusted_ci(datum, 0.05);
      out << "Unadjusted 95% confidence interval: " << fmt(naive.lower, 3) << " to "
          << fmt(naive.upper, 3) << ".\n";
      out << "Accounting for the group-sequential design, the median unbiased "
             "estimate is "
          << fmt(median_unbiased_hr(datum), 3) << " with adjusted 95% confidence "
          << "interval from " << fmt(lo, 3) << " to " << fmt(hi, 3) << ".\n";
      break;
    }
    case HypothesisState::AbandonedFutility:
      out << "Based on the presented data, it was recommended to stop the trial "
             "for futility.\n";
      out << "An updated analysis at the originally planned primary timing will "
             "provide the relevant safety information; no further update will be "
             "conducted.\n";
      break;
    case HypothesisState::RetainedAtPrimary:
      out << "The null hypothesis was retained at the confirmatory analysis.\n";
      break;
    case HypothesisState::Open:
      break;
  }

  if (course.designations && course.designations->decisive) {
    out << "\nDecisive analysis: the "
        << reporting_name(course, a) << " (" << *course.designations->decisive << ").\n";
  }

  std::string text = out.str();
  lint(text);
  return text;
}

}  // namespace gsd
