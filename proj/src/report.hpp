#pragma once

#include <string>

#include "config.hpp"
#include "monitoring.hpp"
#include "sim.hpp"
#include "timing.hpp"

namespace gsd {

// Tabular artifacts (CSV, bit-exact for golden diffs).
std::string boundary_table_csv(const BoundaryTable& table,
                               const std::vector<ScheduleRow>& schedule);
std::string boundary_table_text(const BoundaryTable& table,
                                const std::vector<ScheduleRow>& schedule,
                                bool two_sided);
std::string schedule_csv(const std::vector<ScheduleRow>& schedule,
                         const std::optional<std::string>& first_patient_in);
std::string oc_summary_text(const OperatingCharacteristics& oc);
std::string outcomes_csv(const std::vector<SimOutcome>& outcomes);

// Reporting-stage trial report. Conducted analyses are named with reporting
// terminology only; rendering refuses the token "final analysis".
std::string render_report(const TrialCourse& course);

}  // namespace gsd
