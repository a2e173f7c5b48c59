#pragma once

#include <optional>
#include <string>

#include "sim.hpp"

namespace gsd {

struct ReportingOptions {
  std::optional<std::string> first_patient_in_date;
  double ssd_lag_weeks = 6.0;
  bool two_sided_presentation = true;
};

// The CLI's configuration document: design, enrollment, survival, dropout,
// updated-analysis rule and reporting options. Schema-validated; unknown keys
// are rejected.
struct ConfigDocument {
  DesignSpec design;
  TrialModel model;
  std::optional<UpdatedAnalysisRule> updated_analysis;
  ReportingOptions reporting;

  static ConfigDocument parse(const std::string& json_text);  // throws ConfigError
};

}  // namespace gsd
