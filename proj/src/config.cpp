#include "config.hpp"

#include <set>

#include <json.hpp>

#include "errors.hpp"

namespace gsd {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, val] : j.items()) {
    (void)val;
    if (!allowed.count(key)) {
      throw ConfigError("unknown key \"" + key + "\" in " + where);
    }
  }
}

double require_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ConfigError("missing or non-numeric \"" + key + "\" in " + where);
  }
  return j[key].get<double>();
}

}  // namespace

ConfigDocument ConfigDocument::parse(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  reject_unknown_keys(doc, {"design", "enrollment", "survival", "dropout",
                            "updated_analysis", "reporting"},
                      "config");

  ConfigDocument cfg;
  try {
    if (!doc.contains("design")) throw ConfigError("missing \"design\" section");
    const json& jd = doc["design"];
    reject_unknown_keys(jd,
                        {"alpha_one_sided", "power", "hr_alternative",
                         "allocation_ratio", "spending", "binding_futility",
                         "analyses"},
                        "design");
    cfg.design.alpha_one_sided = require_number(jd, "alpha_one_sided", "design");
    cfg.design.power_target = require_number(jd, "power", "design");
    cfg.design.hr_alternative = require_number(jd, "hr_alternative", "design");
    cfg.design.allocation_ratio = jd.value("allocation_ratio", 1.0);
    cfg.design.binding_futility = jd.value("binding_futility", false);
    const std::string spending = jd.value("spending", "lan-demets-obf");
    if (spending != "lan-demets-obf") {
      throw ConfigError("unsupported spending family \"" + spending + "\"");
    }
    if (!jd.contains("analyses") || !jd["analyses"].is_array()) {
      throw ConfigError("design.analyses must be an array");
    }
    for (const auto& ja : jd["analyses"]) {
      reject_unknown_keys(ja, {"label", "information_fraction", "efficacy", "futility_hr"},
                          "design.analyses");
      AnalysisPlan plan;
      plan.label = ja.at("label").get<std::string>();
      plan.information_fraction = require_number(ja, "information_fraction", plan.label);
      plan.efficacy = ja.value("efficacy", false);
      if (ja.contains("futility_hr")) plan.futility_hr = ja["futility_hr"].get<double>();
      cfg.design.analyses.push_back(std::move(plan));
    }
    cfg.design.validate();

    if (!doc.contains("enrollment")) throw ConfigError("missing \"enrollment\" section");
    const json& je = doc["enrollment"];
    reject_unknown_keys(je, {"rate_per_month", "schedule", "n_total"}, "enrollment");
    cfg.model.n_total = static_cast<int>(require_number(je, "n_total", "enrollment"));
    if (je.contains("schedule")) {
      for (const auto& jp : je["schedule"]) {
        reject_unknown_keys(jp, {"rate_per_month", "months"}, "enrollment.schedule");
        cfg.model.accrual.push_back({require_number(jp, "rate_per_month", "schedule"),
                                     require_number(jp, "months", "schedule")});
      }
    } else {
      const double rate = require_number(je, "rate_per_month", "enrollment");
      if (rate <= 0.0) throw ConfigError("enrollment rate must be positive");
      cfg.model.accrual.push_back({rate, cfg.model.n_total / rate});
    }
    cfg.model.allocation_ratio = cfg.design.allocation_ratio;

    if (!doc.contains("survival")) throw ConfigError("missing \"survival\" section");
    const json& js = doc["survival"];
    reject_unknown_keys(js, {"median_control_months", "median_experimental_months"},
                        "survival");
    cfg.model.median_survival_control =
        require_number(js, "median_control_months", "survival");
    cfg.model.median_survival_experimental =
        require_number(js, "median_experimental_months", "survival");

    if (doc.contains("dropout")) {
      reject_unknown_keys(doc["dropout"], {"annual_rate"}, "dropout");
      cfg.model.annual_dropout_rate = require_number(doc["dropout"], "annual_rate", "dropout");
    }
    cfg.model.validate();

    if (doc.contains("updated_analysis")) {
      const json& ju = doc["updated_analysis"];
      reject_unknown_keys(ju, {"target_events", "min_followup_months"}, "updated_analysis");
      UpdatedAnalysisRule rule;
      rule.target_events =
          static_cast<int>(require_number(ju, "target_events", "updated_analysis"));
      rule.min_followup_months = require_number(ju, "min_followup_months", "updated_analysis");
      cfg.updated_analysis = rule;
    }

    if (doc.contains("reporting")) {
      const json& jr = doc["reporting"];
      reject_unknown_keys(jr,
                          {"first_patient_in_date", "ssd_lag_weeks",
                           "two_sided_presentation"},
                          "reporting");
      if (jr.contains("first_patient_in_date")) {
        cfg.reporting.first_patient_in_date = jr["first_patient_in_date"].get<std::string>();
      }
      cfg.reporting.ssd_lag_weeks = jr.value("ssd_lag_weeks", 6.0);
      cfg.reporting.two_sided_presentation = jr.value("two_sided_presentation", true);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

}  // namespace gsd
