#include "gst.h"

#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include <json.hpp>

#include "config.hpp"
#include "errors.hpp"
#include "report.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
gst_status guarded(Fn&& fn) {
  try {
    fn();
    return GST_OK;
  } catch (const gsd::ConfigError& e) {
    g_last_error = e.what();
    return GST_ERR_CONFIG;
  } catch (const gsd::ContractViolation& e) {
    g_last_error = e.what();
    return GST_ERR_CONTRACT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GST_ERR_INVALID;
  }
}

}  // namespace

struct gst_design {
  gsd::ConfigDocument config;
  gsd::BoundaryTable table;
  std::vector<gsd::ScheduleRow> schedule;
};

struct gst_course {
  gsd::TrialCourse course;
};

extern "C" {

const char* gst_last_error(void) { return g_last_error.c_str(); }

void gst_string_free(char* s) { delete[] s; }

gst_status gst_design_from_config(const char* config_json, gst_design** out) {
  return guarded([&] {
    if (!config_json || !out) throw std::invalid_argument("null argument");
    auto design = std::make_unique<gst_design>();
    design->config = gsd::ConfigDocument::parse(config_json);
    const int max_events = gsd::required_max_events(design->config.design);
    design->table = gsd::compute_boundaries(design->config.design, max_events);
    design->schedule = gsd::predicted_schedule(design->config.model, design->table,
                                               design->config.updated_analysis);
    *out = design.release();
  });
}

void gst_design_free(gst_design* design) { delete design; }

gst_status gst_design_boundary_csv(const gst_design* design, char** out) {
  return guarded([&] {
    if (!design || !out) throw std::invalid_argument("null argument");
    *out = dup_string(gsd::boundary_table_csv(design->table, design->schedule));
  });
}

gst_status gst_design_table_text(const gst_design* design, char** out) {
  return guarded([&] {
    if (!design || !out) throw std::invalid_argument("null argument");
    *out = dup_string(gsd::boundary_table_text(
        design->table, design->schedule,
        design->config.reporting.two_sided_presentation));
  });
}

gst_status gst_design_schedule_csv(const gst_design* design, char** out) {
  return guarded([&] {
    if (!design || !out) throw std::invalid_argument("null argument");
    *out = dup_string(gsd::schedule_csv(design->schedule,
                                        design->config.reporting.first_patient_in_date));
  });
}

gst_status gst_course_new(const gst_design* design, gst_course** out) {
  return guarded([&] {
    if (!design || !out) throw std::invalid_argument("null argument");
    auto course = std::make_unique<gst_course>();
    course->course.spec = design->config.design;
    course->course.table = design->table;
    *out = course.release();
  });
}

gst_status gst_course_from_json(const char* json, gst_course** out) {
  return guarded([&] {
    if (!json || !out) throw std::invalid_argument("null argument");
    auto course = std::make_unique<gst_course>();
    course->course = gsd::TrialCourse::from_json(json);
    *out = course.release();
  });
}

void gst_course_free(gst_course* course) { delete course; }

gst_status gst_course_to_json(const gst_course* course, char** out) {
  return guarded([&] {
    if (!course || !out) throw std::invalid_argument("null argument");
    *out = dup_string(course->course.to_json());
  });
}

gst_status gst_course_record(gst_course* course, const char* record_json,
                             char** printout) {
  return guarded([&] {
    if (!course || !record_json) throw std::invalid_argument("null argument");
    const auto j = nlohmann::json::parse(record_json);
    gsd::TrialCourse::Record rec;
    rec.label = j.at("label").get<std::string>();
    rec.ccod = j.value("ccod", "");
    rec.ssd = j.value("ssd", "");
    rec.observed_events = j.at("observed_events").get<int>();
    if (j.contains("observed_hr")) rec.observed_hr = j["observed_hr"].get<double>();
    if (j.contains("observed_z")) rec.observed_z = j["observed_z"].get<double>();
    rec.overrule_futility = j.value("overrule_futility", false);

    const auto& obs = course->course.record_analysis(rec);

    if (printout) {
      std::string text = "Recorded " + obs.label + " at " +
                         std::to_string(obs.observed_events) + " events.\n";
      if (obs.recalculated) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "Recalculated nominal level (1-sided) %.5f, z bound %.3f, "
                      "HR bound %.3f.\n",
                      obs.recalculated->alpha_one_sided, obs.recalculated->z_bound,
                      obs.recalculated->hr_bound);
        text += buf;
      }
      text += "Decision: " + gsd::to_string(obs.decision);
      if (obs.futility_recommended && obs.futility_overruled) {
        text += " (futility recommendation overruled)";
      } else if (obs.futility_recommended) {
        text += " (non-binding recommendation)";
      }
      text += "\nHypothesis state: " + gsd::to_string(course->course.hypothesis_state) + "\n";
      if (course->course.designations && !course->course.designations->labels.empty()) {
        text += "Designations:\n";
        for (const auto& [label, rl] : course->course.designations->labels) {
          text += "  " + label + ": " + gsd::to_string(rl) + "\n";
        }
      }
      *printout = dup_string(text);
    }
  });
}

gst_status gst_course_report(const gst_course* course, char** out) {
  return guarded([&] {
    if (!course || !out) throw std::invalid_argument("null argument");
    *out = dup_string(gsd::render_report(course->course));
  });
}

gst_status gst_simulate(const gst_design* design, const char* sim_json,
                        char** oc_text, char** trials_csv) {
  return guarded([&] {
    if (!design || !sim_json || !oc_text) throw std::invalid_argument("null argument");
    const auto j = nlohmann::json::parse(sim_json);
    gsd::SimConfig config;
    config.model = design->config.model;
    config.spec = design->config.design;
    config.table = design->table;
    config.hr_true = j.value("hr_true", 1.0);
    config.n_trials = j.value("n_trials", 1000L);
    config.seed = j.value("seed", std::uint64_t{0});
    config.honor_futility = j.value("honor_futility", true);
    config.overrun_fraction = j.value("overrun_fraction", 0.0);
    config.threads = j.value("threads", 0);
    config.ssd_lag_weeks = design->config.reporting.ssd_lag_weeks;

    const auto outcomes = gsd::simulate_all(config);
    *oc_text = dup_string(gsd::oc_summary_text(gsd::aggregate(outcomes)));
    if (trials_csv) {
      *trials_csv = j.value("per_trial_csv", false)
                        ? dup_string(gsd::outcomes_csv(outcomes))
                        : nullptr;
    }
  });
}

}  // extern "C"
