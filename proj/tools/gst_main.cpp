// Command-line front end for the group-sequential trial toolkit. Talks to the
// core exclusively through the C API in gst.h.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gst.h"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw CLI::ValidationError("cannot write file: " + path);
  out << content;
}

struct StringGuard {
  char* s = nullptr;
  ~StringGuard() { gst_string_free(s); }
  std::string str() const { return s ? s : ""; }
};

struct DesignGuard {
  gst_design* d = nullptr;
  ~DesignGuard() { gst_design_free(d); }
};

struct CourseGuard {
  gst_course* c = nullptr;
  ~CourseGuard() { gst_course_free(c); }
};

int fail(gst_status status) {
  std::cerr << "error: " << gst_last_error() << "\n";
  switch (status) {
    case GST_ERR_CONFIG: return 2;
    case GST_ERR_CONTRACT: return 3;
    default: return 1;
  }
}

int load_design(const std::string& config_path, DesignGuard& design) {
  const std::string text = read_file(config_path);
  if (auto st = gst_design_from_config(text.c_str(), &design.d); st != GST_OK) {
    return fail(st);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group-sequential trial design, monitoring and simulation"};
  app.require_subcommand(1);

  std::string config_path, course_path, out_dir, format = "text";
  std::uint64_t seed = 0;
  long trials = 100000;
  double hr_true = 1.0;
  bool honor_futility = true;
  double overrun_fraction = 0.0;
  bool per_trial = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "Output directory for artifacts");
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"csv", "text"}));
  };

  auto* design_cmd = app.add_subcommand("design", "Emit the boundary table");
  design_cmd->add_option("--config", config_path, "Config JSON")->required();
  add_common(design_cmd);

  auto* timing_cmd = app.add_subcommand("timing", "Emit the predicted schedule");
  timing_cmd->add_option("--config", config_path, "Config JSON")->required();
  add_common(timing_cmd);

  auto* monitor_cmd = app.add_subcommand("monitor", "Record an analysis on a course");
  monitor_cmd->add_option("--course", course_path, "Course JSON file")->required();
  bool init = false;
  std::string label, ccod, ssd;
  int events = 0;
  double obs_hr = 0.0, obs_z = 0.0;
  bool have_hr = false, have_z = false, overrule = false;
  monitor_cmd->add_flag("--init", init, "Create a fresh course from --config");
  monitor_cmd->add_option("--config", config_path, "Config JSON (with --init)");
  monitor_cmd->add_option("--label", label, "Planned analysis label");
  monitor_cmd->add_option("--ccod", ccod, "Clinical cutoff date (ISO)");
  monitor_cmd->add_option("--ssd", ssd, "Snapshot date (ISO)");
  monitor_cmd->add_option("--events", events, "Observed event count");
  monitor_cmd->add_option("--hr", obs_hr, "Observed hazard ratio")
      ->each([&](const std::string&) { have_hr = true; });
  monitor_cmd->add_option("--z", obs_z, "Observed z statistic")
      ->each([&](const std::string&) { have_z = true; });
  monitor_cmd->add_flag("--overrule-futility", overrule,
                        "Record but overrule a futility recommendation");

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo operating characteristics");
  simulate_cmd->add_option("--config", config_path, "Config JSON")->required();
  simulate_cmd->add_option("--seed", seed, "RNG seed");
  simulate_cmd->add_option("--trials", trials, "Number of trials");
  simulate_cmd->add_option("--hr-true", hr_true, "True hazard ratio");
  simulate_cmd->add_option("--honor-futility", honor_futility,
                           "Follow futility recommendations");
  simulate_cmd->add_option("--overrun", overrun_fraction,
                           "Uniform +- fraction perturbing event triggers");
  simulate_cmd->add_flag("--per-trial", per_trial, "Also write per-trial CSV");
  add_common(simulate_cmd);

  auto* report_cmd = app.add_subcommand("report", "Render the trial report");
  report_cmd->add_option("--course", course_path, "Course JSON file")->required();
  add_common(report_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (design_cmd->parsed() || timing_cmd->parsed()) {
      DesignGuard design;
      if (int rc = load_design(config_path, design); rc != 0) return rc;
      StringGuard csv, text;
      if (design_cmd->parsed()) {
        if (auto st = gst_design_boundary_csv(design.d, &csv.s); st != GST_OK) return fail(st);
        if (auto st = gst_design_table_text(design.d, &text.s); st != GST_OK) return fail(st);
        std::cout << (format == "csv" ? csv.str() : text.str());
        if (!out_dir.empty()) {
          write_file(out_dir + "/boundary.csv", csv.str());
          write_file(out_dir + "/design_table.txt", text.str());
        }
      } else {
        if (auto st = gst_design_schedule_csv(design.d, &csv.s); st != GST_OK) return fail(st);
        std::cout << csv.str();
        if (!out_dir.empty()) write_file(out_dir + "/schedule.csv", csv.str());
      }
      return 0;
    }

    if (monitor_cmd->parsed()) {
      CourseGuard course;
      if (init) {
        if (config_path.empty()) {
          std::cerr << "error: --init requires --config\n";
          return 2;
        }
        DesignGuard design;
        if (int rc = load_design(config_path, design); rc != 0) return rc;
        if (auto st = gst_course_new(design.d, &course.c); st != GST_OK) return fail(st);
      } else {
        const std::string text = read_file(course_path);
        if (auto st = gst_course_from_json(text.c_str(), &course.c); st != GST_OK) {
          return fail(st);
        }
      }
      if (!label.empty()) {
        std::ostringstream rec;
        rec << "{\"label\":\"" << label << "\",\"ccod\":\"" << ccod
            << "\",\"ssd\":\"" << ssd << "\",\"observed_events\":" << events;
        if (have_hr) rec << ",\"observed_hr\":" << obs_hr;
        if (have_z) rec << ",\"observed_z\":" << obs_z;
        rec << ",\"overrule_futility\":" << (overrule ? "true" : "false") << "}";
        StringGuard printout;
        if (auto st = gst_course_record(course.c, rec.str().c_str(), &printout.s);
            st != GST_OK) {
          return fail(st);
        }
        std::cout << printout.str();
      }
      StringGuard json;
      if (auto st = gst_course_to_json(course.c, &json.s); st != GST_OK) return fail(st);
      write_file(course_path, json.str());
      return 0;
    }

    if (simulate_cmd->parsed()) {
      DesignGuard design;
      if (int rc = load_design(config_path, design); rc != 0) return rc;
      std::ostringstream sim;
      sim << "{\"hr_true\":" << hr_true << ",\"n_trials\":" << trials
          << ",\"seed\":" << seed
          << ",\"honor_futility\":" << (honor_futility ? "true" : "false")
          << ",\"overrun_fraction\":" << overrun_fraction
          << ",\"per_trial_csv\":" << (per_trial ? "true" : "false") << "}";
      StringGuard oc, rows;
      if (auto st = gst_simulate(design.d, sim.str().c_str(), &oc.s, &rows.s);
          st != GST_OK) {
        return fail(st);
      }
      std::cout << oc.str();
      if (!out_dir.empty()) {
        write_file(out_dir + "/oc_summary.txt", oc.str());
        if (rows.s) write_file(out_dir + "/trials.csv", rows.str());
      }
      return 0;
    }

    if (report_cmd->parsed()) {
      const std::string text = read_file(course_path);
      CourseGuard course;
      if (auto st = gst_course_from_json(text.c_str(), &course.c); st != GST_OK) {
        return fail(st);
      }
      StringGuard report;
      if (auto st = gst_course_report(course.c, &report.s); st != GST_OK) return fail(st);
      std::cout << report.str();
      if (!out_dir.empty()) write_file(out_dir + "/report.txt", report.str());
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
