// Acceptance gate: one pass/fail line per criterion, exit code = #failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "design.hpp"
#include "inference.hpp"
#include "monitoring.hpp"
#include "report.hpp"
#include "sim.hpp"
#include "timing.hpp"

using namespace gsd;

namespace {

DesignSpec hypothetical_spec() {
  DesignSpec spec;
  spec.alpha_one_sided = 0.025;
  spec.power_target = 0.80;
  spec.hr_alternative = 0.75;
  spec.analyses = {
      {"Interim analysis 1", 1.0 / 3.0, false, 1.0},
      {"Interim analysis 2", 2.0 / 3.0, true, 0.9},
      {"Primary analysis", 1.0, true, std::nullopt},
  };
  return spec;
}

TrialModel hypothetical_model() {
  TrialModel model;
  model.accrual = {{100.0, 12.0}};
  model.n_total = 1200;
  model.allocation_ratio = 1.0;
  model.median_survival_control = 72.0;
  model.median_survival_experimental = 96.0;
  model.annual_dropout_rate = 0.025;
  return model;
}

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << (detail.str().empty() ? "" : "; ") << what;
    }
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      ok = false;
      detail << (detail.str().empty() ? "" : "; ") << what << ": got " << got
             << ", want " << want << " +- " << tol;
    }
  }
};

bool criterion1(Check& c) {
  c.expect(fixed_design_events(0.025, 0.80, 0.75, 1.0) == 380,
           "fixed design events != 380");
  c.near(minimal_detectable_difference(380, 0.025), 0.8177, 0.0005,
         "minimal detectable difference");
  return c.ok;
}

bool criterion2(Check& c) {
  const auto spec = hypothetical_spec();
  const int max_events = required_max_events(spec);
  c.expect(max_events == 385, "max events != 385");
  const auto table = compute_boundaries(spec, 385);
  c.expect(table.rows[0].target_events == 129, "IA1 target != 129");
  c.expect(table.rows[1].target_events == 257, "IA2 target != 257");
  c.expect(table.rows[2].target_events == 385, "primary target != 385");
  c.near(2.0 * *table.rows[1].nominal_level_one_sided, 0.012, 0.0005,
         "IA2 two-sided nominal level");
  c.near(2.0 * *table.rows[2].nominal_level_one_sided, 0.046, 0.0005,
         "primary two-sided nominal level");
  c.near(*table.rows[1].efficacy_hr, 0.731, 0.001, "IA2 HR bound");
  c.near(*table.rows[2].efficacy_hr, 0.816, 0.001, "primary HR bound");
  return c.ok;
}

bool criterion3(Check& c) {
  const auto model = hypothetical_model();
  const auto table = compute_boundaries(hypothetical_spec(), 385);
  const auto schedule =
      predicted_schedule(model, table, UpdatedAnalysisRule{500, 72.0});
  const double months[] = {19.7, 35.6, 54.8, 76.4};
  const double followup[] = {7.7, 23.6, 42.8, 64.4};
  c.expect(schedule.size() == 4, "schedule must list four analyses");
  for (std::size_t k = 0; k < schedule.size() && k < 4; ++k) {
    c.near(schedule[k].predicted_month, months[k], 0.3,
           schedule[k].label + " predicted month");
    c.near(schedule[k].minimal_followup_months, followup[k], 0.3,
           schedule[k].label + " minimal follow-up");
  }
  return c.ok;
}

bool criterion4(Check& c) {
  const auto spec = hypothetical_spec();
  const auto table = compute_boundaries(spec, 385);
  const auto rec = recalc_interim_level(table, spec, "Interim analysis 2", 255, {});
  c.near(2.0 * rec.alpha_one_sided, 0.0117, 0.0005, "recalculated two-sided level");
  c.near(rec.hr_bound, 0.729, 0.001, "recalculated HR bound");
  return c.ok;
}

bool criterion5(Check& c) {
  const auto spec = hypothetical_spec();
  const double with_futility = power(spec, 385, 0.75, true);
  const double without = power(spec, 385, 0.75, false);
  c.near(with_futility, 0.78, 0.005, "analytic power with futility honored");
  c.near(without, 0.80, 0.005, "analytic power without futility");

  SimConfig config;
  config.spec = spec;
  config.model = hypothetical_model();
  config.table = compute_boundaries(spec, 385);
  config.hr_true = 0.75;
  config.seed = 20260823;
  config.n_trials = 100000;
  config.honor_futility = true;
  const auto oc = operating_characteristics(config);
  c.detail << "[sim " << oc.rejection << " vs analytic " << with_futility << "] ";
  c.expect(std::abs(oc.rejection - with_futility) <= 3.0 * oc.rejection_se,
           "simulated power beyond 3 MC SE of the analytic value");
  return c.ok;
}

bool criterion6(Check& c) {
  StoppedTrialDatum datum;
  datum.info = {255.0};
  datum.stop_stage = 0;
  datum.z_obs = hr_to_z(0.689, 255);
  const double median = median_unbiased_hr(datum);
  const auto [lo, hi] = adjusted_ci(datum, 0.05);
  c.near(median, 0.691, 0.005, "median-unbiased HR");
  c.near(lo, 0.540, 0.005, "adjusted CI lower");
  c.near(hi, 0.883, 0.005, "adjusted CI upper");
  // single-look collapse: adjusted inference equals the unadjusted analysis
  const auto naive = naive_hr_ci(0.689, 255, 0.05);
  c.near(median, 0.689, 1e-8, "single-look median collapse");
  c.near(lo, naive.lower, 1e-8, "single-look lower collapse");
  c.near(hi, naive.upper, 1e-8, "single-look upper collapse");
  return c.ok;
}

bool criterion7(Check& c) {
  const auto spec = hypothetical_spec();
  const auto table = compute_boundaries(spec, 385);
  std::mt19937_64 gen(77);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> perturb(-0.15, 0.15);
  std::map<int, RecalculatedBounds> interim;
  std::map<std::pair<int, int>, RecalculatedBounds> primary;
  const long n = 100000;
  long rejections = 0;
  for (long i = 0; i < n; ++i) {
    const int d2 = int(std::lround(257 * (1.0 + perturb(gen))));
    const int d3 = int(std::lround(385 * (1.0 + perturb(gen))));
    auto it1 = interim.find(d2);
    if (it1 == interim.end()) {
      it1 = interim
                .emplace(d2, recalc_interim_level(table, spec, "Interim analysis 2",
                                                  d2, {}))
                .first;
    }
    auto it2 = primary.find({d2, d3});
    if (it2 == primary.end()) {
      it2 = primary
                .emplace(std::pair{d2, d3},
                         recalc_primary_level(table, spec,
                                              {{d2, it1->second.z_bound}}, d3))
                .first;
    }
    const double rho = std::sqrt(double(d2) / d3);
    const double z1 = nd(gen);
    const double z2 = rho * z1 + std::sqrt(1.0 - rho * rho) * nd(gen);
    if (z1 >= it1->second.z_bound || z2 >= it2->second.z_bound) ++rejections;
  }
  const double rate = double(rejections) / n;
  const double se = std::sqrt(0.025 * 0.975 / n);
  c.detail << "[rate " << rate << ", bound " << 0.025 + 3.0 * se << "] ";
  c.expect(rate <= 0.025 + 3.0 * se, "null rejection rate above 0.025 + 3 MC SE");
  return c.ok;
}

bool criterion8(Check& c) {
  const auto spec = hypothetical_spec();
  const auto table = compute_boundaries(spec, 385);
  auto fresh = [&] {
    TrialCourse course;
    course.spec = spec;
    course.table = table;
    return course;
  };
  auto check_labels =
      [&](const TrialCourse& course,
          const std::vector<std::pair<std::string, ReportingLabel>>& want,
          const std::string& scenario) {
        const auto d = designate(course);
        c.expect(d.labels.size() == want.size(), scenario + ": designation size");
        for (const auto& [label, rl] : want) {
          const ReportingLabel* got = d.find(label);
          c.expect(got && *got == rl, scenario + ": " + label);
        }
      };

  auto course = fresh();
  course.record_analysis({"Interim analysis 1", "", "", 132, 1.07, {}, false});
  check_labels(course,
               {{"Interim analysis 1", ReportingLabel::FutilityAnalysis},
                {"Interim analysis 2", ReportingLabel::NotConducted},
                {"Primary analysis", ReportingLabel::UpdatedAnalysis},
                {"Updated analysis", ReportingLabel::NotConducted}},
               "futility stop at IA1");

  course = fresh();
  course.record_analysis({"Interim analysis 1", "", "", 132, 0.95, {}, false});
  course.record_analysis({"Interim analysis 2", "", "", 257, 0.92, {}, false});
  check_labels(course,
               {{"Interim analysis 2", ReportingLabel::FutilityAnalysis},
                {"Primary analysis", ReportingLabel::UpdatedAnalysis},
                {"Updated analysis", ReportingLabel::NotConducted}},
               "futility stop at IA2");

  course = fresh();
  course.record_analysis({"Interim analysis 1", "", "", 132, 0.8, {}, false});
  course.record_analysis({"Interim analysis 2", "", "", 257, 0.70, {}, false});
  check_labels(course,
               {{"Interim analysis 2", ReportingLabel::ConfirmatoryAnalysis},
                {"Primary analysis", ReportingLabel::NotConducted},
                {"Updated analysis", ReportingLabel::UpdatedAnalysis}},
               "efficacy stop at IA2");
  // report uses reporting-stage terminology for the conducted analysis
  std::string report = render_report(course);
  c.expect(report.find("confirmatory analysis") != std::string::npos,
           "efficacy report must say confirmatory analysis");
  c.expect(report.find("final analysis") == std::string::npos,
           "report must not say final analysis");
  c.expect(report.find("The Interim analysis") == std::string::npos,
           "report must not name the conducted analysis with its design-stage label");

  for (double hr_primary : {0.80, 0.95}) {  // rejected and retained
    course = fresh();
    course.record_analysis({"Interim analysis 1", "", "", 132, 0.9, {}, false});
    course.record_analysis({"Interim analysis 2", "", "", 257, 0.85, {}, false});
    course.record_analysis({"Primary analysis", "", "", 385, hr_primary, {}, false});
    check_labels(course,
                 {{"Primary analysis", ReportingLabel::ConfirmatoryAnalysis},
                  {"Updated analysis", ReportingLabel::UpdatedAnalysis}},
                 "reach primary");
  }

  // every decision sequence of length <= 3 designates, with <= 1 confirmatory
  const double hrs[] = {0.70, 0.95, 1.05};
  int closed = 0;
  for (double h1 : hrs) {
    for (double h2 : hrs) {
      for (double h3 : hrs) {
        course = fresh();
        const std::vector<std::pair<std::string, double>> path = {
            {"Interim analysis 1", h1},
            {"Interim analysis 2", h2},
            {"Primary analysis", h3}};
        const int events[] = {132, 257, 385};
        for (std::size_t k = 0; k < path.size() && !course.complete(); ++k) {
          course.record_analysis({path[k].first, "", "", events[k], path[k].second,
                                  {}, false});
        }
        c.expect(course.complete(), "course failed to close within three analyses");
        if (!course.complete()) continue;
        const auto d = designate(course);
        int confirmatory = 0;
        for (const auto& [label, rl] : d.labels) {
          (void)label;
          if (rl == ReportingLabel::ConfirmatoryAnalysis) ++confirmatory;
        }
        c.expect(confirmatory <= 1, "more than one confirmatory analysis");
        const bool futility =
            course.hypothesis_state == HypothesisState::AbandonedFutility;
        c.expect(confirmatory == (futility ? 0 : 1),
                 "confirmatory count inconsistent with the stopping reason");
        ++closed;
      }
    }
  }
  c.expect(closed == 27, "designation enumeration incomplete");
  return c.ok;
}

bool criterion9(Check& c) {
  // Single-draw values are not reproduced; their distributional stand-ins are.
  SimConfig config;
  config.spec = hypothetical_spec();
  config.model = hypothetical_model();
  config.table = compute_boundaries(config.spec, 385);
  config.hr_true = 1.0;
  config.seed = 424242;
  config.n_trials = 20000;
  config.honor_futility = true;
  const auto outcomes = simulate_all(config);

  double sum = 0.0, sumsq = 0.0;
  long futility_ia1 = 0, n1 = 0;
  for (const auto& o : outcomes) {
    if (o.looks.empty()) continue;
    sum += o.looks[0].z;
    sumsq += o.looks[0].z * o.looks[0].z;
    if (o.looks[0].decision == Decision::StopFutility) ++futility_ia1;
    ++n1;
  }
  c.expect(n1 == config.n_trials, "every trial conducts the first interim");
  const double mean = sum / n1;
  const double var = sumsq / n1 - mean * mean;
  const double se_mean = 1.0 / std::sqrt(double(n1));
  const double se_var = std::sqrt(2.0 / double(n1));
  c.detail << "[z mean " << mean << ", var " << var << ", futility@IA1 "
           << double(futility_ia1) / n1 << "] ";
  c.near(mean, 0.0, 3.0 * se_mean + 0.01, "null z mean at IA1");
  c.near(var, 1.0, 3.0 * se_var + 0.02, "null z variance at IA1");
  const double p = double(futility_ia1) / n1;
  c.near(p, 0.5, 3.0 * std::sqrt(0.25 / n1) + 0.01, "futility probability at IA1");
  return c.ok;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<bool(Check&)> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "fixed-design calibration", 1.0, criterion1},
      {2, "boundary table reproduction", 5.0, criterion2},
      {3, "timing prediction", 1.0, criterion3},
      {4, "over-/underrunning recalculation", 1.0, criterion4},
      {5, "futility power loss (analytic + 1e5-trial simulation)", 120.0, criterion5},
      {6, "adjusted inference after an early stop", 5.0, criterion6},
      {7, "type-I preservation under information perturbation", 300.0, criterion7},
      {8, "designation state machine", 60.0, criterion8},
      {9, "distributional stand-ins for single-draw values", 120.0, criterion9},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = criterion.fn(check);
    } catch (const std::exception& e) {
      check.ok = false;
      check.detail << "exception: " << e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > criterion.limit_seconds) {
      ok = false;
      check.detail << (check.detail.str().empty() ? "" : "; ") << "runtime "
                   << seconds << "s exceeds " << criterion.limit_seconds << "s";
    }
    std::printf("criterion %d (%s): %s (%.1fs)%s%s\n", criterion.id, criterion.name,
                ok && check.ok ? "PASS" : "FAIL", seconds,
                check.detail.str().empty() ? "" : " ", check.detail.str().c_str());
    if (!(ok && check.ok)) ++failures;
  }
  return failures;
}
