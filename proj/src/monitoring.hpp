#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "design.hpp"

namespace gsd {

enum class Decision { Continue, StopFutility, StopEfficacy, ReachPrimary };

enum class HypothesisState { Open, Rejected, RetainedAtPrimary, AbandonedFutility };

enum class ReportingLabel {
  FutilityAnalysis,
  ConfirmatoryAnalysis,
  UpdatedAnalysis,
  NotConducted,
};

std::string to_string(Decision d);
std::string to_string(HypothesisState s);
std::string to_string(ReportingLabel l);
Decision decision_from_string(const std::string& s);
HypothesisState hypothesis_state_from_string(const std::string& s);
ReportingLabel reporting_label_from_string(const std::string& s);

struct RecalculatedBounds {
  double alpha_one_sided = 0.0;  // nominal level at this analysis
  double z_bound = 0.0;
  double hr_bound = 0.0;
};

struct ObservedAnalysis {
  std::string label;
  std::string ccod;  // ISO-8601 date
  std::string ssd;
  int observed_events = 0;
  double observed_z = 0.0;  // canonical storage; HR derived on demand
  std::optional<RecalculatedBounds> recalculated;
  Decision decision = Decision::Continue;
  bool rejected = false;             // sub-flag, primary analysis only
  bool futility_recommended = false; // non-binding recommendation
  bool futility_overruled = false;
};

// Reporting-stage names per conducted/skipped analysis. Keys are plan labels
// plus "Updated analysis" for the post-confirmatory update.
struct Designation {
  std::vector<std::pair<std::string, ReportingLabel>> labels;
  std::optional<std::string> decisive;

  const ReportingLabel* find(const std::string& label) const;
};

// Frozen history of an efficacy look actually conducted.
struct ConductedEfficacyLook {
  int observed_events = 0;
  double z_bound = 0.0;  // the bound actually used
};

// Re-solves the spending boundary at an interim efficacy look conducted at an
// observed (over-/underrun) event count. Earlier conducted looks stay frozen.
RecalculatedBounds recalc_interim_level(
    const BoundaryTable& table, const DesignSpec& spec,
    const std::string& plan_label, int observed_events,
    const std::vector<ConductedEfficacyLook>& earlier);

// Final-analysis bound given the alpha actually spent at frozen earlier looks.
RecalculatedBounds recalc_primary_level(
    const BoundaryTable& table, const DesignSpec& spec,
    const std::vector<ConductedEfficacyLook>& conducted, int observed_final_events);

struct DecisionResult {
  Decision decision = Decision::Continue;
  bool rejected = false;
  bool futility_recommended = false;
};

DecisionResult evaluate_decision(const BoundaryTable& table, const DesignSpec& spec,
                                 const RecalculatedBounds* bounds,
                                 double observed_hr, int observed_events,
                                 const std::string& plan_label);

struct TrialCourse {
  DesignSpec spec;
  BoundaryTable table;
  std::vector<ObservedAnalysis> analyses;
  HypothesisState hypothesis_state = HypothesisState::Open;
  std::optional<Designation> designations;

  // Appends an observed analysis: recalculates bounds where needed, evaluates
  // the decision, updates the hypothesis state and designations. The observed
  // effect may come in on either scale.
  struct Record {
    std::string label;
    std::string ccod;
    std::string ssd;
    int observed_events = 0;
    std::optional<double> observed_hr;
    std::optional<double> observed_z;
    bool overrule_futility = false;
  };
  const ObservedAnalysis& record_analysis(const Record& rec);

  bool complete() const { return hypothesis_state != HypothesisState::Open; }
  std::vector<ConductedEfficacyLook> conducted_efficacy_looks() const;

  std::string to_json() const;
  static TrialCourse from_json(const std::string& text);
};

Designation designate(const TrialCourse& course, bool allow_partial = false);

Designation mark_decisive(Designation designation, const std::string& label);

}  // namespace gsd
