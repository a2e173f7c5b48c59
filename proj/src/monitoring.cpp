#include "monitoring.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "errors.hpp"

namespace gsd {

using nlohmann::json;

std::string to_string(Decision d) {
  switch (d) {
    case Decision::Continue: return "continue";
    case Decision::StopFutility: return "stop_futility";
    case Decision::StopEfficacy: return "stop_efficacy";
    case Decision::ReachPrimary: return "reach_primary";
  }
  return "continue";
}

std::string to_string(HypothesisState s) {
  switch (s) {
    case HypothesisState::Open: return "open";
    case HypothesisState::Rejected: return "rejected";
    case HypothesisState::RetainedAtPrimary: return "retained_at_primary";
    case HypothesisState::AbandonedFutility: return "abandoned_futility";
  }
  return "open";
}

std::string to_string(ReportingLabel l) {
  switch (l) {
    case ReportingLabel::FutilityAnalysis: return "futility_analysis";
    case ReportingLabel::ConfirmatoryAnalysis: return "confirmatory_analysis";
    case ReportingLabel::UpdatedAnalysis: return "updated_analysis";
    case ReportingLabel::NotConducted: return "not_conducted";
  }
  return "not_conducted";
}

Decision decision_from_string(const std::string& s) {
  if (s == "continue") return Decision::Continue;
  if (s == "stop_futility") return Decision::StopFutility;
  if (s == "stop_efficacy") return Decision::StopEfficacy;
  if (s == "reach_primary") return Decision::ReachPrimary;
  throw std::invalid_argument("unknown decision: " + s);
}

HypothesisState hypothesis_state_from_string(const std::string& s) {
  if (s == "open") return HypothesisState::Open;
  if (s == "rejected") return HypothesisState::Rejected;
  if (s == "retained_at_primary") return HypothesisState::RetainedAtPrimary;
  if (s == "abandoned_futility") return HypothesisState::AbandonedFutility;
  throw std::invalid_argument("unknown hypothesis state: " + s);
}

ReportingLabel reporting_label_from_string(const std::string& s) {
  if (s == "futility_analysis") return ReportingLabel::FutilityAnalysis;
  if (s == "confirmatory_analysis") return ReportingLabel::ConfirmatoryAnalysis;
  if (s == "updated_analysis") return ReportingLabel::UpdatedAnalysis;
  if (s == "not_conducted") return ReportingLabel::NotConducted;
  throw std::invalid_argument("unknown reporting label: " + s);
}

const ReportingLabel* Designation::find(const std::string& label) const {
  for (const auto& [l, r] : labels) {
    if (l == label) return &r;
  }
  return nullptr;
}

namespace {

const BoundaryRow& row_for(const BoundaryTable& table, const std::string& label) {
  for (const auto& row : table.rows) {
    if (row.label == label) return row;
  }
  throw std::invalid_argument("unknown plan label: " + label);
}

std::size_t plan_index(const DesignSpec& spec, const std::string& label) {
  for (std::size_t i = 0; i < spec.analyses.size(); ++i) {
    if (spec.analyses[i].label == label) return i;
  }
  throw std::invalid_argument("unknown plan label: " + label);
}

constexpr const char* kUpdatedLabel = "Updated analysis";

}  // namespace

RecalculatedBounds recalc_interim_level(
    const BoundaryTable& table, const DesignSpec& spec,
    const std::string& plan_label, int observed_events,
    const std::vector<ConductedEfficacyLook>& earlier) {
  const BoundaryRow& row = row_for(table, plan_label);
  if (!row.efficacy_z) {
    throw std::invalid_argument("recalc_interim_level: not an efficacy analysis");
  }
  if (observed_events >= table.max_events) {
    throw ContractViolation(
        "recalc_interim_level: observed events reach the maximum; this is the "
        "primary analysis");
  }
  if (!earlier.empty() && observed_events <= earlier.back().observed_events) {
    throw std::invalid_argument(
        "recalc_interim_level: information must increase between looks");
  }
  const double t_obs = double(observed_events) / table.max_events;
  const double target = spend(t_obs, spec.alpha_one_sided);

  double z;
  if (earlier.empty()) {
    z = norm_quantile(1.0 - target);
  } else {
    ContinuationRegion region;
    for (const auto& look : earlier) {
      region.info.push_back(look.observed_events);
      region.lower.push_back(kNegInf);
      region.upper.push_back(look.z_bound);
    }
    region.info.push_back(observed_events);
    region.lower.push_back(kNegInf);
    region.upper.push_back(0.0);
    const std::size_t k = region.stages() - 1;
    z = find_root(
        [&](double zk) {
          region.upper[k] = zk;
          return exit_probabilities(region, DriftParameter{0.0}).total_upper() - target;
        },
        0.0, 10.0, 1e-10);
  }
  return {norm_sf(z), z, z_to_hr(z, observed_events, spec.allocation_ratio)};
}

RecalculatedBounds recalc_primary_level(
    const BoundaryTable& table, const DesignSpec& spec,
    const std::vector<ConductedEfficacyLook>& conducted, int observed_final_events) {
  if (!conducted.empty() && observed_final_events <= conducted.back().observed_events) {
    throw ContractViolation(
        "recalc_primary_level: final event count must exceed the last interim's");
  }
  double z;
  if (conducted.empty()) {
    z = norm_quantile(1.0 - spec.alpha_one_sided);
  } else {
    // Earlier bounds are frozen; only the final bound is solved.
    ContinuationRegion region;
    for (const auto& look : conducted) {
      region.info.push_back(look.observed_events);
      region.lower.push_back(kNegInf);
      region.upper.push_back(look.z_bound);
    }
    region.info.push_back(observed_final_events);
    region.lower.push_back(kNegInf);
    region.upper.push_back(0.0);
    const std::size_t k = region.stages() - 1;
    z = find_root(
        [&](double zk) {
          region.upper[k] = zk;
          return exit_probabilities(region, DriftParameter{0.0}).total_upper() -
                 spec.alpha_one_sided;
        },
        -2.0, 10.0, 1e-10);
  }
  return {norm_sf(z), z, z_to_hr(z, observed_final_events, spec.allocation_ratio)};
}

DecisionResult evaluate_decision(const BoundaryTable& table, const DesignSpec& spec,
                                 const RecalculatedBounds* bounds,
                                 double observed_hr, int observed_events,
                                 const std::string& plan_label) {
  const std::size_t idx = plan_index(spec, plan_label);
  const AnalysisPlan& plan = spec.analyses[idx];
  const BoundaryRow& row = row_for(table, plan_label);
  const bool is_primary = idx + 1 == spec.analyses.size();
  const double z_obs = hr_to_z(observed_hr, observed_events, spec.allocation_ratio);

  DecisionResult res;
  if (plan.efficacy) {
    const double z_bound = bounds ? bounds->z_bound : *row.efficacy_z;
    if (is_primary) {
      res.decision = Decision::ReachPrimary;
      res.rejected = z_obs >= z_bound;
      return res;
    }
    if (z_obs >= z_bound) {
      res.decision = Decision::StopEfficacy;
      res.rejected = true;
      return res;
    }
  }
  if (plan.futility_hr && observed_hr >= *plan.futility_hr) {
    res.decision = Decision::StopFutility;  // non-binding recommendation
    res.futility_recommended = true;
    return res;
  }
  res.decision = is_primary ? Decision::ReachPrimary : Decision::Continue;
  return res;
}

std::vector<ConductedEfficacyLook> TrialCourse::conducted_efficacy_looks() const {
  std::vector<ConductedEfficacyLook> looks;
  for (const auto& a : analyses) {
    if (a.label == kUpdatedLabel) continue;
    const std::size_t idx = plan_index(spec, a.label);
    if (!spec.analyses[idx].efficacy || idx + 1 == spec.analyses.size()) continue;
    if (!a.recalculated) continue;
    looks.push_back({a.observed_events, a.recalculated->z_bound});
  }
  return looks;
}

const ObservedAnalysis& TrialCourse::record_analysis(const Record& rec) {
  if (!rec.ssd.empty() && !rec.ccod.empty() && rec.ssd < rec.ccod) {
    throw std::invalid_argument("record_analysis: SSD must not precede CCOD");
  }
  if (rec.observed_events <= 0) {
    throw std::invalid_argument("record_analysis: observed events must be positive");
  }

  ObservedAnalysis obs;
  obs.label = rec.label;
  obs.ccod = rec.ccod;
  obs.ssd = rec.ssd;
  obs.observed_events = rec.observed_events;
  if (rec.observed_z) {
    obs.observed_z = *rec.observed_z;
  } else if (rec.observed_hr) {
    obs.observed_z = hr_to_z(*rec.observed_hr, rec.observed_events, spec.allocation_ratio);
  } else {
    throw std::invalid_argument("record_analysis: observed HR or z required");
  }
  const double observed_hr =
      z_to_hr(obs.observed_z, obs.observed_events, spec.allocation_ratio);

  // Post-decision updates serve estimation only; no hypothesis is evaluated.
  const bool closed = hypothesis_state != HypothesisState::Open;
  if (rec.label == kUpdatedLabel ||
      (closed && hypothesis_state == HypothesisState::AbandonedFutility)) {
    if (!closed) {
      throw ContractViolation("record_analysis: updated analysis before any decision");
    }
    obs.decision = Decision::Continue;
    analyses.push_back(std::move(obs));
    designations = designate(*this, true);
    return analyses.back();
  }
  if (closed) {
    throw ContractViolation(
        "record_analysis: the null hypothesis can only be rejected once; no "
        "further efficacy evaluation is permitted");
  }

  const std::size_t idx = plan_index(spec, rec.label);
  if (!analyses.empty()) {
    const auto& last = analyses.back();
    if (last.label != kUpdatedLabel && plan_index(spec, last.label) >= idx) {
      throw ContractViolation("record_analysis: analyses must be recorded in plan order");
    }
    if (rec.observed_events <= last.observed_events) {
      throw std::invalid_argument("record_analysis: information must increase");
    }
  }

  const AnalysisPlan& plan = spec.analyses[idx];
  const bool is_primary = idx + 1 == spec.analyses.size();
  const auto earlier = conducted_efficacy_looks();

  if (is_primary) {
    // Delaying the primary past its target after a failed interim amounts to a
    // sample-size re-estimation and would inflate the type I error.
    if (rec.observed_events > (table.max_events * 5) / 4) {
      throw ContractViolation(
          "record_analysis: primary analysis delayed far beyond its target event "
          "count; this is a sample-size re-estimation and inflates the type I "
          "error");
    }
    obs.recalculated = recalc_primary_level(table, spec, earlier, rec.observed_events);
  } else if (plan.efficacy) {
    obs.recalculated = recalc_interim_level(table, spec, rec.label,
                                            rec.observed_events, earlier);
  }

  auto res = evaluate_decision(table, spec,
                               obs.recalculated ? &*obs.recalculated : nullptr,
                               observed_hr, rec.observed_events, rec.label);
  obs.futility_recommended = res.futility_recommended ||
                             (res.decision == Decision::StopFutility);
  if (res.decision == Decision::StopFutility && rec.overrule_futility) {
    res.decision = Decision::Continue;  // recommendation overruled, course stays open
    obs.futility_overruled = true;
  }
  obs.decision = res.decision;
  obs.rejected = res.rejected;

  switch (obs.decision) {
    case Decision::StopEfficacy:
      hypothesis_state = HypothesisState::Rejected;
      break;
    case Decision::StopFutility:
      hypothesis_state = HypothesisState::AbandonedFutility;
      break;
    case Decision::ReachPrimary:
      hypothesis_state = obs.rejected ? HypothesisState::Rejected
                                      : HypothesisState::RetainedAtPrimary;
      break;
    case Decision::Continue:
      break;
  }

  analyses.push_back(std::move(obs));
  designations = designate(*this, true);
  return analyses.back();
}

Designation designate(const TrialCourse& course, bool allow_partial) {
  if (!course.complete() && !allow_partial) {
    throw ContractViolation("designate: course is still open");
  }
  Designation d;
  if (!course.complete()) return d;  // partial: no reporting-stage names yet

  const auto& plans = course.spec.analyses;
  const std::string primary_label = plans.back().label;

  // Locate the stopping analysis among the recorded ones.
  const ObservedAnalysis* stop = nullptr;
  for (const auto& a : course.analyses) {
    if (a.decision == Decision::StopEfficacy || a.decision == Decision::StopFutility ||
        a.decision == Decision::ReachPrimary) {
      stop = &a;
      break;
    }
  }
  if (!stop) return d;

  const std::size_t stop_idx =
      stop->label == kUpdatedLabel ? plans.size() : plan_index(course.spec, stop->label);

  if (stop->decision == Decision::StopFutility) {
    d.labels.emplace_back(stop->label, ReportingLabel::FutilityAnalysis);
    for (std::size_t j = stop_idx + 1; j + 1 < plans.size(); ++j) {
      d.labels.emplace_back(plans[j].label, ReportingLabel::NotConducted);
    }
    // An analysis at the primary's timing is still run, for estimation only.
    d.labels.emplace_back(primary_label, ReportingLabel::UpdatedAnalysis);
    d.labels.emplace_back(kUpdatedLabel, ReportingLabel::NotConducted);
  } else if (stop->decision == Decision::StopEfficacy) {
    d.labels.emplace_back(stop->label, ReportingLabel::ConfirmatoryAnalysis);
    for (std::size_t j = stop_idx + 1; j < plans.size(); ++j) {
      d.labels.emplace_back(plans[j].label, ReportingLabel::NotConducted);
    }
    d.labels.emplace_back(kUpdatedLabel, ReportingLabel::UpdatedAnalysis);
    d.decisive = stop->label;
  } else {  // reached the primary analysis, either outcome
    d.labels.emplace_back(primary_label, ReportingLabel::ConfirmatoryAnalysis);
    d.labels.emplace_back(kUpdatedLabel, ReportingLabel::UpdatedAnalysis);
    d.decisive = primary_label;
  }
  return d;
}

Designation mark_decisive(Designation designation, const std::string& label) {
  const ReportingLabel* l = designation.find(label);
  if (!l) throw std::invalid_argument("mark_decisive: unknown analysis: " + label);
  if (*l != ReportingLabel::ConfirmatoryAnalysis &&
      *l != ReportingLabel::UpdatedAnalysis) {
    throw std::invalid_argument(
        "mark_decisive: only a conducted confirmatory or updated analysis can be "
        "decisive");
  }
  designation.decisive = label;
  return designation;
}

// ---------------------------------------------------------------------------
// JSON persistence

namespace {

json spec_to_json(const DesignSpec& spec) {
  json analyses = json::array();
  for (const auto& a : spec.analyses) {
    json ja{{"label", a.label},
            {"information_fraction", a.information_fraction},
            {"efficacy", a.efficacy}};
    if (a.futility_hr) ja["futility_hr"] = *a.futility_hr;
    analyses.push_back(std::move(ja));
  }
  return json{{"alpha_one_sided", spec.alpha_one_sided},
              {"power", spec.power_target},
              {"hr_alternative", spec.hr_alternative},
              {"allocation_ratio", spec.allocation_ratio},
              {"spending", "lan-demets-obf"},
              {"binding_futility", spec.binding_futility},
              {"analyses", std::move(analyses)}};
}

DesignSpec spec_from_json(const json& j) {
  DesignSpec spec;
  spec.alpha_one_sided = j.at("alpha_one_sided").get<double>();
  spec.power_target = j.at("power").get<double>();
  spec.hr_alternative = j.at("hr_alternative").get<double>();
  spec.allocation_ratio = j.value("allocation_ratio", 1.0);
  spec.binding_futility = j.value("binding_futility", false);
  for (const auto& ja : j.at("analyses")) {
    AnalysisPlan plan;
    plan.label = ja.at("label").get<std::string>();
    plan.information_fraction = ja.at("information_fraction").get<double>();
    plan.efficacy = ja.at("efficacy").get<bool>();
    if (ja.contains("futility_hr")) plan.futility_hr = ja["futility_hr"].get<double>();
    spec.analyses.push_back(std::move(plan));
  }
  spec.validate();
  return spec;
}

json table_to_json(const BoundaryTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    json jr{{"label", r.label},
            {"information_fraction", r.information_fraction},
            {"target_events", r.target_events},
            {"cumulative_alpha", r.cumulative_alpha}};
    if (r.nominal_level_one_sided) jr["nominal_level_one_sided"] = *r.nominal_level_one_sided;
    if (r.efficacy_z) jr["efficacy_z"] = *r.efficacy_z;
    if (r.efficacy_hr) jr["efficacy_hr"] = *r.efficacy_hr;
    if (r.futility_hr) jr["futility_hr"] = *r.futility_hr;
    if (r.futility_z) jr["futility_z"] = *r.futility_z;
    rows.push_back(std::move(jr));
  }
  return json{{"max_events", table.max_events}, {"rows", std::move(rows)}};
}

BoundaryTable table_from_json(const json& j) {
  BoundaryTable table;
  table.max_events = j.at("max_events").get<int>();
  for (const auto& jr : j.at("rows")) {
    BoundaryRow r;
    r.label = jr.at("label").get<std::string>();
    r.information_fraction = jr.at("information_fraction").get<double>();
    r.target_events = jr.at("target_events").get<int>();
    r.cumulative_alpha = jr.value("cumulative_alpha", 0.0);
    if (jr.contains("nominal_level_one_sided"))
      r.nominal_level_one_sided = jr["nominal_level_one_sided"].get<double>();
    if (jr.contains("efficacy_z")) r.efficacy_z = jr["efficacy_z"].get<double>();
    if (jr.contains("efficacy_hr")) r.efficacy_hr = jr["efficacy_hr"].get<double>();
    if (jr.contains("futility_hr")) r.futility_hr = jr["futility_hr"].get<double>();
    if (jr.contains("futility_z")) r.futility_z = jr["futility_z"].get<double>();
    table.rows.push_back(std::move(r));
  }
  return table;
}

}  // namespace

std::string TrialCourse::to_json() const {
  json janalyses = json::array();
  for (const auto& a : analyses) {
    json ja{{"label", a.label},
            {"ccod", a.ccod},
            {"ssd", a.ssd},
            {"observed_events", a.observed_events},
            {"observed_hr", z_to_hr(a.observed_z, a.observed_events, spec.allocation_ratio)},
            {"observed_z", a.observed_z},
            {"decision", gsd::to_string(a.decision)}};
    if (a.recalculated) {
      ja["recalculated"] = json{{"alpha_1sided", a.recalculated->alpha_one_sided},
                                {"z", a.recalculated->z_bound},
                                {"hr", a.recalculated->hr_bound}};
    }
    if (a.rejected) ja["rejected"] = true;
    if (a.futility_recommended) ja["futility_recommended"] = true;
    if (a.futility_overruled) ja["futility_overruled"] = true;
    janalyses.push_back(std::move(ja));
  }
  json jdes;
  if (designations) {
    jdes = json::object();
    for (const auto& [label, rl] : designations->labels) jdes[label] = gsd::to_string(rl);
    if (designations->decisive) jdes["decisive"] = *designations->decisive;
  }
  json doc{{"design", spec_to_json(spec)},
           {"boundary_table", table_to_json(table)},
           {"analyses", std::move(janalyses)},
           {"hypothesis_state", gsd::to_string(hypothesis_state)},
           {"designations", std::move(jdes)}};
  return doc.dump(2) + "\n";
}

TrialCourse TrialCourse::from_json(const std::string& text) {
  json doc = json::parse(text);
  TrialCourse course;
  course.spec = spec_from_json(doc.at("design"));
  course.table = table_from_json(doc.at("boundary_table"));
  course.hypothesis_state =
      hypothesis_state_from_string(doc.at("hypothesis_state").get<std::string>());
  for (const auto& ja : doc.at("analyses")) {
    ObservedAnalysis a;
    a.label = ja.at("label").get<std::string>();
    a.ccod = ja.value("ccod", "");
    a.ssd = ja.value("ssd", "");
    a.observed_events = ja.at("observed_events").get<int>();
    if (ja.contains("observed_z")) {
      a.observed_z = ja["observed_z"].get<double>();
    } else {
      a.observed_z = hr_to_z(ja.at("observed_hr").get<double>(), a.observed_events,
                             course.spec.allocation_ratio);
    }
    a.decision = decision_from_string(ja.at("decision").get<std::string>());
    if (ja.contains("recalculated")) {
      const auto& jr = ja["recalculated"];
      a.recalculated = RecalculatedBounds{jr.at("alpha_1sided").get<double>(),
                                          jr.at("z").get<double>(),
                                          jr.at("hr").get<double>()};
    }
    a.rejected = ja.value("rejected", false);
    a.futility_recommended = ja.value("futility_recommended", false);
    a.futility_overruled = ja.value("futility_overruled", false);
    course.analyses.push_back(std::move(a));
  }
  if (doc.contains("designations") && doc["designations"].is_object()) {
    Designation d;
    for (const auto& [key, val] : doc["designations"].items()) {
      if (key == "decisive") {
        d.decisive = val.get<std::string>();
      } else {
        d.labels.emplace_back(key, reporting_label_from_string(val.get<std::string>()));
      }
    }
    course.designations = std::move(d);
  }
  return course;
}

}  // namespace gsd
