#include "sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "dates.hpp"

namespace gsd {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix(splitmix(seed) ^ stream)) {}

double CounterRng::uniform(std::uint64_t counter) const {
  const std::uint64_t h = splitmix(splitmix(key_ ^ counter));
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
  return norm_quantile(uniform(counter));
}

double CounterRng::exponential(std::uint64_t counter, double rate) const {
  return -std::log(uniform(counter)) / rate;
}

void SimConfig::validate() const {
  model.validate();
  spec.validate();
  if (!(hr_true > 0.0)) throw std::invalid_argument("SimConfig: hr_true must be positive");
  if (n_trials < 1) throw std::invalid_argument("SimConfig: n_trials must be >= 1");
  if (!(overrun_fraction >= 0.0 && overrun_fraction < 0.25)) {
    throw std::invalid_argument("SimConfig: overrun_fraction must lie in [0, 0.25)");
  }
}

namespace {

struct Patient {
  double entry = 0.0;
  double t_event = 0.0;   // time from entry to event, ignoring dropout
  double t_dropout = 0.0;
  bool experimental = false;
};

// Inverse-CDF entry draw over the piecewise-constant accrual schedule.
double draw_entry(const TrialModel& model, double u) {
  double total = 0.0;
  for (const auto& p : model.accrual) total += p.rate * p.duration;
  double target = u * total;
  double t0 = 0.0;
  for (const auto& p : model.accrual) {
    const double mass = p.rate * p.duration;
    if (target <= mass || &p == &model.accrual.back()) {
      return t0 + (mass > 0.0 ? target / p.rate : 0.0);
    }
    target -= mass;
    t0 += p.duration;
  }
  return t0;
}

// Log-rank score z with positive values favoring the experimental arm.
double logrank_z(std::vector<std::pair<double, int>>& rows, long n_exp, long n_all) {
  // rows: (time, code) with code 0 censored-control, 1 event-control,
  //       2 censored-experimental, 3 event-experimental
  std::sort(rows.begin(), rows.end());
  double U = 0.0, V = 0.0;
  long at_risk = n_all, at_risk_exp = n_exp;
  std::size_t i = 0;
  while (i < rows.size()) {
    const double t = rows[i].first;
    long d = 0, d_exp = 0, removed = 0, removed_exp = 0;
    while (i < rows.size() && rows[i].first == t) {
      const int code = rows[i].second;
      if (code & 1) {
        ++d;
        if (code & 2) ++d_exp;
      }
      ++removed;
      if (code & 2) ++removed_exp;
      ++i;
    }
    if (d > 0 && at_risk > 1) {
      const double frac = double(at_risk_exp) / at_risk;
      U += d_exp - d * frac;
      V += d * frac * (1.0 - frac) * double(at_risk - d) / double(at_risk - 1);
    }
    at_risk -= removed;
    at_risk_exp -= removed_exp;
  }
  if (V <= 0.0) return 0.0;
  return -U / std::sqrt(V);  // fewer experimental events => positive z
}

// The recalculated bounds at a look are a pure function of the design and the
// event counts observed so far, so trials can share the (expensive) solves.
// Key: {row index, observed d, earlier efficacy-look event counts...}.
class BoundsCache {
 public:
  RecalculatedBounds get(const std::vector<int>& key,
                         const std::function<RecalculatedBounds()>& compute) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (auto it = map_.find(key); it != map_.end()) return it->second;
    }
    RecalculatedBounds bounds = compute();
    std::lock_guard<std::mutex> lock(mutex_);
    return map_.emplace(key, bounds).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::vector<int>, RecalculatedBounds> map_;
};

SimOutcome simulate_trial_impl(const SimConfig& config, long trial_index,
                               BoundsCache* cache);

}  // namespace

SimOutcome simulate_trial(const SimConfig& config, long trial_index) {
  return simulate_trial_impl(config, trial_index, nullptr);
}

namespace {

SimOutcome simulate_trial_impl(const SimConfig& config, long trial_index,
                               BoundsCache* cache) {
  const TrialModel& model = config.model;
  const CounterRng rng(config.seed, static_cast<std::uint64_t>(trial_index));
  const double frac_exp = model.allocation_ratio / (1.0 + model.allocation_ratio);
  const double lam_c = model.hazard_control();
  const double lam_e = lam_c * config.hr_true;
  const double eta = model.dropout_hazard();

  std::vector<Patient> patients(static_cast<std::size_t>(model.n_total));
  std::vector<std::pair<double, std::size_t>> event_times;  // calendar time, index
  for (std::size_t i = 0; i < patients.size(); ++i) {
    const std::uint64_t base = 4 * static_cast<std::uint64_t>(i);
    Patient& p = patients[i];
    p.experimental = rng.uniform(base) < frac_exp;
    p.entry = draw_entry(model, rng.uniform(base + 1));
    p.t_event = rng.exponential(base + 2, p.experimental ? lam_e : lam_c);
    p.t_dropout = eta > 0.0 ? rng.exponential(base + 3, eta) : kPosInf;
    if (p.t_event < p.t_dropout) event_times.emplace_back(p.entry + p.t_event, i);
  }
  std::sort(event_times.begin(), event_times.end());
  const long total_events = static_cast<long>(event_times.size());

  SimOutcome out;
  std::vector<ConductedEfficacyLook> earlier;
  int prev_events = 0;
  const std::uint64_t perturb_base = 1ULL << 40;

  for (std::size_t k = 0; k < config.table.rows.size(); ++k) {
    const BoundaryRow& row = config.table.rows[k];
    const AnalysisPlan& plan = config.spec.analyses[k];
    const bool is_primary = k + 1 == config.table.rows.size();

    long d_obs = row.target_events;
    if (config.overrun_fraction > 0.0) {
      const double u = rng.uniform(perturb_base + k);
      d_obs = std::lround(row.target_events *
                          (1.0 + config.overrun_fraction * (2.0 * u - 1.0)));
    }
    d_obs = std::min(d_obs, total_events);
    d_obs = std::max<long>(d_obs, prev_events + 1);
    if (d_obs > total_events) break;  // event pool exhausted

    const double ccod = event_times[static_cast<std::size_t>(d_obs - 1)].first;

    // Dataset as seen at the CCOD.
    std::vector<std::pair<double, int>> rows_at_ccod;
    long n_exp = 0, n_all = 0;
    for (const Patient& p : patients) {
      if (p.entry > ccod) continue;
      const double admin = ccod - p.entry;
      const double t = std::min({p.t_event, p.t_dropout, admin});
      const bool event = p.t_event <= p.t_dropout && p.t_event <= admin;
      rows_at_ccod.emplace_back(t, (event ? 1 : 0) | (p.experimental ? 2 : 0));
      ++n_all;
      if (p.experimental) ++n_exp;
    }
    const double z = logrank_z(rows_at_ccod, n_exp, n_all);
    const int d = static_cast<int>(d_obs);
    const double hr = z_to_hr(z, d, config.spec.allocation_ratio);

    ConductedLook look;
    look.label = row.label;
    look.events = d;
    look.z = z;
    look.hr = hr;
    look.month = ccod;

    // Planned bounds apply when the look lands on target; otherwise recalculate.
    const bool on_target = d == row.target_events;
    RecalculatedBounds bounds;
    bool have_bounds = false;
    if (plan.efficacy) {
      auto solve = [&]() -> RecalculatedBounds {
        if (is_primary) {
          return recalc_primary_level(config.table, config.spec, earlier, d);
        }
        if (on_target && earlier.empty() && config.overrun_fraction == 0.0) {
          return {*row.nominal_level_one_sided, *row.efficacy_z, *row.efficacy_hr};
        }
        return recalc_interim_level(config.table, config.spec, row.label, d, earlier);
      };
      if (cache) {
        std::vector<int> key{static_cast<int>(k), d};
        for (const auto& look : earlier) key.push_back(look.observed_events);
        bounds = cache->get(key, solve);
      } else {
        bounds = solve();
      }
      have_bounds = true;
      look.recalculated = bounds;
    }

    Decision decision = Decision::Continue;
    bool rejected = false;
    if (have_bounds && !is_primary && z >= bounds.z_bound) {
      decision = Decision::StopEfficacy;
      rejected = true;
    } else if (!is_primary && plan.futility_hr && hr >= *plan.futility_hr) {
      decision = config.honor_futility ? Decision::StopFutility : Decision::Continue;
    } else if (is_primary) {
      decision = Decision::ReachPrimary;
      rejected = z >= bounds.z_bound;
    }
    look.decision = decision;
    out.looks.push_back(look);

    if (decision != Decision::Continue) {
      out.stop_label = row.label;
      out.decision = decision;
      out.rejected = rejected;
      out.events = d;
      out.duration_months = ccod;
      return out;
    }
    if (plan.efficacy && !is_primary) earlier.push_back({d, bounds.z_bound});
    prev_events = d;
  }

  // Event pool exhausted before the primary target: analyze what is there.
  if (out.looks.empty()) {
    out.decision = Decision::Continue;
    return out;
  }
  const ConductedLook& last = out.looks.back();
  out.stop_label = last.label;
  out.decision = Decision::ReachPrimary;
  out.rejected = false;
  out.events = last.events;
  out.duration_months = last.month;
  return out;
}

}  // namespace

std::vector<SimOutcome> simulate_all(const SimConfig& config) {
  config.validate();
  std::vector<SimOutcome> outcomes(static_cast<std::size_t>(config.n_trials));
  BoundsCache cache;
  int workers = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<long>(workers, config.n_trials);
  if (workers <= 1) {
    for (long i = 0; i < config.n_trials; ++i) {
      outcomes[i] = simulate_trial_impl(config, i, &cache);
    }
    return outcomes;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (long i = w; i < config.n_trials; i += workers) {
        outcomes[static_cast<std::size_t>(i)] = simulate_trial_impl(config, i, &cache);
      }
    });
  }
  for (auto& t : pool) t.join();
  return outcomes;
}

OperatingCharacteristics aggregate(const std::vector<SimOutcome>& outcomes) {
  OperatingCharacteristics oc;
  oc.n_trials = static_cast<long>(outcomes.size());
  if (oc.n_trials == 0) return oc;
  long rejections = 0;
  std::map<std::string, long> futility;
  double sum_events = 0.0, sum_duration = 0.0;
  for (const auto& o : outcomes) {
    if (o.rejected) ++rejections;
    if (o.decision == Decision::StopFutility) ++futility[o.stop_label];
    sum_events += o.events;
    sum_duration += o.duration_months;
  }
  const double n = static_cast<double>(oc.n_trials);
  oc.rejection = rejections / n;
  oc.rejection_se = std::sqrt(oc.rejection * (1.0 - oc.rejection) / n);
  for (const auto& [label, count] : futility) {
    oc.futility_stop_prob[label] = count / n;
  }
  oc.expected_events = sum_events / n;
  oc.expected_duration = sum_duration / n;
  return oc;
}

OperatingCharacteristics operating_characteristics(const SimConfig& config) {
  return aggregate(simulate_all(config));
}

TrialCourse replay_report(const SimConfig& config, const SimOutcome& outcome,
                          const std::optional<std::string>& first_patient_in) {
  TrialCourse course;
  course.spec = config.spec;
  course.table = config.table;
  const double lag_months = config.ssd_lag_weeks * 7.0 * 12.0 / 365.25;
  for (const auto& look : outcome.looks) {
    TrialCourse::Record rec;
    rec.label = look.label;
    rec.observed_events = look.events;
    rec.observed_z = look.z;
    rec.overrule_futility = !config.honor_futility;
    if (first_patient_in) {
      rec.ccod = date_after_months(*first_patient_in, look.month);
      rec.ssd = date_after_months(*first_patient_in, look.month + lag_months);
    }
    course.record_analysis(rec);
  }
  return course;
}

}  // namespace gsd
