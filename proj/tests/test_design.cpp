#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "design.hpp"

using namespace gsd;

namespace {

DesignSpec hypothetical_spec() {
  DesignSpec spec;
  spec.alpha_one_sided = 0.025;
  spec.power_target = 0.80;
  spec.hr_alternative = 0.75;
  spec.analyses = {
      {"IA1", 1.0 / 3.0, false, 1.0},
      {"IA2", 2.0 / 3.0, true, 0.9},
      {"Primary analysis", 1.0, true, std::nullopt},
  };
  return spec;
}

}  // namespace

TEST_CASE("spend reproduces the Lan-DeMets OBF values") {
  CHECK(spend(1.0, 0.025) == doctest::Approx(0.025).epsilon(1e-12));
  // interim efficacy level: two-sided 0.012 at t = 2/3
  CHECK(2.0 * spend(2.0 / 3.0, 0.025) == doctest::Approx(0.012).epsilon(0.02));
  // direct formula with the CDF: 2*(1 - Phi(z_{0.9875}/sqrt(0.5)))
  const double expect = 2.0 * (1.0 - norm_cdf(norm_quantile(0.9875) / std::sqrt(0.5)));
  CHECK(spend(0.5, 0.025) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(spend(0.5, 0.025) == doctest::Approx(0.001526).epsilon(0.01));
  CHECK_THROWS_AS(spend(0.0, 0.025), std::domain_error);
  CHECK_THROWS_AS(spend(1.1, 0.025), std::domain_error);
}

TEST_CASE("spend is strictly increasing in t") {
  double prev = 0.0;
  for (double t = 0.05; t <= 1.0; t += 0.05) {
    double s = spend(t, 0.025);
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("hr/z conversions follow the Schoenfeld scale") {
  CHECK(hr_to_z(1.0, 385) == doctest::Approx(0.0).epsilon(1e-14));
  // early-stop observed effect: -ln(0.689)*sqrt(255)/2
  CHECK(hr_to_z(0.689, 255) ==
        doctest::Approx(-std::log(0.689) * std::sqrt(255.0) / 2.0).epsilon(1e-12));
  CHECK(hr_to_z(0.689, 255) == doctest::Approx(2.9747).epsilon(1e-3));
  CHECK(hr_to_z(0.75, 385) == doctest::Approx(2.822).epsilon(1e-3));
  // hazard-ratio bounds at the efficacy looks
  CHECK(z_to_hr(2.512, 257) == doctest::Approx(0.731).epsilon(1e-3));
  CHECK(z_to_hr(1.995, 385) == doctest::Approx(0.816).epsilon(1e-3));
  CHECK(z_to_hr(0.0, 100) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(hr_to_z(-1.0, 100), std::domain_error);
  CHECK_THROWS_AS(z_to_hr(1.0, 0), std::domain_error);
}

TEST_CASE("z_to_hr and hr_to_z round-trip") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> hr(0.4, 1.6), ratio(0.5, 2.0);
  for (int i = 0; i < 50; ++i) {
    double h = hr(gen);
    double d = 50.0 + double(gen() % 500);
    double r = ratio(gen);
    CHECK(z_to_hr(hr_to_z(h, d, r), d, r) == doctest::Approx(h).epsilon(1e-12));
  }
}

TEST_CASE("fixed design events reproduce the Schoenfeld counts") {
  CHECK(fixed_design_events(0.025, 0.80, 0.75) == 380);
  // ceil(4 * (z_.975+z_.8)^2 / ln(0.5)^2)
  const double za = norm_quantile(0.975), zb = norm_quantile(0.8);
  const double lg = std::log(0.5);
  const int expect = int(std::ceil(4.0 * (za + zb) * (za + zb) / (lg * lg) - 1e-9));
  CHECK(fixed_design_events(0.025, 0.80, 0.5) == expect);
  CHECK(expect == 66);
  CHECK_THROWS_AS(fixed_design_events(0.025, 0.02, 0.75), std::invalid_argument);
  CHECK_THROWS_AS(fixed_design_events(0.025, 0.80, 1.0), std::invalid_argument);
}

TEST_CASE("minimal detectable difference") {
  CHECK(minimal_detectable_difference(380, 0.025) == doctest::Approx(0.8177).epsilon(6e-4));
  CHECK(minimal_detectable_difference(385, 0.023) == doctest::Approx(0.816).epsilon(1e-3));
  CHECK(minimal_detectable_difference(100'000'000, 0.025) == doctest::Approx(1.0).epsilon(1e-3));
  // tends to 1 from below as information grows
  double prev = 0.0;
  for (int d : {50, 200, 1000, 10000}) {
    double m = minimal_detectable_difference(d, 0.025);
    CHECK(m < 1.0);
    CHECK(m > prev);
    prev = m;
  }
}

TEST_CASE("compute_boundaries reproduces the hypothetical design table") {
  auto spec = hypothetical_spec();
  auto table = compute_boundaries(spec, 385);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].target_events == 129);
  CHECK(table.rows[1].target_events == 257);
  CHECK(table.rows[2].target_events == 385);
  CHECK_FALSE(table.rows[0].efficacy_z.has_value());
  CHECK(table.rows[0].futility_hr.value() == doctest::Approx(1.0));
  REQUIRE(table.rows[1].efficacy_z.has_value());
  CHECK(*table.rows[1].efficacy_z == doctest::Approx(2.512).epsilon(2e-3));
  CHECK(*table.rows[2].efficacy_z == doctest::Approx(1.995).epsilon(2e-3));
  CHECK(2.0 * *table.rows[1].nominal_level_one_sided == doctest::Approx(0.012).epsilon(0.04));
  CHECK(2.0 * *table.rows[2].nominal_level_one_sided == doctest::Approx(0.046).epsilon(0.02));
  CHECK(*table.rows[1].efficacy_hr == doctest::Approx(0.731).epsilon(1.4e-3));
  CHECK(*table.rows[2].efficacy_hr == doctest::Approx(0.816).epsilon(1.3e-3));
  CHECK(table.rows[2].cumulative_alpha == doctest::Approx(0.025).epsilon(1e-9));
}

TEST_CASE("a single look at t=1 collapses to the fixed design") {
  DesignSpec spec = hypothetical_spec();
  spec.analyses = {{"Primary analysis", 1.0, true, std::nullopt}};
  auto table = compute_boundaries(spec, 380);
  CHECK(*table.rows[0].efficacy_z == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(*table.rows[0].nominal_level_one_sided == doctest::Approx(0.025).epsilon(1e-8));
}

TEST_CASE("stagewise spending sums to alpha under the null") {
  for (double t1 : {0.4, 0.5, 2.0 / 3.0, 0.8}) {
    DesignSpec spec = hypothetical_spec();
    spec.analyses = {{"IA", t1, true, std::nullopt}, {"Primary analysis", 1.0, true, std::nullopt}};
    auto table = compute_boundaries(spec, 400);
    ContinuationRegion r;
    for (const auto& row : table.rows) {
      r.info.push_back(row.target_events);
      r.lower.push_back(kNegInf);
      r.upper.push_back(*row.efficacy_z);
    }
    CHECK(exit_probabilities(r, DriftParameter{0.0}).total_upper() ==
          doctest::Approx(0.025).epsilon(1e-8));
    // first-stage level comes straight from the spending function
    CHECK(table.rows[0].cumulative_alpha ==
          doctest::Approx(spend(table.rows[0].target_events / 400.0, 0.025)).epsilon(1e-12));
  }
}

TEST_CASE("required max events reproduces 385 and the fixed-design count") {
  auto spec = hypothetical_spec();
  const int d = required_max_events(spec);
  CHECK(std::abs(d - 385) <= 1);
  DesignSpec fixed = spec;
  fixed.analyses = {{"Primary analysis", 1.0, true, std::nullopt}};
  CHECK(required_max_events(fixed) == 380);
}

TEST_CASE("power reproduces the 80 vs 78 percent statement") {
  auto spec = hypothetical_spec();
  CHECK(power(spec, 385, 0.75, false) == doctest::Approx(0.80).epsilon(0.005));
  CHECK(power(spec, 385, 0.75, true) == doctest::Approx(0.78).epsilon(0.008));
  CHECK(power(spec, 385, 1.0, false) == doctest::Approx(0.025).epsilon(1e-4));
}

TEST_CASE("honoring futility never gains power") {
  auto spec = hypothetical_spec();
  for (double hr : {0.7, 0.75, 0.85, 1.0}) {
    CHECK(power(spec, 385, hr, true) <= power(spec, 385, hr, false) + 1e-12);
  }
}

TEST_CASE("an added interim never raises the final nominal level above alpha") {
  DesignSpec fixed = hypothetical_spec();
  fixed.analyses = {{"Primary analysis", 1.0, true, std::nullopt}};
  auto base = compute_boundaries(fixed, 385);
  for (double t : {0.3, 0.5, 0.75}) {
    DesignSpec with = fixed;
    with.analyses = {{"IA", t, true, std::nullopt}, {"Primary analysis", 1.0, true, std::nullopt}};
    auto table = compute_boundaries(with, 385);
    CHECK(*table.rows[1].nominal_level_one_sided <=
          *base.rows[0].nominal_level_one_sided + 1e-12);
  }
}

TEST_CASE("spec validation rejects contract violations") {
  auto spec = hypothetical_spec();
  spec.alpha_one_sided = 0.6;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = hypothetical_spec();
  spec.analyses[1].futility_hr = 0.5;  // tighter than the alternative
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = hypothetical_spec();
  spec.analyses[2].information_fraction = 0.9;  // last must be 1
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}
