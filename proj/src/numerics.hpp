#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace gsd {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

double norm_pdf(double x);

// Standard normal CDF, absolute error below 1e-14.
double norm_cdf(double x);

// Upper tail P(Z > x), accurate in the far tail.
double norm_sf(double x);

// Inverse of norm_cdf on (0,1). Throws std::domain_error outside.
double norm_quantile(double p);

// Continuation region of a group-sequential test on the z-scale.
// Stage k continues while lower[k] < Z_k < upper[k]; info holds the
// information levels (event counts), strictly increasing.
struct ContinuationRegion {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> info;

  std::size_t stages() const { return info.size(); }
  void validate() const;  // throws std::invalid_argument
};

// Drift on the z-scale: theta = -log(hazard ratio); the stage-k statistic
// has mean theta * sqrt(info_k) / 2 under 1:1 allocation.
struct DriftParameter {
  double theta = 0.0;
  double stage_mean(double info) const;
};

struct ExitProbabilities {
  std::vector<double> upper;  // exit above upper bound at stage k
  std::vector<double> lower;  // exit below lower bound at stage k
  double continuation = 0.0;  // never exits

  double total_upper() const;
};

// Stagewise recursion over a quadrature grid (Simpson, clipped to the
// continuation region and +-6.5 SD around each stage mean).
ExitProbabilities exit_probabilities(const ContinuationRegion& region,
                                     DriftParameter drift,
                                     int grid_points = 301);

// P(first exit is above the upper bound at `stage`), zero-based stage index.
double exit_probability(const ContinuationRegion& region, DriftParameter drift,
                        std::size_t stage, int grid_points = 301);

// Bracketed bisection/secant hybrid. Requires a sign change on [lo, hi];
// returns the bracket midpoint once its width drops below tol.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double tol);

}  // namespace gsd
