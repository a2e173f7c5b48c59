#include "numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace gsd {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Acklam's rational approximation, good to ~1.15e-9 before refinement.
double quantile_seed(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double upper_tail(double bound, double mean, double sd) {
  if (std::isinf(bound)) return bound > 0 ? 0.0 : 1.0;
  return 0.5 * std::erfc((bound - mean) / (sd * kSqrt2));
}

double lower_tail(double bound, double mean, double sd) {
  if (std::isinf(bound)) return bound < 0 ? 0.0 : 1.0;
  return 0.5 * std::erfc(-(bound - mean) / (sd * kSqrt2));
}

void simpson_weights(std::vector<double>& w, int n, double h) {
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    w[i] = (i == 0 || i == n - 1) ? h / 3.0
           : (i % 2 == 1)         ? 4.0 * h / 3.0
                                  : 2.0 * h / 3.0;
  }
}

}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double norm_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("norm_quantile: p must lie in (0,1)");
  }
  double x = quantile_seed(p);
  // Two Halley steps against the erfc-based CDF.
  for (int i = 0; i < 2; ++i) {
    double e = norm_cdf(x) - p;
    double u = e / norm_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double DriftParameter::stage_mean(double info) const {
  return theta * std::sqrt(info) / 2.0;
}

void ContinuationRegion::validate() const {
  if (info.empty() || lower.size() != info.size() || upper.size() != info.size()) {
    throw std::invalid_argument("ContinuationRegion: inconsistent stage counts");
  }
  double prev = 0.0;
  for (std::size_t k = 0; k < info.size(); ++k) {
    if (!(info[k] > prev)) {
      throw std::invalid_argument(
          "ContinuationRegion: information levels must be strictly increasing "
          "and positive");
    }
    prev = info[k];
    if (!(lower[k] < upper[k])) {
      throw std::invalid_argument("ContinuationRegion: lower must be < upper");
    }
  }
}

double ExitProbabilities::total_upper() const {
  double s = 0.0;
  for (double p : upper) s += p;
  return s;
}

ExitProbabilities exit_probabilities(const ContinuationRegion& region,
                                     DriftParameter drift, int grid_points) {
  region.validate();
  const std::size_t K = region.stages();
  if (grid_points < 11) grid_points = 11;
  if (grid_points % 2 == 0) ++grid_points;  // Simpson needs an odd count
  const int n = grid_points;
  const double span = 6.5;

  ExitProbabilities out;
  out.upper.assign(K, 0.0);
  out.lower.assign(K, 0.0);

  // Subdensity of the still-continuing statistic on the previous stage's grid.
  std::vector<double> pgrid, pdens, pwgt;
  bool empty = false;  // continuation region carries negligible mass
  double mu_prev = 0.0;
  double cont = 0.0;

  for (std::size_t k = 0; k < K; ++k) {
    const double mu = drift.stage_mean(region.info[k]);
    const double lo_b = region.lower[k];
    const double up_b = region.upper[k];
    const bool last = k + 1 == K;

    double r = 0.0, s = 1.0;
    if (k > 0) {
      r = std::sqrt(region.info[k - 1] / region.info[k]);
      s = std::sqrt(1.0 - r * r);
    }

    // Exit probabilities at this stage; the final stage's continuation mass
    // falls out of the same pass, so its density is never materialized.
    if (k == 0) {
      out.upper[0] = upper_tail(up_b, mu, 1.0);
      out.lower[0] = lower_tail(lo_b, mu, 1.0);
      if (last) cont = 1.0 - out.upper[0] - out.lower[0];
    } else if (!empty) {
      double eu = 0.0, el = 0.0, mid = 0.0;
      for (int i = 0; i < n; ++i) {
        const double m = mu + r * (pgrid[i] - mu_prev);
        const double f = pwgt[i] * pdens[i];
        const double u = upper_tail(up_b, m, s);
        const double l = lower_tail(lo_b, m, s);
        eu += f * u;
        el += f * l;
        if (last) mid += f * (1.0 - u - l);
      }
      out.upper[k] = eu;
      out.lower[k] = el;
      if (last) cont = mid;
    }
    if (last) break;

    // Continuing density at this stage, on its own grid.
    const double glo = std::max(lo_b, mu - span);
    const double ghi = std::min(up_b, mu + span);
    if (!(ghi > glo)) {
      empty = true;
      break;
    }
    std::vector<double> grid(n), dens(n, 0.0), wgt;
    const double h = (ghi - glo) / (n - 1);
    for (int i = 0; i < n; ++i) grid[i] = glo + h * i;
    simpson_weights(wgt, n, h);
    if (k == 0) {
      for (int i = 0; i < n; ++i) dens[i] = norm_pdf(grid[i] - mu);
    } else if (!empty) {
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          const double m = mu + r * (pgrid[i] - mu_prev);
          acc += pwgt[i] * pdens[i] * norm_pdf((grid[j] - m) / s) / s;
        }
        dens[j] = acc;
      }
    }
    pgrid.swap(grid);
    pdens.swap(dens);
    pwgt.swap(wgt);
    mu_prev = mu;
  }

  out.continuation = empty ? 0.0 : cont;
  return out;
}

double exit_probability(const ContinuationRegion& region, DriftParameter drift,
                        std::size_t stage, int grid_points) {
  if (stage >= region.stages()) {
    throw std::out_of_range("exit_probability: stage index out of range");
  }
  return exit_probabilities(region, drift, grid_points).upper[stage];
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("find_root: tol must be > 0");
  if (lo > hi) std::swap(lo, hi);
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw std::invalid_argument("find_root: no sign change on bracket");
  }
  double width = hi - lo;
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    double x;
    // Secant candidate, accepted only while the bracket keeps shrinking.
    if (hi - lo < 0.6 * width || it % 2 == 0) {
      x = lo - flo * (hi - lo) / (fhi - flo);
      const double margin = 1e-3 * (hi - lo);
      if (!(x > lo + margin && x < hi - margin)) x = 0.5 * (lo + hi);
    } else {
      x = 0.5 * (lo + hi);
    }
    width = hi - lo;
    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace gsd
