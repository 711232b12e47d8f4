#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace anderson {

/// Distribution-free confidence interval for a median.
///
/// With k the smallest j such that P(B <= j) >= (1 - level) / 2 for
/// B ~ Binomial(n, 1/2), the interval is (X_(k+1), X_(n-k)) in 1-based order
/// statistics. When n is too small for those ranks to give the requested
/// coverage, the full sample range is returned and `widened` is set.
struct MedianCi {
  double lo = 0.0;
  double hi = 0.0;
  double median = 0.0;
  std::size_t lo_rank = 0;  // 1-based
  std::size_t hi_rank = 0;  // 1-based
  bool widened = false;
};

MedianCi median_ci(std::vector<double> samples, double level = 0.99);

/// P(B <= k) for B ~ Binomial(n, 1/2).
double binomial_half_cdf(std::size_t n, std::size_t k);

/// Linear-interpolation sample quantile (Hyndman-Fan type 7). Infinite
/// samples propagate: if either interpolation neighbour is +inf, so is the
/// result.
double quantile(std::vector<double> samples, double p);

/// Geometric grid of `points` values from 1 to `tau_max` inclusive.
std::vector<double> geometric_tau_grid(double tau_max = 32.0, std::size_t points = 200);

struct ProfileOptions {
  /// Drop draws on which no algorithm converged from the denominator.
  bool exclude_unsolved = false;
};

/// Dolan-More performance profile curves.
struct ProfileCurves {
  std::vector<std::string> algorithms;
  std::vector<double> tau;
  std::vector<std::vector<double>> rho;  // [algorithm][tau index]
  std::size_t draws_total = 0;
  std::size_t draws_used = 0;
  std::size_t unsolved_draws = 0;  // draws where every algorithm failed
};

/// `cost[s][p]` is the cost of algorithm s on draw p; +inf marks failure.
/// rho_s(tau) = #{p : cost[s][p] / min_s cost[.][p] <= tau} / draws.
ProfileCurves performance_profile(const std::vector<std::string>& algorithms,
                                  const std::vector<std::vector<double>>& cost,
                                  const std::vector<double>& tau_grid,
                                  ProfileOptions options = {});

void write_profile_csv(std::ostream& out, const ProfileCurves& curves);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace anderson
