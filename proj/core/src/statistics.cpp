#include "anderson/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace anderson {

double binomial_half_cdf(std::size_t n, std::size_t k) {
  if (k >= n) return 1.0;
  const double log_half_n = static_cast<double>(n) * std::log(0.5);
  const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
  double total = 0.0;
  for (std::size_t j = 0; j <= k; ++j) {
    const double jd = static_cast<double>(j);
    const double log_pmf = lg_n1 - std::lgamma(jd + 1.0) -
                           std::lgamma(static_cast<double>(n - j) + 1.0) + log_half_n;
    total += std::exp(log_pmf);
  }
  return std::min(total, 1.0);
}

MedianCi median_ci(std::vector<double> samples, double level) {
  if (samples.empty()) throw std::invalid_argument("median_ci: no samples");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("median_ci: level must be in (0,1)");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();

  MedianCi ci;
  ci.median = (n % 2 == 1) ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  if (n % 2 == 0 && std::isinf(samples[n / 2])) ci.median = samples[n / 2];

  const double tail = 0.5 * (1.0 - level);
  std::size_t k = 0;
  while (k < n && binomial_half_cdf(n, k) < tail) ++k;

  // Coverage of the widest interval (X_(1), X_(n)) is 1 - 2 * 0.5^n.
  const double widest_coverage = 1.0 - 2.0 * std::pow(0.5, static_cast<double>(n));
  if (k == 0 && widest_coverage < level) {
    ci.lo_rank = 1;
    ci.hi_rank = n;
    ci.widened = true;
  } else {
    ci.lo_rank = k + 1;
    ci.hi_rank = n - k;
    if (ci.lo_rank > ci.hi_rank) std::swap(ci.lo_rank, ci.hi_rank);
  }
  ci.lo = samples[ci.lo_rank - 1];
  ci.hi = samples[ci.hi_rank - 1];
  return ci;
}

double quantile(std::vector<double> samples, double p) {
  if (samples.empty()) throw std::invalid_argument("quantile: no samples");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p must be in [0,1]");
  std::sort(samples.begin(), samples.end());
  const double h = (static_cast<double>(samples.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || lo + 1 >= samples.size()) return samples[lo];
  const double a = samples[lo];
  const double b = samples[lo + 1];
  if (std::isinf(a) || std::isinf(b)) return kInf;
  return a + frac * (b - a);
}

std::vector<double> geometric_tau_grid(double tau_max, std::size_t points) {
  if (points < 2 || !(tau_max > 1.0)) throw std::invalid_argument("geometric_tau_grid: bad arguments");
  std::vector<double> tau(points);
  const double step = std::log(tau_max) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) tau[i] = std::exp(step * static_cast<double>(i));
  tau.front() = 1.0;
  tau.back() = tau_max;
  return tau;
}

ProfileCurves performance_profile(const std::vector<std::string>& algorithms,
                                  const std::vector<std::vector<double>>& cost,
                                  const std::vector<double>& tau_grid, ProfileOptions options) {
  if (algorithms.empty() || cost.size() != algorithms.size()) {
    throw std::invalid_argument("performance_profile: one cost row per algorithm required");
  }
  const std::size_t draws = cost.front().size();
  if (draws == 0) throw std::invalid_argument("performance_profile: no draws");
  for (const auto& row : cost) {
    if (row.size() != draws) throw std::invalid_argument("performance_profile: ragged cost table");
  }

  ProfileCurves out;
  out.algorithms = algorithms;
  out.tau = tau_grid;
  out.draws_total = draws;

  const std::size_t S = algorithms.size();
  std::vector<std::vector<double>> ratio(S, std::vector<double>(draws, kInf));
  std::vector<bool> used(draws, true);
  for (std::size_t p = 0; p < draws; ++p) {
    double best = kInf;
    for (std::size_t s = 0; s < S; ++s) best = std::min(best, cost[s][p]);
    if (std::isinf(best)) {
      ++out.unsolved_draws;
      if (options.exclude_unsolved) used[p] = false;
      continue;
    }
    for (std::size_t s = 0; s < S; ++s) {
      if (std::isfinite(cost[s][p])) ratio[s][p] = best > 0.0 ? cost[s][p] / best : 1.0;
    }
  }
  out.draws_used = static_cast<std::size_t>(std::count(used.begin(), used.end(), true));

  out.rho.assign(S, std::vector<double>(tau_grid.size(), 0.0));
  if (out.draws_used == 0) return out;
  const double denom = static_cast<double>(out.draws_used);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t t = 0; t < tau_grid.size(); ++t) {
      std::size_t hits = 0;
      for (std::size_t p = 0; p < draws; ++p) {
        if (used[p] && ratio[s][p] <= tau_grid[t]) ++hits;
      }
      out.rho[s][t] = static_cast<double>(hits) / denom;
    }
  }
  return out;
}

void write_profile_csv(std::ostream& out, const ProfileCurves& curves) {
  out << "algo,tau,rho\n";
  out << std::setprecision(10);
  for (std::size_t s = 0; s < curves.algorithms.size(); ++s) {
    for (std::size_t t = 0; t < curves.tau.size(); ++t) {
      out << curves.algorithms[s] << ',' << curves.tau[t] << ',' << curves.rho[s][t] << '\n';
    }
  }
}

}  // namespace anderson
