#pragma once

#include "anderson/qr_ls.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace anderson {

/// A fixed-point mapping g: R^n -> R^n. The residual is f(x) = g(x) - x.
///
/// `objective`, when set, is a scalar to be maximized (a log-likelihood for
/// EM problems). The solver uses it to guard accelerated steps.
struct MappingProblem {
  Index dimension = 0;
  std::function<Vector(const Vector&)> map;
  std::function<double(const Vector&)> objective;

  bool has_objective() const { return static_cast<bool>(objective); }
  Vector residual(const Vector& x) const { return map(x) - x; }
};

enum class Relaxation { constant, opt0, opt1, md };

std::string_view to_string(Relaxation r);
Relaxation relaxation_from_string(std::string_view name);

/// Relaxation parameters. `beta_default` doubles as the constant beta for
/// stationary AA. `regularize = false` is figure mode: optimal betas are used
/// unclamped and AAmd runs without cap, discrepancy test or resets.
struct RelaxConfig {
  double beta_default = 1.0;
  double beta_max = 3.0;
  int T = 1;
  double delta = 2.0;
  int P = 10;
  double opt0_fallback = 0.5;
  bool regularize = true;

  void validate() const;
};

struct Algorithm {
  Relaxation relax = Relaxation::constant;
  bool composite = false;
  RelaxConfig config;

  /// Short CSV-safe name: "AA(b=1)", "AAopt1_16", "AAmd-c", "AAmd(noreg)".
  std::string label() const;
};

/// Per-iteration relaxation memory.
struct RelaxState {
  Relaxation kind = Relaxation::constant;
  double beta_current = 1.0;
  std::optional<double> beta_prev_hat;   // beta-hat_{k-1}
  std::optional<double> beta_prev2_hat;  // beta-hat_{k-2}
  int n_gt1 = 0;
  std::optional<MixingResult> last_mixing;
};

enum class StopReason { tolerance, map_budget, non_finite };

std::string_view to_string(StopReason r);

struct SolveReport {
  std::string algo;
  int m = 0;
  bool converged = false;
  long iterations = 0;
  long map_count = 0;
  std::vector<double> residual_trace;
  std::vector<double> beta_trace;
  std::chrono::nanoseconds elapsed{0};
  StopReason stop_reason = StopReason::map_budget;
  Vector x;  // last iterate whose map was evaluated

  nlohmann::json to_json() const;
};

/// Observer payload, called once per main-sequence map evaluation.
struct IterateView {
  long k;
  const Vector& x;
  const Vector& gx;
  double residual_norm;
  long map_count;
};

struct SolveOptions {
  int m = 8;
  double tol = 1e-8;
  long max_maps = 10000;
  double cond_limit = 1e12;
  int refactor_period = 10;
  /// Apply guarded_step when the problem declares an objective.
  bool use_guard = true;
  std::function<void(const IterateView&)> observer;
};

/// Result of a relaxation step.
struct StepResult {
  Vector x_next;
  double beta = 1.0;
  int maps_used = 0;
  std::optional<double> beta_star;
};

/// Least-squares optimal beta for the linearized update
/// f(x_bar) + beta (f(y_bar) - f(x_bar)). Unclamped; `nullopt` when the two
/// residuals coincide.
std::optional<double> beta_opt(const Vector& f_xbar, const Vector& f_ybar);

/// Projection coefficient of g(x_k) - x_bar_prev onto d = y_bar_prev - x_bar_prev.
/// `nullopt` when d = 0.
std::optional<double> beta_hat(const Vector& x_bar_prev, const Vector& y_bar_prev,
                               const Vector& g_xk);

/// x + beta (y - x); exactly y when beta == 1.
Vector relax_combine(const Vector& x, const Vector& y, double beta);

/// Maps beta* to the beta actually used by AAopt1: nonpositive or undefined
/// gives beta_default, otherwise min(beta*, beta_max).
double regularize_opt1(std::optional<double> beta_star, const RelaxConfig& config);
/// Maps beta* to the beta actually used by AAopt0 (interior of (0, 1], else fallback).
double regularize_opt0(std::optional<double> beta_star, const RelaxConfig& config);

/// AAmd relaxation for the coming step. Shifts `beta_hat_new` into the
/// state's beta-hat memory, applies the acceptance test against the
/// counter value left by the previous iteration, then updates the counter.
double relax_md_next(RelaxState& state, const RelaxConfig& config,
                     std::optional<double> beta_hat_new);

/// Counts map evaluations against a budget.
class MapCounter {
 public:
  MapCounter(const MappingProblem& problem, long budget) : problem_(&problem), budget_(budget) {}

  /// `nullopt` once the budget is exhausted.
  std::optional<Vector> operator()(const Vector& x);
  long count() const { return count_; }
  long remaining() const { return budget_ - count_; }

 private:
  const MappingProblem* problem_;
  long budget_;
  long count_ = 0;
};

/// AAopt1 step: g(x_bar) + beta (g(y_bar) - g(x_bar)). Two maps.
/// `nullopt` when the budget cannot cover both maps.
std::optional<StepResult> step_opt1(const Vector& x_bar, const Vector& y_bar, MapCounter& maps,
                                    const RelaxConfig& config);

/// AAopt0 step: x_bar + beta (y_bar - x_bar) with beta from g(x_bar), g(y_bar).
std::optional<StepResult> step_opt0(const Vector& x_bar, const Vector& y_bar, MapCounter& maps,
                                    const RelaxConfig& config);

/// Keeps `x_candidate` unless it lowers the objective below that of
/// `x_fallback` (or makes it non-finite).
Vector guarded_step(const MappingProblem& problem, const Vector& x_fallback,
                    const Vector& x_candidate);

/// Anderson acceleration driver. Runs x1 = g(x0) followed by the AA loop
/// with the strategy selected by `algo.relax`. Delegates to solve_composite
/// when `algo.composite` is set.
SolveReport solve(const MappingProblem& problem, const Vector& x0, const Algorithm& algo,
                  const SolveOptions& options);

/// Composite AA: every outer iteration first refines the iterate with a
/// one-iteration, depth-1, beta = 1 inner AA. Iterations count outer steps;
/// maps count everything.
SolveReport solve_composite(const MappingProblem& problem, const Vector& x0,
                            const Algorithm& algo, const SolveOptions& options);

}  // namespace anderson
