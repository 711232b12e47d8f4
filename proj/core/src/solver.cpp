#include "anderson/accel.hpp"

#include <chrono>
#include <stdexcept>

namespace anderson {

namespace {

using Clock = std::chrono::steady_clock;

void validate(const MappingProblem& problem, const Vector& x0, const SolveOptions& options) {
  if (!problem.map) throw std::invalid_argument("solve: problem has no map");
  if (x0.size() != problem.dimension) throw std::invalid_argument("solve: x0 has wrong length");
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve: tol must be > 0");
  if (options.max_maps < 1) throw std::invalid_argument("solve: max_maps must be >= 1");
  if (options.m < 0) throw std::invalid_argument("solve: m must be >= 0");
}

class Driver {
 public:
  Driver(const MappingProblem& problem, const Algorithm& algo, const SolveOptions& options)
      : problem_(problem),
        algo_(algo),
        options_(options),
        maps_(problem, options.max_maps),
        history_(problem.dimension, options.m,
                 QrOptions{options.cond_limit, options.refactor_period}),
        guard_(options.use_guard && problem.has_objective()) {
    state_.kind = algo.relax;
    state_.beta_current = algo.config.beta_default;
  }

  SolveReport run(const Vector& x0, bool composite) {
    start_ = Clock::now();
    report_.algo = algo_.label();
    report_.m = options_.m;

    Vector x = x0;
    Vector x_prev;
    Vector f_prev;
    for (long k = 0;; ++k) {
      if (!x.allFinite()) return finish(x, StopReason::non_finite);
      if (composite && k >= 1) {
        switch (refine_inner(x)) {
          case Inner::ok: break;
          case Inner::converged: return finish(x, StopReason::tolerance);
          case Inner::budget: return finish(x, StopReason::map_budget);
          case Inner::non_finite: return finish(x, StopReason::non_finite);
        }
      }

      auto mapped = maps_(x);
      if (!mapped) return finish(x, StopReason::map_budget);
      const Vector gx = std::move(*mapped);
      ++report_.iterations;
      if (!gx.allFinite()) return finish(x, StopReason::non_finite);
      const Vector f = gx - x;
      const double res = f.norm();
      record(k, x, gx, res);
      if (res <= options_.tol) return finish(x, StopReason::tolerance);

      if (k == 0) {
        x_prev = x;
        f_prev = f;
        x = gx;
        continue;
      }

      if (options_.m > 0) {
        if (history_.full()) history_.drop_oldest();
        history_.append_column(f - f_prev, x - x_prev);
        history_.prune_to_condition();
      }
      auto mix = history_.solve_mixing(f, x, gx);
      while (!mix) {
        history_.drop_oldest();
        mix = history_.solve_mixing(f, x, gx);
      }

      auto step = relax_step(k, gx, *mix);
      if (!step) return finish(x, StopReason::map_budget);
      if (guard_) step->x_next = guarded_step(problem_, gx, step->x_next);
      report_.beta_trace.push_back(step->beta);

      x_prev = x;
      f_prev = f;
      x = std::move(step->x_next);
    }
  }

 private:
  enum class Inner { ok, converged, budget, non_finite };

  void record(long k, const Vector& x, const Vector& gx, double res) {
    report_.residual_trace.push_back(res);
    if (options_.observer) options_.observer(IterateView{k, x, gx, res, maps_.count()});
  }

  // One-iteration AA with depth 1 and beta = 1, started at x. Replaces x by
  // the refined iterate.
  Inner refine_inner(Vector& x) {
    auto g1 = maps_(x);
    if (!g1) return Inner::budget;
    if (!g1->allFinite()) return Inner::non_finite;
    const Vector f0 = *g1 - x;
    const double res = f0.norm();
    if (res <= options_.tol) {
      ++report_.iterations;
      record(static_cast<long>(report_.iterations - 1), x, *g1, res);
      return Inner::converged;
    }
    auto g2 = maps_(*g1);
    if (!g2) return Inner::budget;
    if (!g2->allFinite()) return Inner::non_finite;
    const Vector f1 = *g2 - *g1;
    const Vector df = f1 - f0;
    const Vector dx = *g1 - x;
    const double den = df.squaredNorm();
    Vector z;
    if (den > 0.0) {
      const double gamma = df.dot(f1) / den;
      z = *g2 - gamma * (dx + df);
    } else {
      z = std::move(*g2);
    }
    if (!z.allFinite()) return Inner::non_finite;
    x = std::move(z);
    return Inner::ok;
  }

  std::optional<StepResult> relax_step(long k, const Vector& gx, const MixingResult& mix) {
    const RelaxConfig& cfg = algo_.config;
    switch (algo_.relax) {
      case Relaxation::constant: {
        StepResult s;
        s.beta = cfg.beta_default;
        s.x_next = relax_combine(mix.x_bar, mix.y_bar, s.beta);
        return s;
      }
      case Relaxation::opt0:
        return step_opt0(mix.x_bar, mix.y_bar, maps_, cfg);
      case Relaxation::opt1: {
        if (k == 1 || k % cfg.T == 0) {
          auto s = step_opt1(mix.x_bar, mix.y_bar, maps_, cfg);
          if (s) state_.beta_current = s->beta;
          return s;
        }
        StepResult s;
        s.beta = state_.beta_current;
        s.x_next = relax_combine(mix.x_bar, mix.y_bar, s.beta);
        return s;
      }
      case Relaxation::md: {
        std::optional<double> bh;
        if (state_.last_mixing) bh = beta_hat(state_.last_mixing->x_bar, state_.last_mixing->y_bar, gx);
        StepResult s;
        s.beta = relax_md_next(state_, cfg, bh);
        s.x_next = relax_combine(mix.x_bar, mix.y_bar, s.beta);
        state_.last_mixing = mix;
        return s;
      }
    }
    return std::nullopt;
  }

  SolveReport finish(const Vector& x, StopReason reason) {
    report_.stop_reason = reason;
    report_.converged = reason == StopReason::tolerance;
    report_.map_count = maps_.count();
    report_.x = x;
    report_.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start_);
    return std::move(report_);
  }

  const MappingProblem& problem_;
  const Algorithm& algo_;
  const SolveOptions& options_;
  MapCounter maps_;
  DifferenceQr history_;
  RelaxState state_;
  bool guard_;
  SolveReport report_;
  Clock::time_point start_;
};

}  // namespace

SolveReport solve(const MappingProblem& problem, const Vector& x0, const Algorithm& algo,
                  const SolveOptions& options) {
  if (algo.composite) return solve_composite(problem, x0, algo, options);
  validate(problem, x0, options);
  algo.config.validate();
  return Driver(problem, algo, options).run(x0, false);
}

SolveReport solve_composite(const MappingProblem& problem, const Vector& x0,
                            const Algorithm& algo, const SolveOptions& options) {
  validate(problem, x0, options);
  algo.config.validate();
  Algorithm outer = algo;
  outer.composite = true;
  return Driver(problem, outer, options).run(x0, true);
}

}  // namespace anderson
