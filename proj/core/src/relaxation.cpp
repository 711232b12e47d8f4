#include "anderson/accel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace anderson {

std::string_view to_string(Relaxation r) {
  switch (r) {
    case Relaxation::constant: return "constant";
    case Relaxation::opt0: return "opt0";
    case Relaxation::opt1: return "opt1";
    case Relaxation::md: return "md";
  }
  return "unknown";
}

Relaxation relaxation_from_string(std::string_view name) {
  if (name == "constant" || name == "aa") return Relaxation::constant;
  if (name == "opt0") return Relaxation::opt0;
  if (name == "opt1") return Relaxation::opt1;
  if (name == "md") return Relaxation::md;
  throw std::invalid_argument("unknown relaxation '" + std::string(name) + "'");
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::tolerance: return "tolerance";
    case StopReason::map_budget: return "map_budget";
    case StopReason::non_finite: return "non_finite";
  }
  return "unknown";
}

void RelaxConfig::validate() const {
  if (!(beta_max > 0.0)) throw std::invalid_argument("beta_max must be > 0");
  if (!(beta_default > 0.0) || beta_default > beta_max) {
    throw std::invalid_argument("beta_default must lie in (0, beta_max]");
  }
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  if (P < 0) throw std::invalid_argument("P must be >= 0");
  if (!(opt0_fallback > 0.0) || opt0_fallback > 1.0) {
    throw std::invalid_argument("opt0_fallback must lie in (0, 1]");
  }
}

std::string Algorithm::label() const {
  std::ostringstream os;
  switch (relax) {
    case Relaxation::constant: os << "AA(b=" << config.beta_default << ')'; break;
    case Relaxation::opt0: os << "AAopt0"; break;
    case Relaxation::opt1:
      os << "AAopt1";
      if (config.T > 1) os << '_' << config.T;
      break;
    case Relaxation::md: os << "AAmd"; break;
  }
  if (!config.regularize && relax != Relaxation::constant) os << "(noreg)";
  if (composite) os << "-c";
  return os.str();
}

nlohmann::json SolveReport::to_json() const {
  return nlohmann::json{{"algo", algo},
                        {"m", m},
                        {"converged", converged},
                        {"iterations", iterations},
                        {"maps", map_count},
                        {"time_ns", elapsed.count()},
                        {"stop_reason", std::string(to_string(stop_reason))},
                        {"residual_trace", residual_trace},
                        {"beta_trace", beta_trace}};
}

std::optional<double> beta_opt(const Vector& f_xbar, const Vector& f_ybar) {
  const Vector diff = f_ybar - f_xbar;
  const double denom = diff.squaredNorm();
  if (!(denom > 0.0) || !std::isfinite(denom)) return std::nullopt;
  return -diff.dot(f_xbar) / denom;
}

std::optional<double> beta_hat(const Vector& x_bar_prev, const Vector& y_bar_prev,
                               const Vector& g_xk) {
  const Vector d = y_bar_prev - x_bar_prev;
  const double denom = d.squaredNorm();
  if (!(denom > 0.0) || !std::isfinite(denom)) return std::nullopt;
  return d.dot(g_xk - x_bar_prev) / denom;
}

Vector relax_combine(const Vector& x, const Vector& y, double beta) {
  if (beta == 1.0) return y;
  return x + beta * (y - x);
}

double regularize_opt1(std::optional<double> beta_star, const RelaxConfig& config) {
  if (!config.regularize) return beta_star.value_or(config.beta_default);
  if (!beta_star || *beta_star <= 0.0) return config.beta_default;
  return std::min(*beta_star, config.beta_max);
}

double regularize_opt0(std::optional<double> beta_star, const RelaxConfig& config) {
  if (!config.regularize) return beta_star.value_or(config.beta_default);
  if (beta_star && *beta_star > 0.0 && *beta_star <= 1.0) return *beta_star;
  return config.opt0_fallback;
}

double relax_md_next(RelaxState& state, const RelaxConfig& config,
                     std::optional<double> beta_hat_new) {
  state.beta_prev2_hat = state.beta_prev_hat;
  state.beta_prev_hat = beta_hat_new;

  double beta = config.beta_default;
  if (!config.regularize) {
    beta = beta_hat_new.value_or(config.beta_default);
  } else {
    const auto& prev = state.beta_prev_hat;
    const auto& prev2 = state.beta_prev2_hat;
    // n_gt1 still holds the count left by the previous iteration here.
    const bool accept = prev && prev2 && std::abs(*prev - *prev2) < config.delta &&
                        state.n_gt1 <= config.P && *prev > 0.0;
    if (accept) beta = std::min(*prev, config.beta_max);
  }

  if (beta > 1.0) {
    ++state.n_gt1;
  } else {
    state.n_gt1 = 0;
  }
  state.beta_current = beta;
  return beta;
}

std::optional<Vector> MapCounter::operator()(const Vector& x) {
  if (count_ >= budget_) return std::nullopt;
  ++count_;
  return problem_->map(x);
}

namespace {

struct MappedPair {
  Vector gx;
  Vector gy;
};

std::optional<MappedPair> map_pair(const Vector& x_bar, const Vector& y_bar, MapCounter& maps) {
  if (maps.remaining() < 2) return std::nullopt;
  auto gx = maps(x_bar);
  auto gy = maps(y_bar);
  return MappedPair{std::move(*gx), std::move(*gy)};
}

}  // namespace

std::optional<StepResult> step_opt1(const Vector& x_bar, const Vector& y_bar, MapCounter& maps,
                                    const RelaxConfig& config) {
  auto mapped = map_pair(x_bar, y_bar, maps);
  if (!mapped) return std::nullopt;
  StepResult out;
  out.maps_used = 2;
  out.beta_star = beta_opt(mapped->gx - x_bar, mapped->gy - y_bar);
  out.beta = regularize_opt1(out.beta_star, config);
  out.x_next = relax_combine(mapped->gx, mapped->gy, out.beta);
  return out;
}

std::optional<StepResult> step_opt0(const Vector& x_bar, const Vector& y_bar, MapCounter& maps,
                                    const RelaxConfig& config) {
  auto mapped = map_pair(x_bar, y_bar, maps);
  if (!mapped) return std::nullopt;
  StepResult out;
  out.maps_used = 2;
  out.beta_star = beta_opt(mapped->gx - x_bar, mapped->gy - y_bar);
  out.beta = regularize_opt0(out.beta_star, config);
  out.x_next = relax_combine(x_bar, y_bar, out.beta);
  return out;
}

Vector guarded_step(const MappingProblem& problem, const Vector& x_fallback,
                    const Vector& x_candidate) {
  if (!problem.has_objective()) {
    throw std::invalid_argument("guarded_step: problem has no objective");
  }
  const double cand = problem.objective(x_candidate);
  if (!std::isfinite(cand)) return x_fallback;
  const double base = problem.objective(x_fallback);
  return cand >= base ? x_candidate : x_fallback;
}

}  // namespace anderson
