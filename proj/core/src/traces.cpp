#include "anderson/traces.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace anderson {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json algo_config(const Algorithm& a, int m, const TraceOptions& o) {
  const RelaxConfig& c = a.config;
  return nlohmann::json{{"relax", std::string(to_string(a.relax))},
                        {"composite", a.composite},
                        {"beta", c.beta_default},
                        {"beta_max", c.beta_max},
                        {"T", c.T},
                        {"delta", c.delta},
                        {"P", c.P},
                        {"regularize", c.regularize},
                        {"m", m},
                        {"tol", o.tol},
                        {"max_maps", o.max_maps}};
}

Algorithm make_algo(Relaxation r, double beta, bool regularize, bool composite) {
  Algorithm a;
  a.relax = r;
  a.composite = composite;
  a.config.beta_default = beta;
  a.config.regularize = regularize;
  return a;
}

void attach_betas(TraceSet& t, const std::vector<double>& betas) {
  for (auto& row : t.rows) {
    if (row.k == 0) {
      row.beta = 1.0;
    } else {
      const auto idx = static_cast<std::size_t>(row.k - 1);
      row.beta = idx < betas.size() ? betas[idx] : kNaN;
    }
  }
  if (!t.rows.empty() && t.converged) t.rows.back().beta = kNaN;
}

// Runs the library solver and records residuals in the requested norms.
std::vector<TraceSet> traced_solve(const std::string& figure, const MappingProblem& mapping,
                                   const Vector& x0, const Algorithm& algo, int m,
                                   const TraceOptions& o, const std::vector<NormKind>& norms,
                                   const LinearDiagProblem* linear) {
  std::vector<TraceSet> out(norms.size());
  SolveOptions so;
  so.m = m;
  so.tol = o.tol;
  so.max_maps = o.max_maps;
  so.observer = [&](const IterateView& v) {
    for (std::size_t i = 0; i < norms.size(); ++i) {
      TraceRow row;
      row.k = v.k;
      row.norm = norms[i];
      row.residual = norms[i] == NormKind::euclidean ? v.residual_norm
                                                     : elliptic_norm(*linear, v.gx - v.x);
      out[i].rows.push_back(row);
    }
  };
  const SolveReport rep = solve(mapping, x0, algo, so);
  for (std::size_t i = 0; i < norms.size(); ++i) {
    TraceSet& t = out[i];
    t.figure = figure;
    t.label = algo.label();
    t.norm = norms[i];
    t.iterations = rep.iterations;
    t.maps = rep.map_count;
    t.converged = rep.converged;
    t.stop_reason = rep.stop_reason;
    t.figure_mode = !algo.config.regularize;
    t.config = algo_config(algo, m, o);
    attach_betas(t, rep.beta_trace);
  }
  return out;
}

// AA whose beta-hat is recomputed within the iteration from a trial step
// x_bar + beta_trial (y_bar - x_bar). `lagged_trial` selects the previous
// beta-hat as trial value instead of 1.
TraceSet trial_beta_hat_trace(const LinearDiagProblem& p, int m, bool lagged_trial,
                              const TraceOptions& o) {
  TraceSet t;
  t.figure = "linear_aamd";
  t.label = lagged_trial ? "AAbhat_from_prev" : "AAbhat_from_1";
  t.norm = NormKind::elliptic;
  t.figure_mode = true;
  t.config = nlohmann::json{{"variant", t.label}, {"m", m}, {"tol", o.tol}, {"max_maps", o.max_maps},
                            {"extra_maps_per_iteration", 1}};

  const MappingProblem mapping = p.as_mapping();
  MapCounter maps(mapping, o.max_maps);
  DifferenceQr history(mapping.dimension, m);
  Vector x = p.x0;
  Vector x_prev, f_prev;
  double trial = 1.0;
  std::vector<double> betas;

  auto stop = [&](StopReason r) {
    t.stop_reason = r;
    t.converged = r == StopReason::tolerance;
    t.maps = maps.count();
    attach_betas(t, betas);
    return t;
  };

  for (long k = 0;; ++k) {
    auto g = maps(x);
    if (!g) return stop(StopReason::map_budget);
    const Vector gx = std::move(*g);
    ++t.iterations;
    const Vector f = gx - x;
    if (!f.allFinite()) return stop(StopReason::non_finite);
    t.rows.push_back(TraceRow{k, elliptic_norm(p, f), NormKind::elliptic, 1.0});
    if (f.norm() <= o.tol) return stop(StopReason::tolerance);
    if (k == 0) {
      x_prev = x;
      f_prev = f;
      x = gx;
      continue;
    }
    if (m > 0) {
      if (history.full()) history.drop_oldest();
      history.append_column(f - f_prev, x - x_prev);
      history.prune_to_condition();
    }
    auto mix = history.solve_mixing(f, x, gx);
    while (!mix) {
      history.drop_oldest();
      mix = history.solve_mixing(f, x, gx);
    }
    const double beta_trial = lagged_trial ? trial : 1.0;
    auto g_trial = maps(relax_combine(mix->x_bar, mix->y_bar, beta_trial));
    if (!g_trial) return stop(StopReason::map_budget);
    const double bh = beta_hat(mix->x_bar, mix->y_bar, *g_trial).value_or(beta_trial);
    betas.push_back(bh);
    trial = bh;
    x_prev = x;
    f_prev = f;
    x = relax_combine(mix->x_bar, mix->y_bar, bh);
  }
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') {
      out.push_back(c);
    } else if (c == '.') {
      out.push_back('p');
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

}  // namespace

std::string_view to_string(NormKind n) {
  return n == NormKind::euclidean ? "euclidean" : "elliptic";
}

nlohmann::json TraceSet::metadata() const {
  return nlohmann::json{{"figure", figure},
                        {"label", label},
                        {"norm", std::string(to_string(norm))},
                        {"iterations", iterations},
                        {"maps", maps},
                        {"converged", converged},
                        {"stop_reason", std::string(to_string(stop_reason))},
                        {"figure_mode", figure_mode},
                        {"config", config}};
}

std::vector<TraceSet> trace_linear_aaopt(int m, const LinearDiagProblem& problem, TraceOptions options) {
  problem.validate();
  const MappingProblem mapping = problem.as_mapping();
  const std::vector<NormKind> norms{NormKind::euclidean, NormKind::elliptic};
  std::vector<TraceSet> out;
  for (const Algorithm& a : {make_algo(Relaxation::constant, 1.0, true, false),
                             make_algo(Relaxation::opt0, 1.0, false, false),
                             make_algo(Relaxation::opt1, 1.0, false, false)}) {
    for (auto& t : traced_solve("linear_aaopt", mapping, problem.x0, a, m, options, norms, &problem)) {
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<TraceSet> trace_linear_aamd(int m, const LinearDiagProblem& problem, TraceOptions options) {
  problem.validate();
  const MappingProblem mapping = problem.as_mapping();
  const std::vector<NormKind> norms{NormKind::elliptic};
  std::vector<TraceSet> out;
  auto constant = traced_solve("linear_aamd", mapping, problem.x0,
                               make_algo(Relaxation::constant, 1.0, true, false), m, options, norms, &problem);
  out.push_back(std::move(constant.front()));
  out.push_back(trial_beta_hat_trace(problem, m, false, options));
  out.push_back(trial_beta_hat_trace(problem, m, true, options));
  auto lagged = traced_solve("linear_aamd", mapping, problem.x0,
                             make_algo(Relaxation::md, 1.0, false, false), m, options, norms, &problem);
  out.push_back(std::move(lagged.front()));
  return out;
}

std::vector<TraceSet> trace_bratu(int m, bool composite, const BratuProblem& problem, TraceOptions options) {
  const MappingProblem mapping = problem.as_mapping();
  const Vector x0 = Vector::Zero(problem.dimension());
  const std::string figure = composite ? "bratu_composite" : "bratu";
  const std::vector<NormKind> norms{NormKind::euclidean};
  std::vector<TraceSet> out;
  for (const Algorithm& a : {make_algo(Relaxation::constant, 1.0, true, composite),
                             make_algo(Relaxation::constant, 0.5, true, composite),
                             make_algo(Relaxation::opt0, 1.0, true, composite),
                             make_algo(Relaxation::opt1, 1.0, true, composite),
                             make_algo(Relaxation::md, 1.0, true, composite),
                             make_algo(Relaxation::md, 1.0, false, composite)}) {
    auto t = traced_solve(figure, mapping, x0, a, m, options, norms, nullptr);
    out.push_back(std::move(t.front()));
  }
  return out;
}

void write_trace_csv(std::ostream& out, const TraceSet& trace) {
  out << "k,residual,norm,beta\n";
  out << std::setprecision(17);
  for (const auto& r : trace.rows) {
    out << r.k << ',' << r.residual << ',' << to_string(r.norm) << ',';
    if (std::isfinite(r.beta)) out << r.beta;
    out << '\n';
  }
}

std::string trace_file_stem(const TraceSet& trace) {
  std::string stem = sanitize(trace.figure) + "_" + sanitize(trace.label);
  if (trace.figure == "linear_aaopt") stem += "_" + std::string(to_string(trace.norm));
  return stem;
}

std::vector<std::filesystem::path> write_traces(const std::filesystem::path& dir,
                                                const std::vector<TraceSet>& traces) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (const auto& t : traces) {
    const std::string stem = trace_file_stem(t);
    const auto csv = dir / (stem + ".csv");
    std::ofstream c(csv);
    if (!c) throw std::runtime_error("cannot write " + csv.string());
    write_trace_csv(c, t);
    std::ofstream j(dir / (stem + ".json"));
    j << t.metadata().dump(2) << '\n';
    paths.push_back(csv);
  }
  return paths;
}

}  // namespace anderson
