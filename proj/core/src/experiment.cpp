#include "anderson/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace anderson {

namespace {

using Clock = std::chrono::steady_clock;

Index descriptor_dimension(const ProblemDescriptor& d) {
  switch (d.kind) {
    case ProblemKind::linear: return d.diag ? d.diag->size() : d.n;
    case ProblemKind::bratu: return static_cast<Index>(d.grid_n) * d.grid_n;
    case ProblemKind::admixture: return static_cast<Index>(d.K) * (d.J + d.n_ind);
  }
  return 0;
}

std::string_view to_string(SweepMode m) {
  return m == SweepMode::timing ? "timing" : "correctness";
}

SweepMode sweep_mode_from_string(const std::string& s) {
  if (s == "timing") return SweepMode::timing;
  if (s == "correctness") return SweepMode::correctness;
  throw std::invalid_argument("unknown mode '" + s + "' (expected timing|correctness)");
}

void emit(const ExperimentHook& hook, ExperimentEvent::Phase phase, int draw, const std::string& algo) {
  if (hook) hook(ExperimentEvent{phase, draw, algo});
}

SolveOptions options_for(const ExperimentPlan& plan, int m) {
  SolveOptions o;
  o.m = m;
  o.tol = plan.tol;
  o.max_maps = plan.max_maps;
  o.cond_limit = plan.cond_limit;
  return o;
}

// Runs one algorithm at one depth on an already built instance.
RunRecord run_one(const ProblemInstance& inst, const PlannedAlgorithm& pa, int m,
                  const ExperimentPlan& plan, int draw, const ExperimentHook& hook,
                  SolveReport* keep) {
  RunRecord rec;
  rec.draw = draw;
  rec.m = m;
  const SolveOptions opts = options_for(plan, m);
  const std::string label = pa.label();
  try {
    emit(hook, ExperimentEvent::Phase::solve_begin, draw, label);
    const auto t0 = Clock::now();
    SolveReport report = solve(inst.mapping, inst.x0, pa.algo, opts);
    const auto t1 = Clock::now();
    emit(hook, ExperimentEvent::Phase::solve_end, draw, label);
    rec.time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    rec.maps = report.map_count;
    rec.iterations = report.iterations;
    rec.converged = report.converged;
    if (keep) {
      report.algo = label;
      *keep = std::move(report);
    }
  } catch (const std::exception& e) {
    emit(hook, ExperimentEvent::Phase::solve_end, draw, label);
    rec.converged = false;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

PlannedAlgorithm planned_algorithm_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("algorithm entry must be a JSON object");
  PlannedAlgorithm pa;
  pa.algo.relax = relaxation_from_string(j.at("relax").get<std::string>());
  pa.algo.composite = j.value("composite", false);
  RelaxConfig& c = pa.algo.config;
  c.beta_default = j.value("beta", c.beta_default);
  c.beta_max = j.value("beta_max", c.beta_max);
  c.T = j.value("T", c.T);
  c.delta = j.value("delta", c.delta);
  c.P = j.value("P", c.P);
  c.opt0_fallback = j.value("opt0_fallback", c.opt0_fallback);
  c.regularize = j.value("regularize", c.regularize);
  c.validate();
  if (j.contains("m")) pa.m = j.at("m").get<int>();
  pa.name = j.value("name", std::string{});
  return pa;
}

nlohmann::json to_json(const PlannedAlgorithm& a) {
  const RelaxConfig& c = a.algo.config;
  nlohmann::json j{{"relax", std::string(to_string(a.algo.relax))},
                   {"composite", a.algo.composite},
                   {"beta", c.beta_default},
                   {"beta_max", c.beta_max},
                   {"T", c.T},
                   {"delta", c.delta},
                   {"P", c.P},
                   {"opt0_fallback", c.opt0_fallback},
                   {"regularize", c.regularize},
                   {"name", a.label()}};
  if (a.m) j["m"] = *a.m;
  return j;
}

ExperimentPlan ExperimentPlan::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment plan must be a JSON object");
  ExperimentPlan p;
  p.problem = ProblemDescriptor::from_json(j.at("problem"));
  p.tol = p.problem.default_tol();
  p.cond_limit = p.problem.default_cond_limit();
  for (const auto& a : j.at("algorithms")) p.algorithms.push_back(planned_algorithm_from_json(a));
  if (j.contains("m_grid")) p.m_grid = j.at("m_grid").get<std::vector<int>>();
  p.draws = j.value("draws", p.draws);
  p.pilot_draws = j.value("pilot_draws", p.pilot_draws);
  p.pilot_seed_offset = j.value("pilot_seed_offset", p.pilot_seed_offset);
  p.tol = j.value("tol", p.tol);
  p.max_maps = j.value("max_maps", p.max_maps);
  p.seed_base = j.value("seed_base", p.seed_base);
  p.cond_limit = j.value("cond_limit", p.cond_limit);
  p.ci_level = j.value("ci_level", p.ci_level);
  if (j.contains("mode")) p.mode = sweep_mode_from_string(j.at("mode").get<std::string>());
  p.keep_reports = j.value("keep_reports", p.keep_reports);
  p.validate();
  return p;
}

nlohmann::json ExperimentPlan::to_json() const {
  nlohmann::json algos = nlohmann::json::array();
  for (const auto& a : algorithms) algos.push_back(anderson::to_json(a));
  return nlohmann::json{{"problem", problem.to_json()},
                        {"algorithms", algos},
                        {"m_grid", m_grid},
                        {"draws", draws},
                        {"pilot_draws", pilot_draws},
                        {"pilot_seed_offset", pilot_seed_offset},
                        {"tol", tol},
                        {"max_maps", max_maps},
                        {"seed_base", seed_base},
                        {"cond_limit", cond_limit},
                        {"ci_level", ci_level},
                        {"mode", std::string(to_string(mode))},
                        {"keep_reports", keep_reports}};
}

void ExperimentPlan::validate() const {
  if (draws < 1) throw std::invalid_argument("plan: draws must be >= 1");
  if (algorithms.empty()) throw std::invalid_argument("plan: no algorithms");
  if (!(tol > 0.0)) throw std::invalid_argument("plan: tol must be > 0");
  if (max_maps < 1) throw std::invalid_argument("plan: max_maps must be >= 1");
  if (!(cond_limit > 1.0)) throw std::invalid_argument("plan: cond_limit must be > 1");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw std::invalid_argument("plan: ci_level must be in (0,1)");
  const Index dim = descriptor_dimension(problem);
  bool needs_grid = false;
  for (const auto& a : algorithms) {
    a.algo.config.validate();
    if (a.m) {
      if (*a.m < 0 || *a.m > dim) throw std::invalid_argument("plan: m out of range for " + a.label());
    } else {
      needs_grid = true;
    }
  }
  if (needs_grid) {
    if (m_grid.empty()) throw std::invalid_argument("plan: m_grid is empty");
    if (pilot_draws < 1) throw std::invalid_argument("plan: pilot_draws must be >= 1");
    for (int m : m_grid) {
      if (m < 0 || m > dim) throw std::invalid_argument("plan: m_grid entry exceeds problem dimension");
    }
  }
  std::vector<std::string> labels;
  for (const auto& a : algorithms) labels.push_back(a.label());
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
    throw std::invalid_argument("plan: duplicate algorithm labels (set \"name\")");
  }
}

std::vector<std::vector<double>> ProfileTable::time_cost() const {
  std::vector<std::vector<double>> cost(runs.size());
  for (std::size_t s = 0; s < runs.size(); ++s) {
    cost[s].reserve(runs[s].size());
    for (const auto& r : runs[s]) cost[s].push_back(r.converged ? r.time_ms : kInf);
  }
  return cost;
}

ProfileCurves ProfileTable::curves(const std::vector<double>& tau_grid, ProfileOptions options) const {
  return performance_profile(algorithms, time_cost(), tau_grid, options);
}

SelectMResult select_m(const std::map<std::string, std::map<int, std::vector<double>>>& times_ms) {
  SelectMResult out;
  for (const auto& [algo, by_m] : times_ms) {
    if (by_m.empty()) throw std::invalid_argument("select_m: no pilot runs for " + algo);
    std::optional<int> best_m;
    double best_q = kInf;
    // std::map iterates m in increasing order, so strict < keeps the smaller m on ties.
    for (const auto& [m, times] : by_m) {
      const double q = quantile(times, 0.75);
      out.q75_ms[algo][m] = q;
      if (q < best_q) {
        best_q = q;
        best_m = m;
      }
    }
    if (best_m) {
      out.chosen[algo] = *best_m;
    } else {
      out.excluded.push_back(algo);
      out.notes.push_back(algo + ": no m converged on the 0.75 quantile of pilot draws; excluded");
    }
  }
  return out;
}

SelectMResult select_m(const ExperimentPlan& plan, const ExperimentHook& hook) {
  plan.validate();
  std::map<std::string, std::map<int, std::vector<double>>> times;
  for (int d = 0; d < plan.pilot_draws; ++d) {
    const auto seed = plan.seed_base + plan.pilot_seed_offset + static_cast<std::uint64_t>(d);
    const ProblemInstance inst = build_problem(plan.problem, seed);
    emit(hook, ExperimentEvent::Phase::problem_built, d, {});
    for (const auto& pa : plan.algorithms) {
      if (pa.m) continue;
      for (int m : plan.m_grid) {
        const RunRecord r = run_one(inst, pa, m, plan, d, hook, nullptr);
        times[pa.label()][m].push_back(r.converged ? r.time_ms : kInf);
      }
    }
  }
  SelectMResult out = select_m(times);
  for (const auto& pa : plan.algorithms) {
    if (pa.m) out.chosen[pa.label()] = *pa.m;
  }
  return out;
}

std::vector<SummaryRow> summarize(const ProfileTable& table, double ci_level) {
  std::vector<SummaryRow> rows;
  for (std::size_t s = 0; s < table.algorithms.size(); ++s) {
    const auto& runs = table.runs[s];
    if (runs.empty()) continue;
    std::vector<double> it, mp, tm;
    std::size_t ok = 0;
    for (const auto& r : runs) {
      it.push_back(static_cast<double>(r.iterations));
      mp.push_back(static_cast<double>(r.maps));
      tm.push_back(r.time_ms);
      if (r.converged) ++ok;
    }
    SummaryRow row;
    row.algo = table.algorithms[s];
    row.m = table.m[s];
    row.iterations = median_ci(it, ci_level);
    row.maps = median_ci(mp, ci_level);
    row.time_ms = median_ci(tm, ci_level);
    row.converged_rate = static_cast<double>(ok) / static_cast<double>(runs.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentPlan& plan, const ExperimentHook& hook) {
  plan.validate();
  ExperimentResult result;

  std::vector<int> depth(plan.algorithms.size());
  bool needs_selection = false;
  for (const auto& pa : plan.algorithms) needs_selection = needs_selection || !pa.m;
  if (needs_selection) {
    result.selection = select_m(plan, hook);
  }

  ProfileTable& table = result.table;
  table.draws = plan.draws;
  std::vector<std::size_t> active;
  for (std::size_t s = 0; s < plan.algorithms.size(); ++s) {
    const auto& pa = plan.algorithms[s];
    int m = 0;
    if (pa.m) {
      m = *pa.m;
    } else {
      const auto it = result.selection->chosen.find(pa.label());
      if (it == result.selection->chosen.end()) continue;  // excluded by select_m
      m = it->second;
    }
    active.push_back(s);
    depth[s] = m;
    table.algorithms.push_back(pa.label());
    table.m.push_back(m);
  }
  table.runs.assign(active.size(), {});
  if (plan.keep_reports) result.reports.assign(active.size(), {});

  for (int d = 0; d < plan.draws; ++d) {
    const ProblemInstance inst = build_problem(plan.problem, plan.seed_base + static_cast<std::uint64_t>(d));
    emit(hook, ExperimentEvent::Phase::problem_built, d, {});
    for (std::size_t a = 0; a < active.size(); ++a) {
      const std::size_t s = active[a];
      SolveReport report;
      table.runs[a].push_back(run_one(inst, plan.algorithms[s], depth[s], plan, d, hook,
                                      plan.keep_reports ? &report : nullptr));
      if (plan.keep_reports) result.reports[a].push_back(std::move(report));
    }
  }

  result.summary = summarize(table, plan.ci_level);
  if (!table.algorithms.empty()) result.profile = table.curves(geometric_tau_grid());
  return result;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "algo,m,iter_lo,iter_hi,maps_lo,maps_hi,time_lo,time_hi,converged_rate\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.algo << ',' << r.m << ',' << r.iterations.lo << ',' << r.iterations.hi << ','
        << r.maps.lo << ',' << r.maps.hi << ',' << r.time_ms.lo << ',' << r.time_ms.hi << ','
        << r.converged_rate << '\n';
  }
}

}  // namespace anderson
