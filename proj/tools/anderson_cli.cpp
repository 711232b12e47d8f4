// Command-line front end: single solves, sweeps, m selection and trace export.

#include "anderson/accel.hpp"
#include "anderson/bench.hpp"
#include "anderson/problems.hpp"
#include "anderson/traces.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

namespace {

constexpr int kExitInvalid = 2;

struct InvalidConfig : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(path + ": " + e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

struct SolveArgs {
  std::string problem = "bratu";
  std::string algo = "md";
  int m = 8;
  double beta = 1.0;
  double beta_max = 3.0;
  int T = 1;
  double delta = 2.0;
  int cap_P = 10;
  bool composite = false;
  bool no_regularize = false;
  double tol = 0.0;
  long max_maps = 10000;
  std::uint64_t seed = 1;
  std::string x0 = "default";
  bool traces = false;
};

int run_solve(const SolveArgs& a) {
  nlohmann::json desc_json{{"type", a.problem}, {"x0", a.x0}};
  if (a.problem == "bratu" && a.x0 == "default") desc_json["x0"] = "uniform";
  const auto desc = anderson::ProblemDescriptor::from_json(desc_json);

  anderson::Algorithm algo;
  algo.relax = anderson::relaxation_from_string(a.algo);
  algo.composite = a.composite;
  algo.config.beta_default = a.beta;
  algo.config.beta_max = a.beta_max;
  algo.config.T = a.T;
  algo.config.delta = a.delta;
  algo.config.P = a.cap_P;
  algo.config.regularize = !a.no_regularize;
  algo.config.validate();

  anderson::SolveOptions opts;
  opts.m = a.m;
  opts.tol = a.tol > 0.0 ? a.tol : desc.default_tol();
  opts.max_maps = a.max_maps;
  opts.cond_limit = desc.default_cond_limit();

  const auto inst = anderson::build_problem(desc, a.seed);
  const auto report = anderson::solve(inst.mapping, inst.x0, algo, opts);
  auto j = report.to_json();
  if (!a.traces) {
    j.erase("residual_trace");
    j.erase("beta_trace");
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_sweep(const std::string& plan_path, const std::string& summary_path,
              const std::string& profile_path, const std::string& reports_path) {
  const auto plan = anderson::ExperimentPlan::from_json(read_json_file(plan_path));
  const auto result = anderson::run_experiment(plan, [](const anderson::ExperimentEvent& e) {
    if (e.phase == anderson::ExperimentEvent::Phase::problem_built) {
      std::cerr << "draw " << e.draw << '\n';
    }
  });
  if (result.selection) {
    for (const auto& note : result.selection->notes) std::cerr << "note: " << note << '\n';
  }
  {
    auto out = open_out(summary_path);
    anderson::write_summary_csv(out, result.summary);
  }
  {
    auto out = open_out(profile_path);
    anderson::write_profile_csv(out, result.profile);
  }
  if (!reports_path.empty()) {
    nlohmann::json all = nlohmann::json::array();
    for (const auto& per_algo : result.reports) {
      for (const auto& r : per_algo) all.push_back(r.to_json());
    }
    open_out(reports_path) << all.dump() << '\n';
  }
  anderson::write_summary_csv(std::cout, result.summary);
  if (result.profile.unsolved_draws > 0) {
    std::cerr << "draws with no converged algorithm: " << result.profile.unsolved_draws << '\n';
  }
  return 0;
}

int run_select_m(const std::string& plan_path) {
  const auto plan = anderson::ExperimentPlan::from_json(read_json_file(plan_path));
  const auto sel = anderson::select_m(plan);
  nlohmann::json j;
  j["chosen"] = sel.chosen;
  nlohmann::json q = nlohmann::json::object();
  for (const auto& [algo, by_m] : sel.q75_ms) {
    for (const auto& [m, v] : by_m) {
      q[algo][std::to_string(m)] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf");
    }
  }
  j["q75_ms"] = q;
  j["excluded"] = sel.excluded;
  j["notes"] = sel.notes;
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_trace(const std::string& figure, int m, const std::string& out_dir) {
  std::vector<anderson::TraceSet> traces;
  if (figure == "linear-aaopt") {
    traces = anderson::trace_linear_aaopt(m);
  } else if (figure == "linear-aamd") {
    traces = anderson::trace_linear_aamd(m);
  } else if (figure == "bratu") {
    traces = anderson::trace_bratu(m, false);
  } else if (figure == "bratu-composite") {
    traces = anderson::trace_bratu(m, true);
  } else {
    throw InvalidConfig("unknown figure '" + figure + "'");
  }
  for (const auto& p : anderson::write_traces(out_dir, traces)) std::cout << p.string() << '\n';
  return 0;
}

int run_gen_admixture(std::uint64_t seed, int K, int J, int n_ind, const std::string& out_path) {
  const auto p = anderson::gen_admixture_data(seed, K, J, n_ind);
  if (out_path.empty() || out_path == "-") {
    p.write_genotypes_csv(std::cout);
  } else {
    auto out = open_out(out_path);
    p.write_genotypes_csv(out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anderson acceleration with adaptive relaxation"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Run one solver on one problem and print the report as JSON");
  solve->add_option("--problem", sa.problem, "linear | bratu | admixture")->check(CLI::IsMember({"linear", "bratu", "admixture"}));
  solve->add_option("--algo", sa.algo, "aa | opt0 | opt1 | md")->check(CLI::IsMember({"aa", "constant", "opt0", "opt1", "md"}));
  solve->add_option("--m", sa.m, "History depth")->check(CLI::NonNegativeNumber);
  solve->add_option("--beta", sa.beta, "Constant / default relaxation");
  solve->add_option("--beta-max", sa.beta_max, "Relaxation cap");
  solve->add_option("--T", sa.T, "AAopt1 recompute period");
  solve->add_option("--delta", sa.delta, "AAmd discrepancy bound");
  solve->add_option("--cap-P", sa.cap_P, "AAmd run-length bound");
  solve->add_flag("--composite", sa.composite, "Composite AA with one inner iteration");
  solve->add_flag("--no-regularize", sa.no_regularize, "Unclamped optimal beta / raw AAmd");
  solve->add_option("--tol", sa.tol, "Residual tolerance (default per problem)");
  solve->add_option("--max-maps", sa.max_maps, "Map evaluation budget");
  solve->add_option("--seed", sa.seed, "Draw seed");
  solve->add_option("--x0", sa.x0, "zero | uniform | default")->check(CLI::IsMember({"zero", "uniform", "default"}));
  solve->add_flag("--traces", sa.traces, "Include residual and beta traces");

  std::string plan_path, summary_path = "summary.csv", profile_path = "profile.csv", reports_path;
  auto* sweep = app.add_subcommand("sweep", "Run an experiment plan and write summary and profile CSVs");
  sweep->add_option("plan", plan_path, "Experiment plan JSON")->required();
  sweep->add_option("--summary", summary_path, "Summary CSV path");
  sweep->add_option("--profile", profile_path, "Profile CSV path");
  sweep->add_option("--reports", reports_path, "Optional JSON dump of every SolveReport");

  std::string select_plan;
  auto* select = app.add_subcommand("select-m", "Pilot sweep choosing m per algorithm");
  select->add_option("plan", select_plan, "Experiment plan JSON")->required();

  std::string figure, trace_dir = "traces";
  int trace_m = -1;
  auto* trace = app.add_subcommand("trace", "Write per-iteration trace CSVs for a figure");
  trace->add_option("figure", figure, "linear-aaopt | linear-aamd | bratu | bratu-composite")->required();
  trace->add_option("--m", trace_m, "History depth (default 8 for linear, 16 for bratu)");
  trace->add_option("--out", trace_dir, "Output directory");

  std::uint64_t gen_seed = 1;
  int gen_K = 3, gen_J = 100, gen_n = 150;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-admixture", "Write a simulated genotype matrix as CSV");
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--K", gen_K, "Ancestral populations");
  gen->add_option("--J", gen_J, "Markers");
  gen->add_option("--n", gen_n, "Individuals");
  gen->add_option("--out", gen_out, "Output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*solve) return run_solve(sa);
    if (*sweep) return run_sweep(plan_path, summary_path, profile_path, reports_path);
    if (*select) return run_select_m(select_plan);
    if (*trace) {
      const int m = trace_m >= 0 ? trace_m : (figure.rfind("bratu", 0) == 0 ? 16 : 8);
      return run_trace(figure, m, trace_dir);
    }
    if (*gen) return run_gen_admixture(gen_seed, gen_K, gen_J, gen_n, gen_out);
  } catch (const InvalidConfig& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
