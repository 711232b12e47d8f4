#pragma once

#include "anderson/accel.hpp"
#include "anderson/problems.hpp"
#include "anderson/statistics.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace anderson {

/// One algorithm column of an experiment. `m` pins the history depth;
/// without it the depth comes from select_m over the plan's m_grid.
struct PlannedAlgorithm {
  Algorithm algo;
  std::optional<int> m;
  std::string name;  // overrides algo.label() when non-empty

  std::string label() const { return name.empty() ? algo.label() : name; }
};

enum class SweepMode { timing, correctness };

struct ExperimentPlan {
  ProblemDescriptor problem;
  std::vector<PlannedAlgorithm> algorithms;
  std::vector<int> m_grid{2, 4, 8, 16, 32, 64};
  int draws = 100;
  int pilot_draws = 20;
  std::uint64_t pilot_seed_offset = 1'000'000;
  double tol = 1e-8;
  long max_maps = 10000;
  std::uint64_t seed_base = 1;
  double cond_limit = 1e12;
  double ci_level = 0.99;
  SweepMode mode = SweepMode::timing;
  /// Keep full SolveReports (residual and beta traces) in the result.
  bool keep_reports = true;

  /// Reads a plan. Missing tol / cond_limit fall back to the problem defaults.
  static ExperimentPlan from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Throws std::invalid_argument on an unusable plan.
  void validate() const;
};

/// Parses an algorithm entry such as
/// {"relax": "md", "composite": true, "beta": 1, "m": 32}.
PlannedAlgorithm planned_algorithm_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PlannedAlgorithm& a);

/// One (draw, algorithm) run.
struct RunRecord {
  int draw = 0;
  int m = 0;
  double time_ms = 0.0;
  long maps = 0;
  long iterations = 0;
  bool converged = false;
  std::string error;  // set when the run threw
};

struct ProfileTable {
  std::vector<std::string> algorithms;
  std::vector<int> m;                         // per algorithm
  std::vector<std::vector<RunRecord>> runs;   // [algorithm][draw]
  int draws = 0;

  /// Wall time in ms, +inf where the run did not converge.
  std::vector<std::vector<double>> time_cost() const;
  ProfileCurves curves(const std::vector<double>& tau_grid, ProfileOptions options = {}) const;
};

struct SummaryRow {
  std::string algo;
  int m = 0;
  MedianCi iterations;
  MedianCi maps;
  MedianCi time_ms;
  double converged_rate = 0.0;
};

struct SelectMResult {
  std::map<std::string, int> chosen;
  /// q75 wall time per algorithm and m (+inf when it failed).
  std::map<std::string, std::map<int, double>> q75_ms;
  std::vector<std::string> excluded;
  std::vector<std::string> notes;
};

/// Lifecycle events for instrumentation.
struct ExperimentEvent {
  enum class Phase { problem_built, solve_begin, solve_end };
  Phase phase;
  int draw;
  std::string algo;
};
using ExperimentHook = std::function<void(const ExperimentEvent&)>;

struct ExperimentResult {
  ProfileTable table;
  std::vector<SummaryRow> summary;
  ProfileCurves profile;
  std::optional<SelectMResult> selection;
  /// [algorithm][draw], present when plan.keep_reports.
  std::vector<std::vector<SolveReport>> reports;
};

/// Chooses per algorithm the m with the smallest 0.75 quantile of time;
/// ties go to the smaller m. `times_ms[algo][m]` holds pilot times with
/// +inf for failures.
SelectMResult select_m(const std::map<std::string, std::map<int, std::vector<double>>>& times_ms);

/// Runs the pilot sweep for every algorithm without a pinned m.
SelectMResult select_m(const ExperimentPlan& plan, const ExperimentHook& hook = {});

/// Executes the plan. Per-draw seeds are seed_base + draw.
ExperimentResult run_experiment(const ExperimentPlan& plan, const ExperimentHook& hook = {});

std::vector<SummaryRow> summarize(const ProfileTable& table, double ci_level = 0.99);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace anderson
