#pragma once

#include "anderson/accel.hpp"
#include "anderson/problems.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace anderson {

enum class NormKind { euclidean, elliptic };

std::string_view to_string(NormKind n);

/// `beta` is the relaxation applied at iteration k to form x_{k+1}
/// (1 for the plain first step, NaN on the terminal row).
struct TraceRow {
  long k = 0;
  double residual = 0.0;
  NormKind norm = NormKind::euclidean;
  double beta = 1.0;
};

struct TraceSet {
  std::string figure;
  std::string label;
  NormKind norm = NormKind::euclidean;
  std::vector<TraceRow> rows;
  long iterations = 0;
  long maps = 0;
  bool converged = false;
  StopReason stop_reason = StopReason::map_budget;
  /// True when relaxation bounds were switched off for this trace.
  bool figure_mode = false;
  nlohmann::json config;

  nlohmann::json metadata() const;
};

struct TraceOptions {
  double tol = 1e-8;
  long max_maps = 10000;
};

/// AA with beta = 1, AAopt0 and AAopt1 with unclamped optimal beta. Each
/// algorithm yields one euclidean and one elliptic trace.
std::vector<TraceSet> trace_linear_aaopt(int m = 8,
                                         const LinearDiagProblem& problem = LinearDiagProblem::reference_instance(),
                                         TraceOptions options = {});

/// Four beta-hat variants, elliptic norm: beta = 1; beta-hat recomputed
/// in-iteration after a trial step with beta = 1; the same after a trial step
/// with the previous beta-hat; the lagged beta-hat used by AAmd without
/// regularization. The two in-iteration variants spend one extra map per
/// iteration.
std::vector<TraceSet> trace_linear_aamd(int m = 8,
                                        const LinearDiagProblem& problem = LinearDiagProblem::reference_instance(),
                                        TraceOptions options = {});

/// AA(b=1), AA(b=0.5), AAopt0, AAopt1, AAmd and AAmd without regularization
/// on the Bratu problem from x0 = 0. In composite mode k counts outer
/// iterations.
std::vector<TraceSet> trace_bratu(int m = 16, bool composite = false,
                                  const BratuProblem& problem = BratuProblem::make(),
                                  TraceOptions options = {});

void write_trace_csv(std::ostream& out, const TraceSet& trace);

/// Writes <figure>_<label>[_<norm>].csv plus a .json sidecar per trace and
/// returns the CSV paths.
std::vector<std::filesystem::path> write_traces(const std::filesystem::path& dir,
                                                const std::vector<TraceSet>& traces);

std::string trace_file_stem(const TraceSet& trace);

}  // namespace anderson
