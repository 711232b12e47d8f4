#pragma once

#include "anderson/accel.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>

namespace anderson {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Diagonal linear contraction g(x) = x - (A x - b), A = diag(diag).

struct LinearDiagProblem {
  Vector diag;
  Vector b;
  Vector x0;

  /// A = diag(0.1, 0.2, ..., 1.9), b = 1, x0 = 0.
  static LinearDiagProblem reference_instance();

  /// Throws unless every diagonal entry lies in (0, 2).
  void validate() const;

  Vector map(const Vector& x) const;
  Vector solution() const { return b.cwiseQuotient(diag); }
  MappingProblem as_mapping() const;
};

Vector linear_map(const LinearDiagProblem& p, const Vector& x);

/// sqrt(v' A^{-1} v).
double elliptic_norm(const LinearDiagProblem& p, const Vector& v);

// ---------------------------------------------------------------------------
// Bratu problem  -Laplace(u) = lambda exp(u) on the unit square, zero
// Dirichlet data, 5-point stencil on a grid_n x grid_n interior grid, solved
// by the Jacobi-preconditioned mapping
//   x_i <- x_i + (b_i - A_i x + lambda exp(x_i)) / A_ii.

struct BratuProblem {
  int grid_n = 50;
  double lambda = 6.0;
  Vector b;  // zero for homogeneous boundary data

  static BratuProblem make(int grid_n = 50, double lambda = 6.0);

  Index dimension() const { return static_cast<Index>(grid_n) * grid_n; }
  double inv_h2() const {
    const double h = 1.0 / (grid_n + 1);
    return 1.0 / (h * h);
  }
  double diagonal() const { return 4.0 * inv_h2(); }

  /// A x for the 1/h^2-scaled 5-point Laplacian (positive definite sign).
  Vector apply_laplacian(const Vector& x) const;
  Vector map(const Vector& x) const;
  MappingProblem as_mapping() const;
};

Vector bratu_map(const BratuProblem& p, const Vector& x);

// ---------------------------------------------------------------------------
// Admixture EM. Parameters are packed as [u (K x J, column-major by k), v (n x K)],
// with f_kj = logistic(u_kj) and q_i = softmax(v_i).

struct AdmixtureProblem {
  int K = 3;
  int J = 100;
  int n_ind = 150;
  /// Genotype counts in {0, 1, 2}, n_ind x J.
  Eigen::MatrixXi X;
  /// Ground truth used to simulate X (K x J and n_ind x K).
  Matrix f_true;
  Matrix q_true;
  /// Starting parameters for the solver.
  Vector start;

  Index dimension() const { return static_cast<Index>(K) * (J + n_ind); }

  Matrix decode_f(const Vector& params) const;
  Matrix decode_q(const Vector& params) const;
  Vector encode(const Matrix& F, const Matrix& Q) const;

  Vector em_map(const Vector& params) const;
  double loglik(const Vector& params) const;
  double loglik(const Matrix& F, const Matrix& Q) const;

  /// Mapping with the log-likelihood as guard objective.
  MappingProblem as_mapping() const;

  void write_genotypes_csv(std::ostream& out) const;
};

/// Probability clamp applied to mixture probabilities and decoded frequencies.
inline constexpr double kAdmixtureEps = 1e-12;

/// Draws X_ij ~ Binomial(2, sum_k q_ik f_kj).
Eigen::MatrixXi sample_genotypes(const Matrix& F, const Matrix& Q, Rng& rng);

/// Deterministic in `seed`: f* ~ U(0.05, 0.95), q*_i ~ flat Dirichlet,
/// X simulated from them, starting parameters ~ U(-0.5, 0.5).
AdmixtureProblem gen_admixture_data(std::uint64_t seed, int K = 3, int J = 100, int n_ind = 150);

Vector admixture_em_map(const AdmixtureProblem& p, const Vector& params);
double admixture_loglik(const AdmixtureProblem& p, const Vector& params);

// ---------------------------------------------------------------------------
// JSON problem descriptors.

enum class ProblemKind { linear, bratu, admixture };

enum class StartKind { zero, uniform, problem_default };

struct ProblemDescriptor {
  ProblemKind kind = ProblemKind::bratu;
  std::uint64_t seed = 0;
  // linear
  int n = 19;
  std::optional<Vector> diag;
  // bratu
  int grid_n = 50;
  double lambda = 6.0;
  // admixture
  int K = 3;
  int J = 100;
  int n_ind = 150;
  StartKind start = StartKind::problem_default;

  static ProblemDescriptor from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Recommended solver settings for the problem family.
  double default_tol() const;
  double default_cond_limit() const;
};

std::string_view to_string(ProblemKind k);

/// A constructed problem plus the starting point for one draw.
struct ProblemInstance {
  std::string name;
  MappingProblem mapping;
  Vector x0;
  std::optional<LinearDiagProblem> linear;
  std::optional<BratuProblem> bratu;
  std::optional<AdmixtureProblem> admixture;
};

/// Builds the problem for the given draw seed. Bratu with StartKind::uniform
/// (the default for sweeps) draws x0 ~ U(0,1); admixture regenerates data
/// and starting values from the seed.
ProblemInstance build_problem(const ProblemDescriptor& desc, std::uint64_t draw_seed);

}  // namespace anderson
