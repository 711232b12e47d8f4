#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the incremental QR or the relaxation code.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Mixing {
  Vector x_bar;
  Vector y_bar;
  Vector alpha;  // weights over the iterates, oldest first
};

/// Constrained mixing  min ||sum_i alpha_i f_i||  s.t.  sum_i alpha_i = 1
/// over the iterate window (columns of xs, fs, oldest first), solved by
/// eliminating the newest weight and a dense Householder least squares.
inline Mixing constrained_mixing(const Matrix& xs, const Matrix& fs) {
  const Eigen::Index w = xs.cols();
  const Eigen::Index last = w - 1;
  Mixing out;
  out.alpha = Vector::Zero(w);
  if (w == 1) {
    out.alpha(0) = 1.0;
  } else {
    Matrix G(fs.rows(), last);
    for (Eigen::Index i = 0; i < last; ++i) G.col(i) = fs.col(i) - fs.col(last);
    const Vector a = G.householderQr().solve(Vector(-fs.col(last)));
    out.alpha.head(last) = a;
    out.alpha(last) = 1.0 - a.sum();
  }
  out.x_bar = xs * out.alpha;
  out.y_bar = (xs + fs) * out.alpha;
  return out;
}

/// 2-norm condition number from singular values.
inline double condition(const Matrix& A) {
  Eigen::JacobiSVD<Matrix> svd(A);
  const Vector s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  return s(s.size() - 1) == 0.0 ? INFINITY : s(0) / s(s.size() - 1);
}

/// Symmetric matrix with prescribed eigenvalues and a Haar-like random basis.
inline Matrix symmetric_with_spectrum(const Vector& eig, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  const Eigen::Index n = eig.size();
  Matrix G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = n01(rng);
  const Matrix Q = G.householderQr().householderQ();
  return Q * eig.asDiagonal() * Q.transpose();
}

inline Vector gaussian(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n01(0.0, scale);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = n01(rng);
  return v;
}

/// argmin over a uniform grid on [lo, hi] of phi(beta).
template <class Phi>
double grid_argmin(Phi phi, double lo, double hi, int points) {
  double best = lo;
  double best_val = phi(lo);
  for (int i = 1; i < points; ++i) {
    const double b = lo + (hi - lo) * i / (points - 1);
    const double v = phi(b);
    if (v < best_val) {
      best_val = v;
      best = b;
    }
  }
  return best;
}

/// P(B <= k), B ~ Binomial(n, 1/2), by exact integer-ratio recursion in long double.
inline long double binom_half_cdf(int n, int k) {
  long double pmf = std::pow(0.5L, n);
  long double cdf = 0.0L;
  for (int j = 0; j <= k && j <= n; ++j) {
    cdf += pmf;
    pmf = pmf * (n - j) / (j + 1);
  }
  return cdf;
}

/// Dense 5-point Laplacian (1/h^2 scaling, positive definite sign) on an
/// n x n interior grid, row-major unknown ordering.
inline Matrix dense_laplacian(int n) {
  const double h = 1.0 / (n + 1);
  const double s = 1.0 / (h * h);
  const int N = n * n;
  Matrix A = Matrix::Zero(N, N);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const int i = r * n + c;
      A(i, i) = 4.0 * s;
      if (r > 0) A(i, i - n) = -s;
      if (r < n - 1) A(i, i + n) = -s;
      if (c > 0) A(i, i - 1) = -s;
      if (c < n - 1) A(i, i + 1) = -s;
    }
  }
  return A;
}

}  // namespace oracle
