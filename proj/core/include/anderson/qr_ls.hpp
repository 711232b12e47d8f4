#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace anderson {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when a history column contains NaN or Inf. Usually means the
/// underlying fixed-point iteration has diverged.
class NumericalInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a column drop is requested on an empty history.
class EmptyHistoryError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Residual and iterate differences, oldest column first.
///
/// Column i of `F` is f(x_{k-m+i+1}) - f(x_{k-m+i}); column i of `X` holds the
/// matching iterate difference. Storage is allocated for `max_cols` columns
/// and only the leading `cols` are meaningful.
struct DifferenceBasis {
  Matrix F;
  Matrix X;
  Index cols = 0;
  Index max_cols = 0;

  auto f_view() const { return F.leftCols(cols); }
  auto x_view() const { return X.leftCols(cols); }
};

/// Thin QR factors of the active part of `DifferenceBasis::F`.
struct QrFactors {
  Matrix Q;  // n x max_cols, leading `cols` columns orthonormal
  Matrix R;  // max_cols x max_cols, leading block upper triangular
  int rotations_since_refactor = 0;
  double cond_limit = 1e12;
  int refactor_period = 10;
};

struct QrOptions {
  double cond_limit = 1e12;
  int refactor_period = 10;
};

/// Output of the mixing least-squares step.
struct MixingResult {
  Vector x_bar;
  Vector y_bar;
  Vector gamma;
};

/// Incrementally maintained QR least-squares solver for the Anderson mixing
/// problem min ||f_k - F gamma||.
///
/// Columns are appended on the right by Gram-Schmidt (with one
/// re-orthogonalization pass) and removed from the left with plane
/// rotations. After `refactor_period` drop-rotations the factorization is
/// recomputed from the stored differences.
class DifferenceQr {
 public:
  DifferenceQr(Index dimension, Index max_cols, QrOptions options = {});

  Index dimension() const { return dimension_; }
  Index size() const { return basis_.cols; }
  Index capacity() const { return basis_.max_cols; }
  bool empty() const { return basis_.cols == 0; }
  bool full() const { return basis_.cols == basis_.max_cols; }

  const DifferenceBasis& basis() const { return basis_; }
  const QrFactors& factors() const { return qr_; }

  auto q_view() const { return qr_.Q.leftCols(basis_.cols); }
  auto r_view() const { return qr_.R.topLeftCorner(basis_.cols, basis_.cols); }

  /// Appends one (f, x) difference pair. Requires !full().
  void append_column(const Vector& f_diff, const Vector& x_diff);

  /// Removes the oldest column and restores the factorization with
  /// plane rotations.
  void drop_oldest();

  /// Drops oldest columns until the condition estimate of R is within
  /// the limit. A single nonzero column always passes. Returns the number
  /// of columns dropped.
  int prune_to_condition();

  /// Cheap diagonal-ratio estimate, refined by an SVD of R when it exceeds
  /// a tenth of the limit. Infinity for an exactly singular R; 1 when empty.
  double condition_estimate() const;

  /// Solves the least-squares problem for the current residual and returns
  /// the mixed iterate and mixed map. `std::nullopt` when R has a zero
  /// pivot; the caller should prune and retry.
  std::optional<MixingResult> solve_mixing(const Vector& f_k, const Vector& x_k,
                                           const Vector& g_k) const;

  /// Recomputes Q and R from the stored F.
  void refactor();

  void clear();

  /// Debug dump of F, Q and R in matrix-text format.
  void dump(std::ostream& out) const;

 private:
  void orthogonalize_into(Index col, const Vector& v);

  Index dimension_;
  DifferenceBasis basis_;
  QrFactors qr_;
};

/// Converts difference-form coefficients into weights over the m+1 most
/// recent iterates (oldest first). The weights sum to one.
Vector mixing_weights(const Vector& gamma);

/// One row per line, space-separated, 17 significant digits.
void write_matrix_text(std::ostream& out, const Eigen::Ref<const Matrix>& m);
Matrix read_matrix_text(std::istream& in);

}  // namespace anderson
