#include "anderson/qr_ls.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

namespace anderson {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

DifferenceQr::DifferenceQr(Index dimension, Index max_cols, QrOptions options)
    : dimension_(dimension) {
  if (dimension < 1) throw std::invalid_argument("DifferenceQr: dimension must be >= 1");
  if (max_cols < 0) throw std::invalid_argument("DifferenceQr: max_cols must be >= 0");
  if (!(options.cond_limit > 1.0)) {
    throw std::invalid_argument("DifferenceQr: cond_limit must exceed 1");
  }
  if (options.refactor_period < 1) {
    throw std::invalid_argument("DifferenceQr: refactor_period must be >= 1");
  }
  basis_.F = Matrix::Zero(dimension, max_cols);
  basis_.X = Matrix::Zero(dimension, max_cols);
  basis_.max_cols = max_cols;
  qr_.Q = Matrix::Zero(dimension, max_cols);
  qr_.R = Matrix::Zero(max_cols, max_cols);
  qr_.cond_limit = options.cond_limit;
  qr_.refactor_period = options.refactor_period;
}

void DifferenceQr::orthogonalize_into(Index col, const Vector& v_in) {
  Vector v = v_in;
  auto r = qr_.R.col(col);
  r.setZero();
  // Two Gram-Schmidt passes keep Q orthonormal to working precision.
  for (int pass = 0; pass < 2; ++pass) {
    for (Index j = 0; j < col; ++j) {
      const double h = qr_.Q.col(j).dot(v);
      r(j) += h;
      v.noalias() -= h * qr_.Q.col(j);
    }
  }
  const double norm = v.norm();
  r(col) = norm;
  if (norm > 0.0) {
    qr_.Q.col(col) = v / norm;
    return;
  }
  // Exactly dependent column: R gets a zero pivot, and Q still needs an
  // orthonormal completion so that later rotations stay valid.
  for (Index e = 0; e < dimension_; ++e) {
    Vector u = Vector::Unit(dimension_, e);
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j < col; ++j) u.noalias() -= qr_.Q.col(j).dot(u) * qr_.Q.col(j);
    }
    const double un = u.norm();
    if (un > 0.5) {
      qr_.Q.col(col) = u / un;
      return;
    }
  }
  qr_.Q.col(col).setZero();
}

void DifferenceQr::append_column(const Vector& f_diff, const Vector& x_diff) {
  if (f_diff.size() != dimension_ || x_diff.size() != dimension_) {
    throw std::invalid_argument("append_column: dimension mismatch");
  }
  if (full()) throw std::logic_error("append_column: history is full, drop first");
  if (!all_finite(f_diff) || !all_finite(x_diff)) {
    throw NumericalInputError("append_column: non-finite difference column");
  }
  const Index c = basis_.cols;
  basis_.F.col(c) = f_diff;
  basis_.X.col(c) = x_diff;
  orthogonalize_into(c, f_diff);
  basis_.cols = c + 1;
}

void DifferenceQr::drop_oldest() {
  const Index m = basis_.cols;
  if (m == 0) throw EmptyHistoryError("drop_oldest: history is empty");

  for (Index j = 0; j + 1 < m; ++j) {
    basis_.F.col(j) = basis_.F.col(j + 1);
    basis_.X.col(j) = basis_.X.col(j + 1);
  }
  basis_.F.col(m - 1).setZero();
  basis_.X.col(m - 1).setZero();

  // R without its first column is upper Hessenberg; rotate it back.
  auto& R = qr_.R;
  auto& Q = qr_.Q;
  for (Index j = 0; j + 1 < m; ++j) R.col(j).head(m) = R.col(j + 1).head(m);
  R.col(m - 1).setZero();

  for (Index i = 0; i + 1 < m; ++i) {
    const double a = R(i, i);
    const double b = R(i + 1, i);
    if (b == 0.0) continue;
    const double rho = std::hypot(a, b);
    const double c = a / rho;
    const double s = b / rho;
    for (Index j = i; j + 1 < m; ++j) {
      const double top = R(i, j);
      const double bot = R(i + 1, j);
      R(i, j) = c * top + s * bot;
      R(i + 1, j) = -s * top + c * bot;
    }
    R(i + 1, i) = 0.0;
    auto qi = Q.col(i);
    auto qn = Q.col(i + 1);
    for (Index r = 0; r < dimension_; ++r) {
      const double a_r = qi(r);
      const double b_r = qn(r);
      qi(r) = c * a_r + s * b_r;
      qn(r) = -s * a_r + c * b_r;
    }
  }
  R.row(m - 1).setZero();
  Q.col(m - 1).setZero();
  basis_.cols = m - 1;

  ++qr_.rotations_since_refactor;
  if (qr_.rotations_since_refactor >= qr_.refactor_period) refactor();
}

void DifferenceQr::refactor() {
  qr_.Q.setZero();
  qr_.R.setZero();
  for (Index j = 0; j < basis_.cols; ++j) orthogonalize_into(j, basis_.F.col(j));
  qr_.rotations_since_refactor = 0;
}

void DifferenceQr::clear() {
  basis_.F.setZero();
  basis_.X.setZero();
  basis_.cols = 0;
  qr_.Q.setZero();
  qr_.R.setZero();
  qr_.rotations_since_refactor = 0;
}

double DifferenceQr::condition_estimate() const {
  const Index m = basis_.cols;
  if (m == 0) return 1.0;
  const auto diag = qr_.R.diagonal().head(m).cwiseAbs();
  const double hi = diag.maxCoeff();
  const double lo = diag.minCoeff();
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  const double cheap = hi / lo;
  if (cheap <= 0.1 * qr_.cond_limit) return cheap;

  Eigen::JacobiSVD<Matrix> svd(r_view());
  const auto& sv = svd.singularValues();
  const double smin = sv(m - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

int DifferenceQr::prune_to_condition() {
  int dropped = 0;
  while (basis_.cols >= 2 && condition_estimate() > qr_.cond_limit) {
    drop_oldest();
    ++dropped;
  }
  if (basis_.cols == 1 && qr_.R(0, 0) == 0.0) {
    drop_oldest();
    ++dropped;
  }
  return dropped;
}

std::optional<MixingResult> DifferenceQr::solve_mixing(const Vector& f_k, const Vector& x_k,
                                                       const Vector& g_k) const {
  const Index m = basis_.cols;
  if (f_k.size() != dimension_ || x_k.size() != dimension_ || g_k.size() != dimension_) {
    throw std::invalid_argument("solve_mixing: dimension mismatch");
  }
  if (m == 0) return MixingResult{x_k, g_k, Vector()};

  const auto R = r_view();
  for (Index i = 0; i < m; ++i) {
    if (R(i, i) == 0.0) return std::nullopt;
  }
  Vector gamma = q_view().transpose() * f_k;
  R.triangularView<Eigen::Upper>().solveInPlace(gamma);
  if (!gamma.allFinite()) return std::nullopt;

  MixingResult out;
  Vector dx = basis_.x_view() * gamma;
  out.x_bar = x_k - dx;
  out.y_bar = g_k - dx;
  out.y_bar.noalias() -= basis_.f_view() * gamma;
  out.gamma = std::move(gamma);
  return out;
}

void DifferenceQr::dump(std::ostream& out) const {
  out << "# F " << dimension_ << ' ' << basis_.cols << '\n';
  write_matrix_text(out, basis_.f_view());
  out << "# Q " << dimension_ << ' ' << basis_.cols << '\n';
  write_matrix_text(out, q_view());
  out << "# R " << basis_.cols << ' ' << basis_.cols << '\n';
  write_matrix_text(out, r_view());
}

Vector mixing_weights(const Vector& gamma) {
  const Index m = gamma.size();
  Vector alpha(m + 1);
  if (m == 0) {
    alpha(0) = 1.0;
    return alpha;
  }
  alpha(0) = gamma(0);
  for (Index i = 1; i < m; ++i) alpha(i) = gamma(i) - gamma(i - 1);
  alpha(m) = 1.0 - gamma(m - 1);
  return alpha;
}

void write_matrix_text(std::ostream& out, const Eigen::Ref<const Matrix>& m) {
  const auto old_flags = out.flags();
  const auto old_prec = out.precision();
  out << std::setprecision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
  out.flags(old_flags);
  out.precision(old_prec);
}

Matrix read_matrix_text(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v = 0.0;
    while (ls >> v) row.push_back(v);
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("read_matrix_text: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix();
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace anderson
