#include "anderson/problems.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace anderson {

BratuProblem BratuProblem::make(int grid_n, double lambda) {
  if (grid_n < 1) throw std::invalid_argument("BratuProblem: grid_n must be >= 1");
  BratuProblem p;
  p.grid_n = grid_n;
  p.lambda = lambda;
  p.b = Vector::Zero(p.dimension());
  return p;
}

Vector BratuProblem::apply_laplacian(const Vector& x) const {
  const int n = grid_n;
  const double s = inv_h2();
  Vector out(dimension());
  // Row-major grid: index = row * n + col.
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const Index i = static_cast<Index>(r) * n + c;
      double acc = 4.0 * x(i);
      if (c > 0) acc -= x(i - 1);
      if (c + 1 < n) acc -= x(i + 1);
      if (r > 0) acc -= x(i - n);
      if (r + 1 < n) acc -= x(i + n);
      out(i) = s * acc;
    }
  }
  return out;
}

Vector BratuProblem::map(const Vector& x) const {
  if (x.size() != dimension()) throw std::invalid_argument("bratu_map: dimension mismatch");
  const Vector ax = apply_laplacian(x);
  const double inv_diag = 1.0 / diagonal();
  Vector out(dimension());
  for (Index i = 0; i < out.size(); ++i) {
    out(i) = x(i) + (b(i) - ax(i) + lambda * std::exp(x(i))) * inv_diag;
  }
  return out;
}

MappingProblem BratuProblem::as_mapping() const {
  auto self = std::make_shared<const BratuProblem>(*this);
  MappingProblem mp;
  mp.dimension = dimension();
  mp.map = [self](const Vector& x) { return self->map(x); };
  return mp;
}

Vector bratu_map(const BratuProblem& p, const Vector& x) { return p.map(x); }

}  // namespace anderson
