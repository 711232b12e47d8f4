#include "anderson/problems.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace anderson {

LinearDiagProblem LinearDiagProblem::reference_instance() {
  LinearDiagProblem p;
  p.diag.resize(19);
  for (Index i = 0; i < 19; ++i) p.diag(i) = static_cast<double>(i + 1) / 10.0;
  p.b = Vector::Ones(19);
  p.x0 = Vector::Zero(19);
  return p;
}

void LinearDiagProblem::validate() const {
  if (diag.size() == 0 || b.size() != diag.size() || x0.size() != diag.size()) {
    throw std::invalid_argument("LinearDiagProblem: inconsistent sizes");
  }
  for (Index i = 0; i < diag.size(); ++i) {
    if (!(diag(i) > 0.0 && diag(i) < 2.0)) {
      throw std::invalid_argument("LinearDiagProblem: eigenvalues must lie in (0, 2)");
    }
  }
}

Vector LinearDiagProblem::map(const Vector& x) const {
  if (x.size() != diag.size()) throw std::invalid_argument("linear_map: dimension mismatch");
  return x - (diag.cwiseProduct(x) - b);
}

MappingProblem LinearDiagProblem::as_mapping() const {
  auto self = std::make_shared<const LinearDiagProblem>(*this);
  MappingProblem mp;
  mp.dimension = diag.size();
  mp.map = [self](const Vector& x) { return self->map(x); };
  return mp;
}

Vector linear_map(const LinearDiagProblem& p, const Vector& x) { return p.map(x); }

double elliptic_norm(const LinearDiagProblem& p, const Vector& v) {
  if (v.size() != p.diag.size()) throw std::invalid_argument("elliptic_norm: dimension mismatch");
  return std::sqrt(v.cwiseAbs2().cwiseQuotient(p.diag).sum());
}

}  // namespace anderson
