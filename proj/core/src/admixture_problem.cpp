#include "anderson/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>

namespace anderson {

namespace {

double clamp_prob(double p) { return std::clamp(p, kAdmixtureEps, 1.0 - kAdmixtureEps); }

void check_size(const AdmixtureProblem& p, const Vector& params) {
  if (params.size() != p.dimension()) {
    throw std::invalid_argument("admixture: parameter vector has wrong length");
  }
}

}  // namespace

Matrix AdmixtureProblem::decode_f(const Vector& params) const {
  check_size(*this, params);
  Eigen::Map<const Matrix> U(params.data(), K, J);
  Matrix F(K, J);
  for (Index j = 0; j < J; ++j) {
    for (Index k = 0; k < K; ++k) F(k, j) = clamp_prob(1.0 / (1.0 + std::exp(-U(k, j))));
  }
  return F;
}

Matrix AdmixtureProblem::decode_q(const Vector& params) const {
  check_size(*this, params);
  Eigen::Map<const Matrix> V(params.data() + static_cast<Index>(K) * J, n_ind, K);
  Matrix Q(n_ind, K);
  for (Index i = 0; i < n_ind; ++i) {
    const double vmax = V.row(i).maxCoeff();
    double total = 0.0;
    for (Index k = 0; k < K; ++k) {
      Q(i, k) = std::exp(V(i, k) - vmax);
      total += Q(i, k);
    }
    Q.row(i) /= total;
  }
  return Q;
}

Vector AdmixtureProblem::encode(const Matrix& F, const Matrix& Q) const {
  Vector params(dimension());
  Eigen::Map<Matrix> U(params.data(), K, J);
  Eigen::Map<Matrix> V(params.data() + static_cast<Index>(K) * J, n_ind, K);
  for (Index j = 0; j < J; ++j) {
    for (Index k = 0; k < K; ++k) {
      const double f = clamp_prob(F(k, j));
      U(k, j) = std::log(f / (1.0 - f));
    }
  }
  // Centred log-proportions: softmax-invariant shift fixed so rows sum to 0.
  for (Index i = 0; i < n_ind; ++i) {
    double mean = 0.0;
    for (Index k = 0; k < K; ++k) {
      V(i, k) = std::log(std::max(Q(i, k), kAdmixtureEps));
      mean += V(i, k);
    }
    mean /= K;
    for (Index k = 0; k < K; ++k) V(i, k) -= mean;
  }
  return params;
}

Vector AdmixtureProblem::em_map(const Vector& params) const {
  const Matrix F = decode_f(params);
  const Matrix Q = decode_q(params);

  Matrix f_num = Matrix::Zero(K, J);
  Matrix f_den = Matrix::Zero(K, J);
  Matrix q_acc = Matrix::Zero(n_ind, K);
  Vector a(K);
  Vector b(K);
  for (Index j = 0; j < J; ++j) {
    for (Index i = 0; i < n_ind; ++i) {
      double p_major = 0.0;
      double p_minor = 0.0;
      for (Index k = 0; k < K; ++k) {
        a(k) = Q(i, k) * F(k, j);
        b(k) = Q(i, k) * (1.0 - F(k, j));
        p_major += a(k);
        p_minor += b(k);
      }
      p_major = clamp_prob(p_major);
      p_minor = clamp_prob(p_minor);
      const double x = X(i, j);
      const double wa = x / p_major;
      const double wb = (2.0 - x) / p_minor;
      for (Index k = 0; k < K; ++k) {
        const double ea = wa * a(k);
        const double eb = wb * b(k);
        f_num(k, j) += ea;
        f_den(k, j) += ea + eb;
        q_acc(i, k) += ea + eb;
      }
    }
  }

  Matrix F_new(K, J);
  for (Index j = 0; j < J; ++j) {
    for (Index k = 0; k < K; ++k) {
      F_new(k, j) = f_den(k, j) > 0.0 ? f_num(k, j) / f_den(k, j) : F(k, j);
    }
  }
  const Matrix Q_new = q_acc / (2.0 * J);
  return encode(F_new, Q_new);
}

double AdmixtureProblem::loglik(const Matrix& F, const Matrix& Q) const {
  // Long-double accumulation keeps the sum accurate enough to resolve
  // late-stage EM increments. One log per cell: x log a + (2-x) log b = log(a^x b^(2-x)).
  long double total = 0.0L;
  for (Index j = 0; j < J; ++j) {
    for (Index i = 0; i < n_ind; ++i) {
      double p_major = 0.0;
      double p_minor = 0.0;
      for (Index k = 0; k < K; ++k) {
        p_major += Q(i, k) * F(k, j);
        p_minor += Q(i, k) * (1.0 - F(k, j));
      }
      p_major = clamp_prob(p_major);
      p_minor = clamp_prob(p_minor);
      double cell = 0.0;
      switch (X(i, j)) {
        case 0: cell = p_minor * p_minor; break;
        case 1: cell = p_major * p_minor; break;
        default: cell = p_major * p_major; break;
      }
      total += std::log(cell);
    }
  }
  return static_cast<double>(total);
}

double AdmixtureProblem::loglik(const Vector& params) const {
  return loglik(decode_f(params), decode_q(params));
}

MappingProblem AdmixtureProblem::as_mapping() const {
  auto self = std::make_shared<const AdmixtureProblem>(*this);
  MappingProblem mp;
  mp.dimension = dimension();
  mp.map = [self](const Vector& x) { return self->em_map(x); };
  mp.objective = [self](const Vector& x) {
    if (!x.allFinite()) return -std::numeric_limits<double>::infinity();
    return self->loglik(x);
  };
  return mp;
}

void AdmixtureProblem::write_genotypes_csv(std::ostream& out) const {
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) {
      if (j) out << ',';
      out << X(i, j);
    }
    out << '\n';
  }
}

Eigen::MatrixXi sample_genotypes(const Matrix& F, const Matrix& Q, Rng& rng) {
  if (F.rows() != Q.cols()) throw std::invalid_argument("sample_genotypes: K mismatch");
  Eigen::MatrixXi X(Q.rows(), F.cols());
  for (Index i = 0; i < Q.rows(); ++i) {
    for (Index j = 0; j < F.cols(); ++j) {
      const double p = std::clamp(Q.row(i).dot(F.col(j)), 0.0, 1.0);
      std::binomial_distribution<int> draw(2, p);
      X(i, j) = draw(rng);
    }
  }
  return X;
}

AdmixtureProblem gen_admixture_data(std::uint64_t seed, int K, int J, int n_ind) {
  if (K < 2 || J < 1 || n_ind < 1) {
    throw std::invalid_argument("gen_admixture_data: need K >= 2, J >= 1, n_ind >= 1");
  }
  Rng rng(seed);
  AdmixtureProblem p;
  p.K = K;
  p.J = J;
  p.n_ind = n_ind;

  std::uniform_real_distribution<double> freq(0.05, 0.95);
  p.f_true.resize(K, J);
  for (Index j = 0; j < J; ++j) {
    for (Index k = 0; k < K; ++k) p.f_true(k, j) = freq(rng);
  }
  std::exponential_distribution<double> expo(1.0);
  p.q_true.resize(n_ind, K);
  for (Index i = 0; i < n_ind; ++i) {
    for (Index k = 0; k < K; ++k) p.q_true(i, k) = expo(rng);
    p.q_true.row(i) /= p.q_true.row(i).sum();
  }
  p.X = sample_genotypes(p.f_true, p.q_true, rng);

  std::uniform_real_distribution<double> start(-0.5, 0.5);
  p.start.resize(p.dimension());
  for (Index i = 0; i < p.start.size(); ++i) p.start(i) = start(rng);
  return p;
}

Vector admixture_em_map(const AdmixtureProblem& p, const Vector& params) { return p.em_map(params); }

double admixture_loglik(const AdmixtureProblem& p, const Vector& params) { return p.loglik(params); }

}  // namespace anderson
