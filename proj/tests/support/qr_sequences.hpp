#pragma once

// Random append/drop/prune sequences checked against the dense
// constrained-least-squares oracle. Shared by unit and acceptance tests.

#include "anderson/qr_ls.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <deque>
#include <random>

namespace oracle {

struct SequenceOutcome {
  double max_rel_error = 0.0;   // mixing outputs vs oracle
  double max_drift = 0.0;       // ||QR - F||_max / ||F||_max
  double max_orth = 0.0;        // ||Q'Q - I||_max
  int checks = 0;
  int prunes = 0;
};

inline double rel_err(const Vector& a, const Vector& ref) {
  return (a - ref).norm() / std::max(ref.norm(), 1e-300);
}

/// Runs `ops` random operations on a history of depth <= m_max in dimension
/// n. A fraction of appended iterates are nearly collinear with the previous
/// step so that pruning fires under `cond_limit`.
inline SequenceOutcome random_qr_sequence(std::uint64_t seed, int n, int m_max, int ops,
                                          double cond_limit = 1e6) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  anderson::DifferenceQr qr(n, m_max, anderson::QrOptions{cond_limit, 10});
  std::deque<std::pair<Vector, Vector>> window;  // (x_i, f_i), oldest first
  SequenceOutcome out;

  window.emplace_back(gaussian(n, rng), gaussian(n, rng));
  for (int op = 0; op < ops; ++op) {
    const double roll = u01(rng);
    if (roll < 0.15 && !qr.empty()) {
      qr.drop_oldest();
      window.pop_front();
    } else {
      Vector x = gaussian(n, rng);
      Vector f = gaussian(n, rng);
      if (roll > 0.8 && window.size() >= 2) {
        // Next f-difference almost parallel to the previous one.
        const auto& prev = window[window.size() - 1];
        const auto& prev2 = window[window.size() - 2];
        f = prev.second + (prev.second - prev2.second) * (1.0 + 1e-9) + gaussian(n, rng, 1e-9);
      }
      if (qr.full()) {
        qr.drop_oldest();
        window.pop_front();
      }
      const auto& last = window.back();
      qr.append_column(f - last.second, x - last.first);
      window.emplace_back(std::move(x), std::move(f));
    }
    const int dropped = qr.prune_to_condition();
    out.prunes += dropped;
    for (int d = 0; d < dropped; ++d) window.pop_front();

    const Eigen::Index m = qr.size();
    if (static_cast<Eigen::Index>(window.size()) != m + 1) return out;  // caller asserts checks
    Matrix xs(n, m + 1), fs(n, m + 1);
    for (Eigen::Index i = 0; i <= m; ++i) {
      xs.col(i) = window[static_cast<std::size_t>(i)].first;
      fs.col(i) = window[static_cast<std::size_t>(i)].second;
    }
    const Vector& xk = window.back().first;
    const Vector& fk = window.back().second;
    const auto mix = qr.solve_mixing(fk, xk, Vector(xk + fk));
    if (!mix) continue;
    const Mixing ref = constrained_mixing(xs, fs);
    out.max_rel_error = std::max({out.max_rel_error, rel_err(mix->x_bar, ref.x_bar),
                                  rel_err(mix->y_bar, ref.y_bar)});
    if (m > 0) {
      const Matrix F = qr.basis().f_view();
      const Matrix Q = qr.q_view();
      const Matrix R = qr.r_view();
      out.max_drift = std::max(out.max_drift, (Q * R - F).cwiseAbs().maxCoeff() / F.cwiseAbs().maxCoeff());
      out.max_orth = std::max(out.max_orth,
                              (Q.transpose() * Q - Matrix::Identity(m, m)).cwiseAbs().maxCoeff());
    }
    ++out.checks;
  }
  return out;
}

}  // namespace oracle
