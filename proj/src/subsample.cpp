#include "wlsq/subsample.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "wlsq/errors.hpp"

namespace wlsq {

namespace {

constexpr double kRelativeSlack = 1e-10;

std::string describe(const FrameBounds& b) {
  std::ostringstream os;
  os.precision(17);
  os << "[" << b.lower << ", " << b.upper << "]";
  return os.str();
}

}  // namespace

FrameBounds frame_bounds(const Eigen::MatrixXcd& rows) {
  if (rows.rows() == 0 || rows.cols() == 0) return {};
  const Eigen::MatrixXcd gram = rows.adjoint() * rows;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  return {std::max(0.0, ev(0)), ev(ev.size() - 1)};
}

SubsampleConstants subsample_constants(std::size_t n, std::size_t m, double k1, double k2, double k3) {
  if (m < 1 || n < 1) throw ArgumentError("subsample constants need n, m >= 1");
  if (!(k1 > 0.0 && k2 > 0.0 && k3 >= k2)) throw ArgumentError("subsample constants need k1 > 0, 0 < k2 <= k3");
  SubsampleConstants c{k1, k2, k3};
  c.large_oversampling = static_cast<double>(n) / static_cast<double>(m) >= 47.0 * k1 / k2;
  if (c.large_oversampling) {
    c.C1 = 1642.0 * k1 / k2;
    c.C2 = (2.0 + std::sqrt(2.0)) * (2.0 + std::sqrt(2.0)) * k1;
    c.C3 = 1642.0 * k1 * k3 / k2;
  } else {
    c.C1 = 47.0 * k1 / k2;
    c.C2 = k2;
    c.C3 = 47.0 * k1 * k3 / k2;
  }
  return c;
}

SubsampleResult weaver_subsample(const Eigen::MatrixXcd& rows, std::size_t m, double k1, double k2, double k3) {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (n == 0) throw ArgumentError("weaver_subsample needs at least one row");
  if (static_cast<std::size_t>(rows.cols()) != m) {
    throw ArgumentError("rows have dimension " + std::to_string(rows.cols()) + ", expected m = " + std::to_string(m));
  }
  const auto c = subsample_constants(n, m, k1, k2, k3);
  const double ratio = static_cast<double>(m) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double norm2 = rows.row(static_cast<Eigen::Index>(i)).squaredNorm();
    if (norm2 > k1 * ratio * (1.0 + kRelativeSlack)) {
      throw ArgumentError("row " + std::to_string(i) + " has squared norm " + std::to_string(norm2) +
                          " > k1 m/n = " + std::to_string(k1 * ratio));
    }
  }
  const auto input = frame_bounds(rows);
  if (input.lower < k2 * (1.0 - kRelativeSlack) || input.upper > k3 * (1.0 + kRelativeSlack)) {
    throw ArgumentError("rows have frame bounds " + describe(input) + " outside [k2, k3] = " +
                        describe({k2, k3}));
  }

  const auto M = static_cast<Eigen::Index>(m);
  const Eigen::MatrixXcd v = rows.transpose() * std::sqrt(1.0 / ratio);  // m x n, column i = v_i
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(M, M);
  std::vector<char> taken(n, 0);
  std::vector<std::size_t> selected;
  const double upper = c.C3;
  double prev_min = 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig;
  while (true) {
    eig.compute(A);
    const Eigen::VectorXd lam = eig.eigenvalues();
    if (lam(0) < prev_min - 1e-9 * std::max(1.0, prev_min) || lam(M - 1) >= upper) {
      throw InternalError("barrier potentials lost monotonicity during subsampling");
    }
    prev_min = lam(0);
    if (lam(0) >= c.C2) break;
    if (selected.size() == n) break;
    const double lower = lam(0) - 1.0;
    // Coordinates of every candidate in the eigenbasis of A.
    const Eigen::MatrixXd y2 = (eig.eigenvectors().adjoint() * v).cwiseAbs2();
    Eigen::ArrayXd inv_l = (lam.array() - lower).inverse();
    Eigen::ArrayXd inv_u = (upper - lam.array()).inverse();
    std::size_t best = n;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const auto col = y2.col(static_cast<Eigen::Index>(i)).array();
      const double u1 = (col * inv_u).sum();
      if (u1 >= 1.0) continue;
      const double l1 = (col * inv_l).sum();
      const double l2 = (col * inv_l.square()).sum();
      const double u2 = (col * inv_u.square()).sum();
      const double score = l2 / (1.0 + l1) - u2 / (1.0 - u1);
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    if (best == n) throw InternalError("no row keeps the upper barrier feasible");
    taken[best] = 1;
    selected.push_back(best);
    const auto col = v.col(static_cast<Eigen::Index>(best));
    A.noalias() += col * col.adjoint();
  }

  SubsampleResult out;
  out.constants = c;
  for (std::size_t i = 0; i < n; ++i) {
    if (taken[i]) out.indices.push_back(i);
  }
  out.budget = out.indices.size();
  Eigen::MatrixXcd sub(static_cast<Eigen::Index>(out.budget), M);
  for (std::size_t j = 0; j < out.budget; ++j) {
    sub.row(static_cast<Eigen::Index>(j)) = rows.row(static_cast<Eigen::Index>(out.indices[j]));
  }
  const auto achieved = frame_bounds(sub);
  out.achieved = {achieved.lower / ratio, achieved.upper / ratio};
  const bool ok = static_cast<double>(out.budget) <= c.C1 * static_cast<double>(m) &&
                  out.achieved.lower >= c.C2 * (1.0 - kRelativeSlack) &&
                  out.achieved.upper <= c.C3 * (1.0 + kRelativeSlack);
  if (!ok) {
    throw InternalError("subsample misses its guarantee: |J| = " + std::to_string(out.budget) + ", bounds " +
                        describe(out.achieved) + " vs [C2, C3] = " + describe({c.C2, c.C3}));
  }
  return out;
}

Eigen::MatrixXcd frame_rows(const SamplingMatrix& matrix) {
  return matrix.dense() / std::sqrt(static_cast<double>(matrix.rows()));
}

}  // namespace wlsq
