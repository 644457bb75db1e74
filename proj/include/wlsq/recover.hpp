#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "wlsq/sampler.hpp"
#include "wlsq/spectral.hpp"

namespace wlsq {

/// n x (m-1) matrix with entries eta_k(x^i) / sqrt(rho_i) (weighted) or
/// eta_k(x^i) (plain); rho_i is the node's sampling density against rho_D.
/// Real-valued models keep a real matrix.
class SamplingMatrix {
 public:
  SamplingMatrix(const SpectralModel& model, NodeSet nodes, std::size_t m, bool weighted);

  const SpectralModel& model() const { return model_; }
  const NodeSet& nodes() const { return nodes_; }
  std::size_t m() const { return m_; }
  bool weighted() const { return weighted_; }
  bool is_real() const { return is_real_; }
  std::size_t rows() const { return nodes_.size(); }
  std::size_t cols() const { return m_ - 1; }
  cplx entry(std::size_t i, std::size_t k) const;
  /// 1/sqrt(rho_i) when weighted, 1 otherwise.
  const Eigen::VectorXd& row_scale() const { return row_scale_; }
  const Eigen::MatrixXd& real_entries() const { return real_; }
  const Eigen::MatrixXcd& complex_entries() const { return complex_; }
  Eigen::MatrixXcd dense() const;

 private:
  SpectralModel model_;
  NodeSet nodes_;
  std::size_t m_;
  bool weighted_;
  bool is_real_;
  Eigen::VectorXd row_scale_;
  Eigen::MatrixXd real_;
  Eigen::MatrixXcd complex_;
};

/// Throws ArgumentError when m < 2 or m - 1 > n, or when a weighted matrix is
/// requested for nodes drawn for a different m.
SamplingMatrix assemble(const SpectralModel& model, const NodeSet& nodes, std::size_t m, bool weighted);

/// Linear sampling operator S f = sum_k c_k eta_k with c = G diag(row_scale) f(X),
/// G = (L* L)^-1 L*. Immutable.
class RecoveryOperator {
 public:
  const SpectralModel& model() const { return model_; }
  std::size_t m() const { return m_; }
  const NodeSet& nodes() const { return nodes_; }
  bool weighted() const { return weighted_; }
  bool is_real() const { return is_real_; }
  bool rank_ok() const { return rank_ == m_ - 1; }
  std::size_t rank() const { return rank_; }
  double sigma_min() const { return sigma_min_; }
  double sigma_max() const { return sigma_max_; }
  /// ||L c - g||_2 for the fitted samples.
  double residual_norm() const { return residual_norm_; }
  double sample_norm() const { return sample_norm_; }

  const Eigen::VectorXcd& coefficients() const { return coefficients_; }
  const Eigen::VectorXd& row_scale() const { return row_scale_; }
  /// (m-1) x n; the real part only is populated for real models.
  const Eigen::MatrixXd& g_real() const { return g_real_; }
  const Eigen::MatrixXcd& g_complex() const { return g_complex_; }

  /// sum_k c_k eta_k(x).
  cplx evaluate(std::span<const double> x) const;
  /// w_i(x) with S f(x) = sum_i w_i(x) f(x^i).
  Eigen::VectorXcd node_weights(std::span<const double> x) const;
  /// Coefficients for another sample vector on the same nodes.
  Eigen::VectorXcd apply(std::span<const cplx> samples) const;

 private:
  friend RecoveryOperator fit(const SamplingMatrix& matrix, std::span<const cplx> samples);
  explicit RecoveryOperator(const SamplingMatrix& matrix);

  SpectralModel model_;
  std::size_t m_;
  NodeSet nodes_;
  bool weighted_;
  bool is_real_;
  std::size_t rank_ = 0;
  double sigma_min_ = 0.0;
  double sigma_max_ = 0.0;
  double residual_norm_ = 0.0;
  double sample_norm_ = 0.0;
  Eigen::VectorXcd coefficients_;
  Eigen::VectorXd row_scale_;
  Eigen::MatrixXd g_real_;
  Eigen::MatrixXcd g_complex_;
};

/// Least squares via column-pivoted Householder QR. Throws RankDeficientError
/// (carrying the numerical rank at tolerance 1e-10 sigma_max) when L lacks
/// full column rank.
RecoveryOperator fit(const SamplingMatrix& matrix, std::span<const cplx> samples);

cplx evaluate(const RecoveryOperator& op, std::span<const double> x);

struct SpectralNormCheck {
  double norm = 0.0;       // ||(L* L)^-1 L*||_{2->2} = 1 / sigma_min(L)
  double threshold = 0.0;  // sqrt(2/n)
  bool pass = false;
};

/// Rank-deficient input gives norm = +inf and pass = false.
SpectralNormCheck spectral_norm_check(const SamplingMatrix& matrix);

}  // namespace wlsq
