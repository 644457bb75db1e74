#include "wlsq/recover.hpp"

#include <cmath>
#include <limits>

#include "wlsq/errors.hpp"

namespace wlsq {

namespace {

constexpr double kRankTolerance = 1e-10;

struct QrSolution {
  std::size_t rank = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};

template <typename Matrix>
QrSolution singular_summary(const Eigen::ColPivHouseholderQR<Matrix>& qr, std::size_t cols) {
  using Scalar = typename Matrix::Scalar;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Dense r = qr.matrixR().topLeftCorner(cols, cols).template triangularView<Eigen::Upper>();
  // L = Q R P^T has the singular values of R.
  const Eigen::JacobiSVD<Dense> svd(r);
  const auto& s = svd.singularValues();
  QrSolution out;
  out.sigma_max = s.size() ? s(0) : 0.0;
  out.sigma_min = s.size() ? s(s.size() - 1) : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) out.rank += s(i) > kRankTolerance * out.sigma_max;
  return out;
}

// G = P R^-1 Q1^*, with Q1 the thin factor.
template <typename Matrix>
Matrix pseudo_inverse(const Eigen::ColPivHouseholderQR<Matrix>& qr, Eigen::Index rows, Eigen::Index cols) {
  const Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix r = qr.matrixR().topLeftCorner(cols, cols);
  const Matrix rinv_qt = r.template triangularView<Eigen::Upper>().solve(q.adjoint());
  return qr.colsPermutation() * rinv_qt;
}

}  // namespace

SamplingMatrix::SamplingMatrix(const SpectralModel& model, NodeSet nodes, std::size_t m, bool weighted)
    : model_(model), nodes_(std::move(nodes)), m_(m), weighted_(weighted), is_real_(model.real_valued()) {
  const std::size_t n = nodes_.size();
  if (m < 2) throw ArgumentError("sampling matrix needs m >= 2");
  if (m - 1 > n) {
    throw ArgumentError("under-determined system: m - 1 = " + std::to_string(m - 1) + " > n = " + std::to_string(n));
  }
  if (nodes_.dim != model.dim()) throw ArgumentError("node dimension does not match the model");
  if (weighted && nodes_.variant != DensityVariant::none && nodes_.m != m) {
    throw ArgumentError("weighted matrix for m = " + std::to_string(m) + " but nodes were drawn for m = " +
                        std::to_string(nodes_.m));
  }
  row_scale_.setOnes(static_cast<Eigen::Index>(n));
  if (weighted) {
    for (std::size_t i = 0; i < n; ++i) {
      const double q = nodes_.sampling_density(i);
      row_scale_(i) = q > 0.0 ? 1.0 / std::sqrt(q) : 0.0;
    }
  }
  const auto basis = SpectralBasis::get(model, m - 1);
  const auto cols = static_cast<Eigen::Index>(m - 1);
  if (is_real_) {
    real_.resize(static_cast<Eigen::Index>(n), cols);
    std::vector<double> row(m - 1);
    for (std::size_t i = 0; i < n; ++i) {
      basis->eval_real(nodes_.point(i), m - 1, row);
      for (Eigen::Index k = 0; k < cols; ++k) real_(i, k) = row[k] * row_scale_(i);
    }
  } else {
    complex_.resize(static_cast<Eigen::Index>(n), cols);
    std::vector<cplx> row(m - 1);
    for (std::size_t i = 0; i < n; ++i) {
      basis->eval(nodes_.point(i), m - 1, row);
      for (Eigen::Index k = 0; k < cols; ++k) complex_(i, k) = row[k] * row_scale_(i);
    }
  }
}

cplx SamplingMatrix::entry(std::size_t i, std::size_t k) const {
  return is_real_ ? cplx(real_(i, k)) : complex_(i, k);
}

Eigen::MatrixXcd SamplingMatrix::dense() const { return is_real_ ? real_.cast<cplx>() : complex_; }

SamplingMatrix assemble(const SpectralModel& model, const NodeSet& nodes, std::size_t m, bool weighted) {
  return SamplingMatrix(model, nodes, m, weighted);
}

RecoveryOperator::RecoveryOperator(const SamplingMatrix& matrix)
    : model_(matrix.model()),
      m_(matrix.m()),
      nodes_(matrix.nodes()),
      weighted_(matrix.weighted()),
      is_real_(matrix.is_real()),
      row_scale_(matrix.row_scale()) {}

RecoveryOperator fit(const SamplingMatrix& matrix, std::span<const cplx> samples) {
  const auto n = static_cast<Eigen::Index>(matrix.rows());
  const auto cols = static_cast<Eigen::Index>(matrix.cols());
  if (static_cast<Eigen::Index>(samples.size()) != n) {
    throw ArgumentError("expected " + std::to_string(n) + " samples, got " + std::to_string(samples.size()));
  }
  RecoveryOperator op(matrix);
  QrSolution summary;
  if (matrix.is_real()) {
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(matrix.real_entries());
    summary = singular_summary(qr, matrix.cols());
    if (summary.rank < matrix.cols()) {
      throw RankDeficientError("sampling matrix is rank deficient", summary.rank, matrix.cols());
    }
    op.g_real_ = pseudo_inverse(qr, n, cols);
  } else {
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(matrix.complex_entries());
    summary = singular_summary(qr, matrix.cols());
    if (summary.rank < matrix.cols()) {
      throw RankDeficientError("sampling matrix is rank deficient", summary.rank, matrix.cols());
    }
    op.g_complex_ = pseudo_inverse(qr, n, cols);
  }
  op.rank_ = summary.rank;
  op.sigma_min_ = summary.sigma_min;
  op.sigma_max_ = summary.sigma_max;
  op.coefficients_ = op.apply(samples);

  Eigen::VectorXcd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = samples[i] * matrix.row_scale()(i);
  const Eigen::VectorXcd fitted = matrix.is_real() ? Eigen::VectorXcd(matrix.real_entries() * op.coefficients_)
                                                   : Eigen::VectorXcd(matrix.complex_entries() * op.coefficients_);
  op.residual_norm_ = (fitted - g).norm();
  op.sample_norm_ = g.norm();
  return op;
}

Eigen::VectorXcd RecoveryOperator::apply(std::span<const cplx> samples) const {
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  if (static_cast<Eigen::Index>(samples.size()) != n) {
    throw ArgumentError("expected " + std::to_string(n) + " samples, got " + std::to_string(samples.size()));
  }
  Eigen::VectorXcd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = samples[i] * row_scale_(i);
  if (is_real_) return g_real_ * g;
  return g_complex_ * g;
}

cplx RecoveryOperator::evaluate(std::span<const double> x) const {
  const auto basis = SpectralBasis::get(model_, m_ - 1);
  std::vector<cplx> eta(m_ - 1);
  basis->eval(x, m_ - 1, eta);
  cplx acc = 0.0;
  for (std::size_t k = 0; k + 1 < m_; ++k) acc += coefficients_(static_cast<Eigen::Index>(k)) * eta[k];
  return acc;
}

Eigen::VectorXcd RecoveryOperator::node_weights(std::span<const double> x) const {
  const auto basis = SpectralBasis::get(model_, m_ - 1);
  std::vector<cplx> eta(m_ - 1);
  basis->eval(x, m_ - 1, eta);
  const Eigen::Map<const Eigen::RowVectorXcd> row(eta.data(), static_cast<Eigen::Index>(m_ - 1));
  Eigen::RowVectorXcd w = is_real_ ? Eigen::RowVectorXcd(row * g_real_) : Eigen::RowVectorXcd(row * g_complex_);
  return (w.transpose().array() * row_scale_.array().cast<cplx>()).matrix();
}

cplx evaluate(const RecoveryOperator& op, std::span<const double> x) { return op.evaluate(x); }

SpectralNormCheck spectral_norm_check(const SamplingMatrix& matrix) {
  SpectralNormCheck out;
  out.threshold = std::sqrt(2.0 / static_cast<double>(matrix.rows()));
  QrSolution summary;
  if (matrix.is_real()) {
    summary = singular_summary(Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(matrix.real_entries()), matrix.cols());
  } else {
    summary = singular_summary(Eigen::ColPivHouseholderQR<Eigen::MatrixXcd>(matrix.complex_entries()), matrix.cols());
  }
  if (summary.rank < matrix.cols()) {
    out.norm = std::numeric_limits<double>::infinity();
    out.pass = false;
    return out;
  }
  out.norm = 1.0 / summary.sigma_min;
  out.pass = out.norm <= out.threshold;
  return out;
}

}  // namespace wlsq
