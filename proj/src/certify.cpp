#include "wlsq/certify.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "wlsq/christoffel.hpp"
#include "wlsq/errors.hpp"
#include "wlsq/series.hpp"

namespace wlsq {

namespace {

constexpr Eigen::Index kBlock = 256;
constexpr double kRoundoffTolerance = 1e-10;

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

void eval_into(const SpectralBasis& basis, std::span<const double> x, std::size_t count, double* out) {
  basis.eval_real(x, count, {out, count});
}

void eval_into(const SpectralBasis& basis, std::span<const double> x, std::size_t count, cplx* out) {
  basis.eval(x, count, {out, count});
}

template <typename S>
const Mat<S>& factor_of(const FactoredOperator& op) {
  if constexpr (std::is_same_v<S, double>) {
    return op.b_real();
  } else {
    return op.b_complex();
  }
}

void check_compatible(const FactoredOperator& op, const SpectralModel& model) {
  if (op.basis_model().kind() != model.kind() || op.basis_model().dim() != model.dim()) {
    throw ArgumentError("operator basis and certificate model live on different domains");
  }
}

struct Truncation {
  std::size_t rank = 0;
  double tail = 0.0;
};

Truncation choose_truncation(const SpectralModel& model, double eps, const CertifyOptions& options) {
  if (options.fixed_rank) {
    if (*options.fixed_rank < 1) throw ArgumentError("fixed_rank must be >= 1");
    return {*options.fixed_rank, 0.0};
  }
  const std::size_t K = kernel_truncation_rank(model, eps, options.max_rank);
  return {K, pointwise_remainder(model, K)};
}

double slack_of(double tail, std::size_t n, double w2) {
  if (tail == 0.0) return 0.0;
  // sqrt(sum_{k>K} sigma^2 |eta_k(x) - <w, Phi_k>|^2) <= sqrt(tail) + |w|_2 sqrt(n tail).
  return std::sqrt(tail) * (1.0 + std::sqrt(static_cast<double>(n) * std::max(w2, 0.0)));
}

struct GridValues {
  std::vector<double> square;
  std::vector<double> raw;
  std::vector<double> w2;
};

template <typename S>
GridValues spectral_route(const FactoredOperator& op, const SpectralModel& model, const std::vector<double>& points,
                          std::size_t count, std::size_t K, bool parallel) {
  const auto d = static_cast<std::size_t>(model.dim());
  const auto M = static_cast<Eigen::Index>(op.ranks());
  const auto n = static_cast<Eigen::Index>(op.nodes().size());
  const auto Ke = static_cast<Eigen::Index>(K);
  const auto cert_basis = SpectralBasis::get(model, K);
  const auto op_basis = SpectralBasis::get(op.basis_model(), std::max<std::size_t>(op.ranks(), 1));
  Eigen::VectorXd sigma(Ke);
  for (Eigen::Index k = 0; k < Ke; ++k) sigma(k) = cert_basis->sigma(static_cast<std::size_t>(k) + 1);

  // C = B Phi_K diag(sigma), accumulated over node blocks with one partial per thread.
  Mat<S> C = Mat<S>::Zero(M, Ke);
  Mat<S> H = Mat<S>::Zero(M, M);
  if (M > 0 && n > 0) {
    const auto& B = factor_of<S>(op);
    const Eigen::Index blocks = (n + kBlock - 1) / kBlock;
    const int threads = parallel ? omp_get_max_threads() : 1;
    std::vector<Mat<S>> partial(static_cast<std::size_t>(threads));
#pragma omp parallel num_threads(threads) if (parallel)
    {
      const int tid = omp_get_thread_num();
      Mat<S> local = Mat<S>::Zero(M, Ke);
      RowMat<S> psi(kBlock, Ke);
#pragma omp for schedule(static)
      for (Eigen::Index b = 0; b < blocks; ++b) {
        const Eigen::Index i0 = b * kBlock;
        const Eigen::Index rows = std::min(kBlock, n - i0);
        for (Eigen::Index r = 0; r < rows; ++r) {
          eval_into(*cert_basis, op.nodes().point(static_cast<std::size_t>(i0 + r)), K, psi.row(r).data());
        }
        local.noalias() += B.middleCols(i0, rows) * psi.topRows(rows);
      }
      partial[static_cast<std::size_t>(tid)] = std::move(local);
    }
    for (const auto& p : partial) {
      if (p.size()) C += p;
    }
    C = C * sigma.asDiagonal();
    H.noalias() = B * B.adjoint();
  }

  GridValues out;
  out.square.resize(count);
  out.w2.resize(count);
  const auto total = static_cast<Eigen::Index>(count);
  const Eigen::Index blocks = (total + kBlock - 1) / kBlock;
#pragma omp parallel if (parallel)
  {
    RowMat<S> psi(kBlock, Ke);
    RowMat<S> eta(kBlock, std::max<Eigen::Index>(M, 1));
    Mat<S> err;
#pragma omp for schedule(static)
    for (Eigen::Index b = 0; b < blocks; ++b) {
      const Eigen::Index p0 = b * kBlock;
      const Eigen::Index rows = std::min(kBlock, total - p0);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const std::span<const double> x(points.data() + static_cast<std::size_t>(p0 + r) * d, d);
        eval_into(*cert_basis, x, K, psi.row(r).data());
        if (M > 0) eval_into(*op_basis, x, static_cast<std::size_t>(M), eta.row(r).data());
      }
      err = psi.topRows(rows) * sigma.asDiagonal();
      if (M > 0) err.noalias() -= eta.topRows(rows).leftCols(M) * C;
      for (Eigen::Index r = 0; r < rows; ++r) {
        const auto i = static_cast<std::size_t>(p0 + r);
        out.square[i] = err.row(r).squaredNorm();
        if (M > 0) {
          const Vec<S> e = eta.row(r).leftCols(M).transpose();
          out.w2[i] = std::real(e.dot(H.transpose() * e));
        } else {
          out.w2[i] = 0.0;
        }
      }
    }
  }
  out.raw = out.square;
  return out;
}

template <typename S>
Mat<S> node_features(const FactoredOperator& op, const SpectralBasis& basis, std::size_t K) {
  const auto n = static_cast<Eigen::Index>(op.nodes().size());
  RowMat<S> psi(n, static_cast<Eigen::Index>(K));
  for (Eigen::Index i = 0; i < n; ++i) eval_into(basis, op.nodes().point(static_cast<std::size_t>(i)), K, psi.row(i).data());
  return psi;
}

template <typename S>
GridValues gram_route(const FactoredOperator& op, const SpectralModel& model, const std::vector<double>& points,
                      std::size_t count, std::size_t K, bool parallel) {
  const auto d = static_cast<std::size_t>(model.dim());
  const auto M = static_cast<Eigen::Index>(op.ranks());
  const auto Ke = static_cast<Eigen::Index>(K);
  const auto cert_basis = SpectralBasis::get(model, K);
  const auto op_basis = SpectralBasis::get(op.basis_model(), std::max<std::size_t>(op.ranks(), 1));
  Eigen::VectorXd sigma_sq(Ke);
  for (Eigen::Index k = 0; k < Ke; ++k) sigma_sq(k) = std::pow(cert_basis->sigma(static_cast<std::size_t>(k) + 1), 2);
  const Mat<S> psi = node_features<S>(op, *cert_basis, K);
  // gram(i, j) = K(x^i, x^j).
  const Mat<S> gram = psi * sigma_sq.asDiagonal() * psi.adjoint();

  GridValues out;
  out.square.resize(count);
  out.raw.resize(count);
  out.w2.resize(count);
  const auto total = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel if (parallel)
  {
    Vec<S> px(Ke);
    Vec<S> eta(std::max<Eigen::Index>(M, 1));
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < total; ++i) {
      const std::span<const double> x(points.data() + static_cast<std::size_t>(i) * d, d);
      eval_into(*cert_basis, x, K, px.data());
      const double kxx = (px.cwiseAbs2().array() * sigma_sq.array()).sum();
      double raw = kxx;
      double w2 = 0.0;
      if (M > 0 && psi.rows() > 0) {
        eval_into(*op_basis, x, static_cast<std::size_t>(M), eta.data());
        const Vec<S> w = factor_of<S>(op).transpose() * eta.head(M);
        // kx(i) = K(x, x^i).
        const Vec<S> kx = psi.conjugate() * (sigma_sq.array() * px.array()).matrix();
        const Vec<S> gw = gram * w.conjugate();
        raw += -2.0 * std::real(w.dot(kx)) + std::real((w.transpose() * gw)(0));
        w2 = w.squaredNorm();
      }
      out.raw[static_cast<std::size_t>(i)] = raw;
      out.square[static_cast<std::size_t>(i)] = std::max(raw, 0.0);
      out.w2[static_cast<std::size_t>(i)] = w2;
    }
  }
  return out;
}

template <typename S>
PointwiseWce direct_wce(const FactoredOperator& op, const SpectralModel& model, std::span<const double> x,
                        const Truncation& t) {
  const auto basis = SpectralBasis::get(model, t.rank);
  const auto Ke = static_cast<Eigen::Index>(t.rank);
  Vec<S> px(Ke);
  eval_into(*basis, x, t.rank, px.data());
  Vec<S> u = Vec<S>::Zero(Ke);
  double w2 = 0.0;
  if (op.ranks() > 0 && op.nodes().size() > 0) {
    const Eigen::VectorXcd wc = op.weights(x);
    Vec<S> row(Ke);
    for (std::size_t i = 0; i < op.nodes().size(); ++i) {
      eval_into(*basis, op.nodes().point(i), t.rank, row.data());
      if constexpr (std::is_same_v<S, double>) {
        u += wc(static_cast<Eigen::Index>(i)).real() * row;
      } else {
        u += wc(static_cast<Eigen::Index>(i)) * row;
      }
    }
    w2 = wc.squaredNorm();
  }
  double e2 = 0.0;
  for (Eigen::Index k = 0; k < Ke; ++k) {
    const double sigma = basis->sigma(static_cast<std::size_t>(k) + 1);
    e2 += sigma * sigma * std::norm(px(k) - u(k));
  }
  PointwiseWce out;
  out.value = std::sqrt(e2);
  out.raw_square = e2;
  out.truncation_rank = t.rank;
  out.slack = slack_of(t.tail, op.nodes().size(), w2);
  return out;
}

}  // namespace

FactoredOperator::FactoredOperator(const SpectralModel& model) : model_(model), is_real_(model.real_valued()) {}

FactoredOperator::FactoredOperator(const RecoveryOperator& op)
    : model_(op.model()), ranks_(op.m() - 1), nodes_(op.nodes()), is_real_(op.is_real()) {
  if (is_real_) {
    b_real_ = op.g_real() * op.row_scale().asDiagonal();
  } else {
    b_complex_ = op.g_complex() * op.row_scale().asDiagonal();
  }
}

FactoredOperator FactoredOperator::zero(const SpectralModel& model) {
  FactoredOperator op(model);
  op.nodes_.dim = model.dim();
  return op;
}

Eigen::VectorXcd FactoredOperator::weights(std::span<const double> x) const {
  if (ranks_ == 0) return Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(nodes_.size()));
  const auto basis = SpectralBasis::get(model_, ranks_);
  std::vector<cplx> eta(ranks_);
  basis->eval(x, ranks_, eta);
  const Eigen::Map<const Eigen::VectorXcd> e(eta.data(), static_cast<Eigen::Index>(ranks_));
  if (is_real_) return b_real_.transpose().cast<cplx>() * e;
  return b_complex_.transpose() * e;
}

std::size_t kernel_truncation_rank(const SpectralModel& model, double eps, std::size_t max_rank) {
  if (!(eps > 0.0)) throw ArgumentError("kernel truncation needs eps > 0");
  std::size_t hi = 1;
  while (pointwise_remainder(model, hi) > eps) {
    if (hi >= max_rank) {
      throw ResourceError("kernel truncation budget exhausted at rank " + std::to_string(hi),
                          pointwise_remainder(model, hi));
    }
    hi = std::min(2 * hi, max_rank);
  }
  std::size_t lo = hi / 2;  // remainder(lo) > eps unless lo == 0
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (pointwise_remainder(model, mid) <= eps) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

KernelValue kernel_eval(const SpectralModel& model, std::span<const double> x, std::span<const double> y, double eps,
                        std::size_t max_rank) {
  model.check_point(x);
  model.check_point(y);
  const std::size_t K = kernel_truncation_rank(model, eps, max_rank);
  const auto basis = SpectralBasis::get(model, K);
  std::vector<cplx> ex(K);
  std::vector<cplx> ey(K);
  basis->eval(x, K, ex);
  basis->eval(y, K, ey);
  cplx acc = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double s = basis->sigma(k + 1);
    acc += s * s * ex[k] * std::conj(ey[k]);
  }
  return {acc, pointwise_remainder(model, K), K};
}

double default_kernel_rel_eps(const SpectralModel& model) {
  return model.kind() == BasisKind::legendre ? 1e-2 : 1e-3;
}

double kernel_eps(const SpectralModel& model, std::size_t m, double rel_eps) {
  if (!(rel_eps > 0.0)) throw ArgumentError("kernel_rel_eps must be positive");
  m = std::max<std::size_t>(m, 1);
  if (model.unimodular()) return rel_eps * make_profile(model)->sigma_sq_tail(m).value;
  // The Legendre tail peaks at the endpoints.
  const std::vector<double> one{1.0};
  const auto t = tail_eval(model, m, one, 1e-6 * pointwise_remainder(model, m));
  return rel_eps * t.value;
}

PointwiseWce pointwise_wce(const FactoredOperator& op, const SpectralModel& model, std::span<const double> x,
                           double eps, const CertifyOptions& options) {
  check_compatible(op, model);
  model.check_point(x);
  const auto t = choose_truncation(model, eps, options);
  if (options.route == CertifyRoute::gram) {
    const std::vector<double> point(x.begin(), x.end());
    const auto g = op.is_real() ? gram_route<double>(op, model, point, 1, t.rank, false)
                                : gram_route<cplx>(op, model, point, 1, t.rank, false);
    return {std::sqrt(g.square[0]), slack_of(t.tail, op.nodes().size(), g.w2[0]), t.rank, g.raw[0]};
  }
  return op.is_real() ? direct_wce<double>(op, model, x, t) : direct_wce<cplx>(op, model, x, t);
}

ErrorCertificate certify_sup(const FactoredOperator& op, const SpectralModel& model, const GridSpec& grid, double eps,
                             const CertifyOptions& options) {
  check_compatible(op, model);
  grid.validate(model);
  const auto t = choose_truncation(model, eps, options);
  const auto points = grid_points(model, grid);
  const std::size_t count = grid.size();
  const bool parallel = options.exec == Exec::parallel;
  GridValues g;
  if (options.route == CertifyRoute::gram) {
    g = op.is_real() ? gram_route<double>(op, model, points, count, t.rank, parallel)
                     : gram_route<cplx>(op, model, points, count, t.rank, parallel);
  } else {
    g = op.is_real() ? spectral_route<double>(op, model, points, count, t.rank, parallel)
                     : spectral_route<cplx>(op, model, points, count, t.rank, parallel);
  }

  ErrorCertificate cert;
  cert.grid = grid;
  cert.route = options.route;
  cert.truncation_rank = t.rank;
  cert.tail_bound = t.tail;
  cert.min_raw_square = count ? g.raw[0] : 0.0;
  if (options.keep_values) {
    cert.values.resize(count);
    cert.slacks.resize(count);
  }
  double best = -1.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double value = std::sqrt(g.square[i]);
    const double slack = slack_of(t.tail, op.nodes().size(), g.w2[i]);
    if (value > best) {
      best = value;
      cert.argmax_index = i;
    }
    cert.truncation_slack = std::max(cert.truncation_slack, slack);
    cert.min_raw_square = std::min(cert.min_raw_square, g.raw[i]);
    cert.roundoff_violations += g.raw[i] < -kRoundoffTolerance;
    if (options.keep_values) {
      cert.values[i] = value;
      cert.slacks[i] = slack;
    }
  }
  cert.sup_value = std::max(best, 0.0);
  const auto d = static_cast<std::size_t>(model.dim());
  cert.argmax.assign(points.begin() + static_cast<std::ptrdiff_t>(cert.argmax_index * d),
                     points.begin() + static_cast<std::ptrdiff_t>((cert.argmax_index + 1) * d));
  return cert;
}

}  // namespace wlsq
