#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wlsq/grid.hpp"
#include "wlsq/recover.hpp"
#include "wlsq/spectral.hpp"

namespace wlsq {

/// K(x, y) = sum_k sigma_k^2 eta_k(x) conj(eta_k(y)); |K - value| <= remainder.
struct KernelValue {
  cplx value = 0.0;
  double remainder = 0.0;
  std::size_t truncation_rank = 0;
};

/// Throws ResourceError when eps needs more than max_rank terms.
KernelValue kernel_eval(const SpectralModel& model, std::span<const double> x, std::span<const double> y, double eps,
                        std::size_t max_rank = std::size_t{1} << 22);

/// Linear sampling operator A f(x) = sum_i w_i(x) f(x^i) whose weights factor
/// as w(x)^T = (eta_1(x), ..., eta_M(x)) B over the first M ranks of
/// basis_model. Built implicitly from a RecoveryOperator (B = G diag(row_scale)).
class FactoredOperator {
 public:
  FactoredOperator(const RecoveryOperator& op);  // NOLINT(google-explicit-constructor)
  /// A = 0: no nodes, no weights.
  static FactoredOperator zero(const SpectralModel& model);

  const SpectralModel& basis_model() const { return model_; }
  std::size_t ranks() const { return ranks_; }
  const NodeSet& nodes() const { return nodes_; }
  bool is_real() const { return is_real_; }
  const Eigen::MatrixXd& b_real() const { return b_real_; }
  const Eigen::MatrixXcd& b_complex() const { return b_complex_; }
  Eigen::VectorXcd weights(std::span<const double> x) const;

 private:
  explicit FactoredOperator(const SpectralModel& model);

  SpectralModel model_;
  std::size_t ranks_ = 0;
  NodeSet nodes_;
  bool is_real_;
  Eigen::MatrixXd b_real_;
  Eigen::MatrixXcd b_complex_;
};

/// spectral: e_K(x)^2 = sum_{k<=K} |sigma_k (eta_k(x) - sum_i w_i(x) eta_k(x^i))|^2
/// via the (M x K) matrix B Phi_K diag(sigma), blocked over nodes and grid.
/// gram: the kernel quadratic form with the node Gram matrix built once.
/// Both drop the same ranks > K, so they agree up to round-off.
enum class CertifyRoute { spectral, gram };

struct CertifyOptions {
  CertifyRoute route = CertifyRoute::spectral;
  Exec exec = Exec::parallel;
  bool keep_values = false;
  /// Keep exactly this many ranks and treat the spectrum as finite (no slack).
  std::optional<std::size_t> fixed_rank;
  std::size_t max_rank = std::size_t{1} << 22;
};

/// e(x) = sup_{|f|_H <= 1} |f(x) - A f(x)| lies in [value, value + slack].
struct PointwiseWce {
  double value = 0.0;
  double slack = 0.0;
  std::size_t truncation_rank = 0;
  /// Quadratic form before clipping at 0 (gram route; equals value^2 otherwise).
  double raw_square = 0.0;
};

/// Truncation rank K is the smallest with sup_x sum_{k>K} sigma_k^2 |eta_k(x)|^2 <= eps.
/// Direct per-point evaluation; O(n (M + K)).
PointwiseWce pointwise_wce(const FactoredOperator& op, const SpectralModel& model, std::span<const double> x,
                           double eps, const CertifyOptions& options = {});

struct ErrorCertificate {
  GridSpec grid;
  double sup_value = 0.0;
  std::size_t argmax_index = 0;
  std::vector<double> argmax;
  /// Grid max of the per-point slack.
  double truncation_slack = 0.0;
  /// Bound on the dropped kernel diagonal sup_x sum_{k>K} sigma_k^2 |eta_k(x)|^2.
  double tail_bound = 0.0;
  std::size_t truncation_rank = 0;
  CertifyRoute route = CertifyRoute::spectral;
  /// Gram route: smallest quadratic form before clipping and how many points fell below -1e-10.
  double min_raw_square = 0.0;
  std::size_t roundoff_violations = 0;
  std::vector<double> values;  // e_K at every grid point when keep_values
  std::vector<double> slacks;

  /// Upper bound on the grid max of the untruncated e.
  double upper() const { return sup_value + truncation_slack; }
};

/// Grid max of e_K; argmax ties go to the smallest grid index.
ErrorCertificate certify_sup(const FactoredOperator& op, const SpectralModel& model, const GridSpec& grid, double eps,
                             const CertifyOptions& options = {});

/// 1e-3 on the torus, 1e-2 on [-1, 1].
double default_kernel_rel_eps(const SpectralModel& model);
/// rel_eps * sup_x sum_{k>=m} sigma_k^2 |eta_k(x)|^2.
double kernel_eps(const SpectralModel& model, std::size_t m, double rel_eps);

/// Smallest K with sup_x sum_{k>K} sigma_k^2 |eta_k(x)|^2 <= eps.
std::size_t kernel_truncation_rank(const SpectralModel& model, double eps,
                                   std::size_t max_rank = std::size_t{1} << 22);

}  // namespace wlsq
