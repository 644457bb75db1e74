#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "wlsq/recover.hpp"

namespace wlsq {

/// Extreme eigenvalues of sum_i u_i u_i^*.
struct FrameBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Rows are stored as an n x m matrix whose i-th row is u_i^T. Empty input gives (0, 0).
FrameBounds frame_bounds(const Eigen::MatrixXcd& rows);

struct SubsampleConstants {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  /// n/m >= 47 k1/k2.
  bool large_oversampling = false;
};

SubsampleConstants subsample_constants(std::size_t n, std::size_t m, double k1, double k2, double k3);

struct SubsampleResult {
  std::vector<std::size_t> indices;  // ascending
  /// Frame bounds of the selected rows scaled by n/m; lie in [C2, C3].
  FrameBounds achieved;
  std::size_t budget = 0;
  SubsampleConstants constants;
};

/// Selects J with |J| <= C1 m and C2 m/n <= sum_{i in J} |<w, u_i>|^2 / |w|^2 <= C3 m/n.
///
/// Greedy two-barrier selection on v_i = u_i sqrt(n/m): the lower barrier sits
/// one unit below lambda_min of the running sum, the upper barrier at C3.
/// Each step adds the feasible row with the largest lower-potential drop net
/// of the upper-potential rise (ties to the smallest index) and stops once
/// lambda_min >= C2. The result is re-verified with frame_bounds on every call.
///
/// Throws ArgumentError naming the row when |u_i|^2 > k1 m/n, or when the rows
/// violate [k2, k3]; InternalError when the selection misses the guarantees.
SubsampleResult weaver_subsample(const Eigen::MatrixXcd& rows, std::size_t m, double k1, double k2, double k3);

/// Rows u_i = (L)_{i,.} / sqrt(n) of a sampling matrix.
Eigen::MatrixXcd frame_rows(const SamplingMatrix& matrix);

}  // namespace wlsq
