#pragma once

#include <cstddef>
#include <span>

#include "wlsq/grid.hpp"
#include "wlsq/series.hpp"
#include "wlsq/spectral.hpp"

namespace wlsq {

/// N(m, x) = sum_{k=1}^{m-1} |eta_k(x)|^2.
double christoffel_eval(const SpectralModel& model, std::size_t m, std::span<const double> x);

/// Grid max of N(m, x). Exact for the trigonometric models (constant m-1) and
/// for Legendre (attained at x = +-1, which every grid contains).
double christoffel_sup(const SpectralModel& model, std::size_t m, const GridSpec& grid,
                       Exec exec = Exec::parallel);

/// T_m(x) = sum_{k>=m} sigma_k^2 |eta_k(x)|^2; true value in [value, value + remainder_bound].
struct TailEstimate {
  double value = 0.0;
  std::size_t truncation_rank = 0;
  double remainder_bound = 0.0;
};

/// Throws ResourceError (with the achieved remainder) if eps cannot be met
/// below `max_rank`.
TailEstimate tail_eval(const SpectralModel& model, std::size_t m, std::span<const double> x, double eps,
                       std::size_t max_rank = std::size_t{1} << 24);

/// Smallest truncation rank K >= m whose pointwise remainder is <= eps.
std::size_t tail_truncation_rank(const SpectralModel& model, std::size_t m, double eps,
                                 std::size_t max_rank = std::size_t{1} << 24);

/// sqrt of the grid max of T_m; `upper` adds the truncation remainder.
struct ProjectionError {
  double value = 0.0;
  double upper = 0.0;
  std::size_t truncation_rank = 0;
};

ProjectionError projection_error_sup(const SpectralModel& model, std::size_t m, const GridSpec& grid, double eps,
                                     Exec exec = Exec::parallel);

/// 2 sum_{k >= floor(m/2)} N(4k) sigma_k^2 / k with the exact N of the model.
CertifiedSum tail_bound_rhs(const SpectralProfile& profile, std::size_t m, const TruncationPolicy& policy = {});
CertifiedSum tail_bound_rhs(const SpectralModel& model, std::size_t m, const TruncationPolicy& policy = {});

}  // namespace wlsq
