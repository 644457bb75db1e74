#include "wlsq/christoffel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "wlsq/errors.hpp"

namespace wlsq {

double christoffel_eval(const SpectralModel& model, std::size_t m, std::span<const double> x) {
  model.check_point(x);
  if (m <= 1) return 0.0;
  if (model.unimodular()) return static_cast<double>(m - 1);
  std::vector<double> values(m - 1);
  legendre_normalized(x[0], values);
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return sum;
}

double christoffel_sup(const SpectralModel& model, std::size_t m, const GridSpec& grid, Exec exec) {
  grid.validate(model);
  if (m <= 1) return 0.0;
  if (model.unimodular()) return static_cast<double>(m - 1);
  const auto points = grid_points(model, grid);
  const auto d = static_cast<std::size_t>(model.dim());
  const auto count = static_cast<std::ptrdiff_t>(grid.size());
  double best = 0.0;
#pragma omp parallel for reduction(max : best) schedule(static) if (exec == Exec::parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    best = std::max(best, christoffel_eval(model, m, {points.data() + i * d, d}));
  }
  return best;
}

std::size_t tail_truncation_rank(const SpectralModel& model, std::size_t m, double eps, std::size_t max_rank) {
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  std::size_t K = std::max<std::size_t>(m, 64);
  while (true) {
    const double rem = pointwise_remainder(model, K);
    if (rem <= eps) return K;
    if (K >= max_rank) {
      throw ResourceError("tail truncation budget exhausted at rank " + std::to_string(K), rem);
    }
    K = std::min(2 * K, max_rank);
  }
}

TailEstimate tail_eval(const SpectralModel& model, std::size_t m, std::span<const double> x, double eps,
                       std::size_t max_rank) {
  model.check_point(x);
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  m = std::max<std::size_t>(m, 1);
  if (model.unimodular()) {
    const auto sum = make_profile(model)->sigma_sq_tail(m);
    if (sum.remainder > eps) throw ResourceError("closed-form tail is less accurate than eps", sum.remainder);
    return {sum.value, sum.truncation_rank, sum.remainder};
  }
  const std::size_t K = tail_truncation_rank(model, m, eps, max_rank);
  std::vector<double> values(K);
  legendre_normalized(x[0], values);
  const double s = model.smoothness();
  long double acc = 0.0L;
  for (std::size_t rank = m; rank <= K; ++rank) {
    const double sigma = legendre_sigma(s, rank - 1);
    const double v = sigma * values[rank - 1];
    acc += static_cast<long double>(v) * v;
  }
  return {static_cast<double>(acc), K, pointwise_remainder(model, K)};
}

ProjectionError projection_error_sup(const SpectralModel& model, std::size_t m, const GridSpec& grid, double eps,
                                     Exec exec) {
  grid.validate(model);
  if (model.unimodular()) {
    // The tail is the same at every point.
    std::vector<double> x(model.dim(), 0.0);
    const auto t = tail_eval(model, m, x, eps);
    return {std::sqrt(t.value), std::sqrt(t.value + t.remainder_bound), t.truncation_rank};
  }
  const auto points = grid_points(model, grid);
  const std::size_t K = tail_truncation_rank(model, std::max<std::size_t>(m, 1), eps);
  const auto count = static_cast<std::ptrdiff_t>(grid.size());
  double best = 0.0;
#pragma omp parallel for reduction(max : best) schedule(static) if (exec == Exec::parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    best = std::max(best, tail_eval(model, m, {points.data() + i, 1}, eps, K).value);
  }
  const double rem = pointwise_remainder(model, K);
  return {std::sqrt(best), std::sqrt(best + rem), K};
}

CertifiedSum tail_bound_rhs(const SpectralProfile& profile, std::size_t m, const TruncationPolicy& policy) {
  auto sum = profile.weighted_tail(std::max<std::size_t>(m / 2, 1), policy);
  sum.value *= 2.0;
  sum.remainder *= 2.0;
  return sum;
}

CertifiedSum tail_bound_rhs(const SpectralModel& model, std::size_t m, const TruncationPolicy& policy) {
  return tail_bound_rhs(*make_profile(model), m, policy);
}

}  // namespace wlsq
