#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wlsq/grid.hpp"
#include "wlsq/series.hpp"
#include "wlsq/spectral.hpp"

namespace wlsq {

using NamedValues = std::vector<std::pair<std::string, double>>;

struct BoundReport {
  std::string name;
  double value = 0.0;
  NamedValues constants;  // every constant that entered the value
  NamedValues inputs;
  /// Terms of a max/min, in formula order.
  NamedValues branches;
  /// value + truncation_slack bounds the untruncated expression.
  double truncation_slack = 0.0;

  /// Throws ArgumentError for an unknown name.
  double constant(const std::string& key) const;
  double branch(const std::string& key) const;
};

/// c3 max{ N(m)/m sum_{k>=floor(m/2)} sigma_k^2, sum_{k>=floor(m/2)} N(4k) sigma_k^2 / k },
/// c3 = 403 for a bounded ONS (c1 = 10) and 278 otherwise (c1 = 20).
/// Tail indices below 1 are clamped to 1.
BoundReport thm31_rhs(const SpectralProfile& profile, std::size_t m, bool bounded_ons,
                      const TruncationPolicy& policy = {});
/// Throws ArgumentError when bounded_ons is claimed for a model whose basis is unbounded.
BoundReport thm31_rhs(const SpectralModel& model, std::size_t m, bool bounded_ons,
                      const TruncationPolicy& policy = {});

enum class Thm42Variant { i, ii };

struct Thm42Constants {
  double c4 = 0.0;  // 0 selects c3 of the matching regime
  double c5 = 0.5;
  double b = 10.0;  // variant i: the report records n = floor(b m log m)
};

/// Variant i equals thm31_rhs. Variant ii:
/// c4 max{ N(m) log m / m sum_{k>=floor(c5 m)} sigma_k^2, sum_{k>=floor(c5 m)} N(4k) sigma_k^2 / k }.
BoundReport thm42_rhs(const SpectralProfile& profile, Thm42Variant variant, std::size_t m, bool bounded_ons,
                      const Thm42Constants& constants = {}, const TruncationPolicy& policy = {});

struct Cor43Constants {
  double b = 10.0;
  double c5 = 0.5;
  double c6 = 20.0;
  double C = 1.0;
};

/// C min{ sum_{k>=floor(m/(c6 log m))} sigma_k^2, log m sum_{k>=floor(c5 m)} sigma_k^2 };
/// both branches reported as "first" and "second".
BoundReport cor43_bound(const SpectralProfile& profile, std::size_t m, const Cor43Constants& constants = {},
                        const TruncationPolicy& policy = {});

/// 1612 (16/3)^beta beta/(beta-1) (m/2 - 1)^(1-beta), beta = 2s/(1 + log2 d).
/// Throws ArgumentError when beta <= 1 or m < 4.
BoundReport preasymp_hmix(double s, int d, std::size_t m);

enum class AppendixNorm { sharp, plus };

/// sharp: (16/(3n))^(s/(1+log2 d)), n >= 6.
/// plus: (C(d)/n)^(s/(2(1+log2(d-1)))), d >= 3, n >= 2,
/// C(d) = (1 + (1 + 2/log2(d-1))/(d-1))^(d-1).
BoundReport appendix_sigma_bound(double s, int d, std::size_t n, AppendixNorm norm);

struct RateExponents {
  double q_lin = 0.0;
  double q_std_lower = 0.0;
  bool equal = false;  // u == 1
};

/// q_lin = p - 1/2, q_std_lower = p - u/2. Requires 2p > u and p > 1/2.
RateExponents rate_exponents(double u, double p);

/// out[k] = phi_{k+1}(x) for an orthonormal system of `count` functions.
using OnsEvaluator = std::function<void(std::span<const double> x, std::span<cplx> out)>;

struct SubspaceChristoffel {
  double value = 0.0;        // grid max of sum_k |phi_k(x)|^2
  double lower_bound = 0.0;  // count / rho_D(D)
  /// False only when the grid is too coarse to see the mean of sum_k |phi_k|^2.
  bool meets_lower_bound = false;
};

SubspaceChristoffel subspace_christoffel(const SpectralModel& domain, std::size_t count, const OnsEvaluator& basis,
                                         const GridSpec& grid);

/// m = floor(n / (c1 r log n)).
std::size_t log_m_rule(std::size_t n, double c1, double r);

}  // namespace wlsq
