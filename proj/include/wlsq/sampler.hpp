#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wlsq/grid.hpp"
#include "wlsq/spectral.hpp"

namespace wlsq {

/// krieg_ullrich: half Christoffel term, half normalized spectral tail.
/// simple: (1/(2(m-1))) sum_{k<m} |eta_k|^2 + 1/2 against the probability
/// version of rho_D. none: plain rho_D.
enum class DensityVariant { krieg_ullrich, simple, none };

std::string_view to_string(DensityVariant variant);
/// Accepts "krieg_ullrich", "simple", "none".
DensityVariant parse_variant(std::string_view name);

/// rho_m for a fixed (model, m, variant).
///
/// operator() returns the density relative to the variant's base measure:
/// rho_D for krieg_ullrich and none, rho_D / rho_D(D) for simple.
/// sampling_density() is the density of the node law relative to rho_D
/// (integrates to 1 against rho_D); it is the weight used by `recover`.
///
/// For Legendre/krieg_ullrich the tail series is cut at degree tail_degree()
/// and normalized by the same finite sum, so the density integrates to 1
/// exactly; tail_remainder() bounds the dropped part relative to the full
/// tail mass.
class Density {
 public:
  Density(const SpectralModel& model, std::size_t m, DensityVariant variant);

  double operator()(std::span<const double> x) const;
  double sampling_density(std::span<const double> x) const { return scale_ * (*this)(x); }

  const SpectralModel& model() const { return model_; }
  std::size_t m() const { return m_; }
  DensityVariant variant() const { return variant_; }
  /// sampling_density / operator().
  double scale() const { return scale_; }
  /// Mass of the base measure: rho_D(D) for krieg_ullrich and none, 1 for simple.
  double base_mass() const;
  std::size_t tail_degree() const { return tail_degree_; }
  double tail_remainder() const { return tail_remainder_; }
  /// Pointwise truncation remainder exceeds 1e-6 of the smallest density value.
  bool remainder_flag() const { return remainder_flag_; }

 private:
  SpectralModel model_;
  std::size_t m_;
  DensityVariant variant_;
  double scale_ = 1.0;
  double constant_ = 1.0;
  std::vector<double> coef_;  // Legendre: rho(x) = constant_ + sum_j coef_j P_j(x)^2
  std::size_t tail_degree_ = 0;
  double tail_remainder_ = 0.0;
  bool remainder_flag_ = false;
};

/// rho_m(x) per the variant; see Density.
double density_eval(const SpectralModel& model, std::size_t m, DensityVariant variant, std::span<const double> x);

/// Integral of rho_m against the variant's base measure using `rule`
/// (1 for every variant except none, which gives rho_D(D)).
double density_mass(const SpectralModel& model, std::size_t m, DensityVariant variant, const QuadratureRule& rule);

struct SamplingStats {
  std::size_t proposals = 0;
  std::size_t accepted = 0;
  double envelope = 0.0;
  std::size_t envelope_grid = 0;
  std::size_t envelope_restarts = 0;
};

/// Sampled points with the density values they were drawn under.
struct NodeSet {
  int dim = 1;
  std::vector<double> points;   // row-major, size() * dim
  std::vector<double> density;  // rho_m(x^i) as returned by Density::operator()
  double density_scale = 1.0;   // sampling density = density * density_scale
  std::uint64_t seed = 0;
  DensityVariant variant = DensityVariant::krieg_ullrich;
  std::size_t m = 0;
  SamplingStats stats;

  std::size_t size() const { return density.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  double sampling_density(std::size_t i) const { return density[i] * density_scale; }
  /// Rows selected by `indices`, in that order.
  NodeSet subset(std::span<const std::size_t> indices) const;
};

/// n i.i.d. draws from rho_m d rho_D by rejection sampling. The proposal is
/// the base measure on the torus and the arcsine law on [-1, 1]; the
/// envelope is 1.05 x the grid max of target/proposal. A proposal above the
/// envelope restarts the draw with a doubled grid. Pure in (inputs, seed).
NodeSet draw_nodes(const SpectralModel& model, std::size_t m, std::size_t n, DensityVariant variant,
                   std::uint64_t seed, std::optional<GridSpec> envelope_grid = std::nullopt);

}  // namespace wlsq
