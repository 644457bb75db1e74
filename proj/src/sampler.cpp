#include "wlsq/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "wlsq/errors.hpp"
#include "wlsq/rng.hpp"
#include "wlsq/series.hpp"

namespace wlsq {

namespace {

// Fraction of the tail mass sum_{k>=m} sigma_k^2 the Legendre tail term may drop.
constexpr double kTailMassTolerance = 1e-4;
constexpr int kMaxEnvelopeRestarts = 8;

struct EnvelopeViolation {};

}  // namespace

std::string_view to_string(DensityVariant variant) {
  switch (variant) {
    case DensityVariant::krieg_ullrich:
      return "krieg_ullrich";
    case DensityVariant::simple:
      return "simple";
    case DensityVariant::none:
      return "none";
  }
  return "unknown";
}

DensityVariant parse_variant(std::string_view name) {
  if (name == "krieg_ullrich") return DensityVariant::krieg_ullrich;
  if (name == "simple") return DensityVariant::simple;
  if (name == "none") return DensityVariant::none;
  throw ArgumentError("unknown density variant '" + std::string(name) + "'");
}

Density::Density(const SpectralModel& model, std::size_t m, DensityVariant variant)
    : model_(model), m_(m), variant_(variant) {
  if (variant != DensityVariant::none && m < 2) throw ArgumentError("density needs m >= 2");
  const double mass = model.measure_mass();
  scale_ = variant == DensityVariant::krieg_ullrich ? 1.0 : 1.0 / mass;
  if (model.unimodular() || variant == DensityVariant::none) {
    // |eta_k| = 1 makes both Christoffel and tail terms constant.
    constant_ = 1.0;
    return;
  }
  const double inv = 1.0 / static_cast<double>(m - 1);
  if (variant == DensityVariant::simple) {
    // Against dx/2 the orthonormal system is sqrt(2) P~_j, so the first term is
    // (1/(m-1)) sum P~_j^2 with P~_j^2 = (2j+1)/2 P_j^2.
    constant_ = 0.5;
    coef_.resize(m - 1);
    for (std::size_t j = 0; j + 1 < m; ++j) coef_[j] = (2.0 * j + 1.0) / 2.0 * inv;
    return;
  }
  constant_ = 0.0;
  const auto profile = make_profile(model);
  const auto lambda = profile->sigma_sq_tail(m, {0.0, 1e-10});
  // Degrees > D carry sigma^2 mass <= sigma_sq_remainder(D + 1).
  std::size_t D = std::max<std::size_t>(m - 1, 16);
  while (profile->sigma_sq_remainder(D + 1) > kTailMassTolerance * lambda.value) {
    D += std::max<std::size_t>(D / 4, 1);
  }
  long double truncated = 0.0L;
  for (std::size_t j = m - 1; j <= D; ++j) truncated += profile->sigma_sq(j + 1);
  const double lam = static_cast<double>(truncated);
  coef_.resize(D + 1);
  for (std::size_t j = 0; j <= D; ++j) {
    const double norm = (2.0 * j + 1.0) / 2.0;
    coef_[j] = j + 1 < m ? 0.5 * norm * inv : 0.5 * norm * profile->sigma_sq(j + 1) / lam;
  }
  tail_degree_ = D;
  tail_remainder_ = profile->sigma_sq_remainder(D + 1) / lambda.value;
  // rho >= (1/2)(1/(m-1)) P~_0^2 = 1/(4(m-1)) everywhere.
  const double pointwise = 0.5 * pointwise_remainder(model, D + 1) / lam;
  remainder_flag_ = pointwise > 1e-6 * 0.25 * inv;
}

double Density::base_mass() const {
  return variant_ == DensityVariant::simple ? 1.0 : model_.measure_mass();
}

double Density::operator()(std::span<const double> x) const {
  model_.check_point(x);
  if (coef_.empty()) return constant_;
  const double t = x[0];
  double p_prev = 1.0;
  double p = t;
  double acc = constant_ + coef_[0];
  if (coef_.size() > 1) acc += coef_[1] * t * t;
  for (std::size_t n = 1; n + 1 < coef_.size(); ++n) {
    const double nn = static_cast<double>(n);
    const double p_next = ((2.0 * nn + 1.0) * t * p - nn * p_prev) / (nn + 1.0);
    p_prev = p;
    p = p_next;
    acc += coef_[n + 1] * p * p;
  }
  return acc;
}

double density_eval(const SpectralModel& model, std::size_t m, DensityVariant variant, std::span<const double> x) {
  return Density(model, m, variant)(x);
}

double density_mass(const SpectralModel& model, std::size_t m, DensityVariant variant, const QuadratureRule& rule) {
  const Density rho(model, m, variant);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weights[i] * rho(rule.node(i));
  const double base = variant == DensityVariant::simple ? 1.0 / model.measure_mass() : 1.0;
  return static_cast<double>(acc) * base;
}

NodeSet NodeSet::subset(std::span<const std::size_t> indices) const {
  NodeSet out;
  out.dim = dim;
  out.density_scale = density_scale;
  out.seed = seed;
  out.variant = variant;
  out.m = m;
  out.stats = stats;
  for (auto i : indices) {
    if (i >= size()) throw ArgumentError("subset index " + std::to_string(i) + " out of range");
    const auto p = point(i);
    out.points.insert(out.points.end(), p.begin(), p.end());
    out.density.push_back(density[i]);
  }
  return out;
}

namespace {

// Target density (against rho_D) over proposal density (against rho_D).
double proposal_ratio(const Density& rho, std::span<const double> x) {
  const double q = rho.sampling_density(x);
  if (rho.model().kind() == BasisKind::legendre) return q * M_PI * std::sqrt(std::max(0.0, 1.0 - x[0] * x[0]));
  return q;
}

double envelope_max(const Density& rho, const GridSpec& grid) {
  const auto points = grid_points(rho.model(), grid);
  const auto d = static_cast<std::size_t>(rho.model().dim());
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) best = std::max(best, proposal_ratio(rho, {points.data() + i * d, d}));
  return best;
}

}  // namespace

NodeSet draw_nodes(const SpectralModel& model, std::size_t m, std::size_t n, DensityVariant variant,
                   std::uint64_t seed, std::optional<GridSpec> envelope_grid) {
  if (n < 1) throw ArgumentError("draw_nodes needs n >= 1");
  const Density rho(model, m, variant);
  GridSpec grid;
  if (envelope_grid) {
    grid = *envelope_grid;
  } else if (model.kind() == BasisKind::legendre) {
    grid = GridSpec::uniform(model, std::max<std::size_t>(4096, 16 * (rho.tail_degree() + m)));
  } else {
    // Target and proposal are both rho_D; the ratio is constant.
    grid = GridSpec::uniform(model, 4);
  }
  grid.validate(model);
  const int d = model.dim();
  NodeSet out;
  out.dim = d;
  out.density_scale = rho.scale();
  out.seed = seed;
  out.variant = variant;
  out.m = m;
  std::vector<double> x(d);
  for (int restart = 0; restart <= kMaxEnvelopeRestarts; ++restart) {
    const double envelope = 1.05 * envelope_max(rho, grid);
    out.points.clear();
    out.density.clear();
    out.points.reserve(n * d);
    out.density.reserve(n);
    out.stats.proposals = 0;
    out.stats.envelope = envelope;
    out.stats.envelope_grid = grid.size();
    out.stats.envelope_restarts = static_cast<std::size_t>(restart);
    Philox rng(seed);
    try {
      while (out.density.size() < n) {
        if (model.kind() == BasisKind::legendre) {
          x[0] = -std::cos(M_PI * rng.uniform());
        } else {
          for (int c = 0; c < d; ++c) x[c] = 2.0 * M_PI * rng.uniform();
        }
        ++out.stats.proposals;
        const double ratio = proposal_ratio(rho, x);
        if (ratio > envelope) throw EnvelopeViolation{};
        if (rng.uniform() * envelope < ratio) {
          out.points.insert(out.points.end(), x.begin(), x.end());
          out.density.push_back(rho(x));
        }
      }
      out.stats.accepted = n;
      return out;
    } catch (const EnvelopeViolation&) {
      for (auto& c : grid.counts) c *= 2;
    }
  }
  throw InternalError("rejection envelope still violated after " + std::to_string(kMaxEnvelopeRestarts) +
                      " grid refinements");
}

}  // namespace wlsq
