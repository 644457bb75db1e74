#include "wlsq/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "wlsq/errors.hpp"

namespace wlsq {

namespace {

double lookup(const NamedValues& values, const std::string& key) {
  for (const auto& [k, v] : values) {
    if (k == key) return v;
  }
  throw ArgumentError("report has no entry '" + key + "'");
}

std::size_t clamp_index(double v) { return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(v))); }

double c3_for(bool bounded_ons) { return bounded_ons ? 403.0 : 278.0; }
double c1_for(bool bounded_ons) { return bounded_ons ? 10.0 : 20.0; }

}  // namespace

double BoundReport::constant(const std::string& key) const { return lookup(constants, key); }
double BoundReport::branch(const std::string& key) const { return lookup(branches, key); }

BoundReport thm31_rhs(const SpectralProfile& profile, std::size_t m, bool bounded_ons,
                      const TruncationPolicy& policy) {
  if (m < 1) throw ArgumentError("thm31_rhs needs m >= 1");
  const std::size_t from = clamp_index(static_cast<double>(m / 2));
  const auto tail = profile.sigma_sq_tail(from, policy);
  const auto weighted = profile.weighted_tail(from, policy);
  const double factor = profile.christoffel(m) / static_cast<double>(m);
  const double c3 = c3_for(bounded_ons);
  BoundReport r;
  r.name = "thm31";
  r.constants = {{"c1", c1_for(bounded_ons)}, {"c3", c3}};
  r.inputs = {{"m", static_cast<double>(m)}, {"tail_from", static_cast<double>(from)}};
  r.branches = {{"christoffel_tail", factor * tail.value}, {"weighted_tail", weighted.value}};
  r.value = c3 * std::max(factor * tail.value, weighted.value);
  r.truncation_slack = c3 * std::max(factor * tail.remainder, weighted.remainder);
  return r;
}

BoundReport thm31_rhs(const SpectralModel& model, std::size_t m, bool bounded_ons, const TruncationPolicy& policy) {
  if (bounded_ons && !model.unimodular()) {
    throw ArgumentError("the bounded-ONS constant needs a uniformly bounded basis; use bounded_ons = false");
  }
  auto r = thm31_rhs(*make_profile(model), m, bounded_ons, policy);
  r.inputs.emplace_back("d", model.dim());
  r.inputs.emplace_back("s", model.smoothness());
  return r;
}

BoundReport thm42_rhs(const SpectralProfile& profile, Thm42Variant variant, std::size_t m, bool bounded_ons,
                      const Thm42Constants& constants, const TruncationPolicy& policy) {
  if (m < 2) throw ArgumentError("thm42_rhs needs m >= 2");
  if (variant == Thm42Variant::i) {
    auto r = thm31_rhs(profile, m, bounded_ons, policy);
    r.name = "thm42_i";
    r.constants.emplace_back("b", constants.b);
    r.inputs.emplace_back("n", std::floor(constants.b * m * std::log(static_cast<double>(m))));
    return r;
  }
  const double c4 = constants.c4 > 0.0 ? constants.c4 : c3_for(bounded_ons);
  if (!(constants.c5 > 0.0)) throw ArgumentError("c5 must be positive");
  const std::size_t from = clamp_index(constants.c5 * static_cast<double>(m));
  const auto tail = profile.sigma_sq_tail(from, policy);
  const auto weighted = profile.weighted_tail(from, policy);
  const double factor = profile.christoffel(m) * std::log(static_cast<double>(m)) / static_cast<double>(m);
  BoundReport r;
  r.name = "thm42_ii";
  r.constants = {{"c4", c4}, {"c5", constants.c5}};
  r.inputs = {{"m", static_cast<double>(m)}, {"tail_from", static_cast<double>(from)}};
  r.branches = {{"christoffel_tail", factor * tail.value}, {"weighted_tail", weighted.value}};
  r.value = c4 * std::max(factor * tail.value, weighted.value);
  r.truncation_slack = c4 * std::max(factor * tail.remainder, weighted.remainder);
  return r;
}

BoundReport cor43_bound(const SpectralProfile& profile, std::size_t m, const Cor43Constants& constants,
                        const TruncationPolicy& policy) {
  if (m < 2) throw ArgumentError("cor43_bound needs m >= 2");
  if (!(constants.c5 > 0.0 && constants.c6 > 0.0 && constants.C > 0.0)) {
    throw ArgumentError("cor43 constants must be positive");
  }
  const double log_m = std::log(static_cast<double>(m));
  const std::size_t from_first = clamp_index(static_cast<double>(m) / (constants.c6 * log_m));
  const std::size_t from_second = clamp_index(constants.c5 * static_cast<double>(m));
  const auto first = profile.sigma_sq_tail(from_first, policy);
  const auto second = profile.sigma_sq_tail(from_second, policy);
  BoundReport r;
  r.name = "cor43";
  r.constants = {{"b", constants.b}, {"c5", constants.c5}, {"c6", constants.c6}, {"C", constants.C}};
  r.inputs = {{"m", static_cast<double>(m)},
              {"first_from", static_cast<double>(from_first)},
              {"second_from", static_cast<double>(from_second)}};
  r.branches = {{"first", first.value}, {"second", log_m * second.value}};
  r.value = constants.C * std::min(first.value, log_m * second.value);
  r.truncation_slack = constants.C * std::max(first.remainder, log_m * second.remainder);
  return r;
}

BoundReport preasymp_hmix(double s, int d, std::size_t m) {
  if (d < 1) throw ArgumentError("preasymp_hmix needs d >= 1");
  const double beta = 2.0 * s / (1.0 + std::log2(static_cast<double>(d)));
  if (!(beta > 1.0)) throw ArgumentError("preasymp_hmix needs beta = 2s/(1+log2 d) > 1");
  if (m < 4) throw ArgumentError("preasymp_hmix needs m >= 4");
  BoundReport r;
  r.name = "preasymp_hmix";
  r.constants = {{"c", 1612.0}, {"beta", beta}};
  r.inputs = {{"s", s}, {"d", static_cast<double>(d)}, {"m", static_cast<double>(m)}};
  r.value = 1612.0 * std::pow(16.0 / 3.0, beta) * beta / (beta - 1.0) *
            std::pow(static_cast<double>(m) / 2.0 - 1.0, 1.0 - beta);
  return r;
}

BoundReport appendix_sigma_bound(double s, int d, std::size_t n, AppendixNorm norm) {
  if (!(s > 0.0)) throw ArgumentError("appendix bounds need s > 0");
  if (d < 1) throw ArgumentError("appendix bounds need d >= 1");
  BoundReport r;
  r.inputs = {{"s", s}, {"d", static_cast<double>(d)}, {"n", static_cast<double>(n)}};
  if (norm == AppendixNorm::sharp) {
    if (n < 6) throw ArgumentError("sharp-norm bound holds for n >= 6");
    const double expo = s / (1.0 + std::log2(static_cast<double>(d)));
    r.name = "appendix_sharp";
    r.constants = {{"c", 16.0 / 3.0}, {"exponent", expo}};
    r.value = std::pow(16.0 / (3.0 * static_cast<double>(n)), expo);
    return r;
  }
  if (d < 3) throw ArgumentError("plus-norm bound holds for d >= 3");
  if (n < 2) throw ArgumentError("plus-norm bound holds for n >= 2");
  const double dm1 = static_cast<double>(d - 1);
  const double cd = std::pow(1.0 + (1.0 + 2.0 / std::log2(dm1)) / dm1, dm1);
  const double expo = s / (2.0 * (1.0 + std::log2(dm1)));
  r.name = "appendix_plus";
  r.constants = {{"C(d)", cd}, {"exponent", expo}};
  r.value = std::pow(cd / static_cast<double>(n), expo);
  return r;
}

RateExponents rate_exponents(double u, double p) {
  if (!(p > 0.5)) throw ArgumentError("rate_exponents needs p > 1/2");
  if (!(2.0 * p > u)) throw ArgumentError("rate_exponents needs 2p > u");
  return {p - 0.5, p - u / 2.0, u == 1.0};
}

SubspaceChristoffel subspace_christoffel(const SpectralModel& domain, std::size_t count, const OnsEvaluator& basis,
                                         const GridSpec& grid) {
  grid.validate(domain);
  const auto points = grid_points(domain, grid);
  const auto d = static_cast<std::size_t>(domain.dim());
  std::vector<cplx> values(count);
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    basis({points.data() + i * d, d}, values);
    double acc = 0.0;
    for (const auto& v : values) acc += std::norm(v);
    best = std::max(best, acc);
  }
  const double lower = static_cast<double>(count) / domain.measure_mass();
  return {best, lower, best >= lower * (1.0 - 1e-12)};
}

std::size_t log_m_rule(std::size_t n, double c1, double r) {
  if (n < 2) throw ArgumentError("m rule needs n >= 2");
  if (!(c1 > 0.0) || !(r > 1.0)) throw ArgumentError("m rule needs c1 > 0 and r > 1");
  const double nd = static_cast<double>(n);
  return static_cast<std::size_t>(std::floor(nd / (c1 * r * std::log(nd))));
}

}  // namespace wlsq
