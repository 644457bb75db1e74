#include "wlsq/series.hpp"

#include <cfloat>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "wlsq/errors.hpp"

namespace wlsq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// `remainder(K)` returns a {lower, upper} bracket on the sum past K.
template <class Term, class Remainder>
CertifiedSum truncated_sum(std::size_t from, Term term, Remainder remainder, const TruncationPolicy& policy,
                           const SpectralProfile& profile) {
  from = std::max<std::size_t>(from, 1);
  long double acc = 0.0L;
  std::size_t k = from;
  std::size_t K = std::max<std::size_t>(2 * from, 64);
  while (true) {
    K = std::min(K, std::max(policy.max_rank, from));
    profile.reserve(K);
    for (; k <= K; ++k) acc += term(k);
    const auto [lo, hi] = remainder(K);
    const double width = hi - lo;
    const double value = static_cast<double>(acc + lo);
    if (width <= std::max(policy.abs_eps, policy.rel_eps * value)) return {value, width, K};
    if (K >= policy.max_rank) {
      throw ResourceError("series truncation budget exhausted at rank " + std::to_string(K), width);
    }
    K *= 2;
  }
}

// One-dimensional factor f(a) = sigma^2 contribution of |k_j| = a.
long double factor_sq_inv(const WeightModel& w, long double a) {
  if (w.kind == WeightKind::sharp_mixed) return std::pow(1.0L + a, -2.0L * w.s);
  return std::pow(1.0L + a * a, -static_cast<long double>(w.s));
}

// Bracket on the integral of f over [a, inf).
SeriesBracket factor_integral(const WeightModel& w, long double a) {
  const long double s = w.s;
  if (w.kind == WeightKind::sharp_mixed) {
    const long double v = std::pow(1.0L + a, 1.0L - 2.0L * s) / (2.0L * s - 1.0L);
    return {v, v};
  }
  // (1+t^2)^-s = t^-2s (1+u)^-s with u = t^-2; alternating Taylor bounds.
  auto ik = [&](int k) { return std::pow(a, 1.0L - 2.0L * s - 2.0L * k) / (2.0L * s + 2.0L * k - 1.0L); };
  const long double base = ik(0) - s * ik(1);
  return {base, base + 0.5L * s * (s + 1.0L) * ik(2)};
}

class TrigProfile final : public SpectralProfile {
 public:
  explicit TrigProfile(const SpectralModel& model) : model_(model) {
    const auto one_dim = trig_sigma_sq_total(model.weight());
    const long double d = model.dim();
    total_.lower = std::pow(one_dim.lower, d);
    total_.upper = std::pow(one_dim.upper, d);
  }

  double sigma_sq(std::size_t rank) const override {
    const double s = basis(rank)->sigma(rank);
    return s * s;
  }
  double christoffel(std::size_t m) const override { return m == 0 ? 0.0 : static_cast<double>(m - 1); }
  double sigma_sq_remainder(std::size_t K) const override {
    const long double rest = K == 0 ? total_.upper : basis(K)->sigma_sq_complement(total_.upper, K);
    return static_cast<double>(std::max(0.0L, rest) + rounding());
  }
  double weighted_remainder(std::size_t K) const override {
    // N(4k)/k = (4k-1)/k < 4.
    return 4.0 * sigma_sq_remainder(K);
  }
  void reserve(std::size_t K) const override { basis(K); }
  std::string describe() const override { return model_.key(); }

  CertifiedSum sigma_sq_tail(std::size_t from, const TruncationPolicy&) const override {
    from = std::max<std::size_t>(from, 1);
    const long double rest = from == 1 ? total_.lower : basis(from - 1)->sigma_sq_complement(total_.lower, from - 1);
    CertifiedSum out;
    out.value = static_cast<double>(std::max(0.0L, rest - rounding()));
    out.remainder = static_cast<double>(total_.upper - total_.lower + 2.0L * rounding());
    out.truncation_rank = from - 1;
    return out;
  }

  // N(4k)/k = 4 - 1/k, so the weighted tail is 4 T - sum_{k>=from} sigma_k^2 / k and only
  // the second sum needs truncating; its remainder past K is at most T(K+1)/(K+1).
  CertifiedSum weighted_tail(std::size_t from, const TruncationPolicy& policy) const override {
    from = std::max<std::size_t>(from, 1);
    const auto tail = sigma_sq_tail(from, policy);
    long double harmonic = 0.0L;
    std::size_t k = from;
    std::size_t K = std::max<std::size_t>(2 * from, 64);
    while (true) {
      K = std::min(K, std::max(policy.max_rank, from));
      const auto b = basis(K);
      for (; k <= K; ++k) {
        const double s = b->sigma(k);
        harmonic += static_cast<long double>(s) * s / static_cast<long double>(k);
      }
      const double cut = sigma_sq_remainder(K) / static_cast<double>(K + 1);
      const double value = 4.0 * tail.value - static_cast<double>(harmonic) - cut;
      if (cut <= std::max(policy.abs_eps, policy.rel_eps * value)) {
        return {std::max(0.0, value), 4.0 * tail.remainder + cut, K};
      }
      if (K >= policy.max_rank) {
        throw ResourceError("series truncation budget exhausted at rank " + std::to_string(K), cut);
      }
      K *= 2;
    }
  }

 private:
  // Extended-precision rounding allowance on the total and the compensated prefix.
  long double rounding() const { return 16.0L * LDBL_EPSILON * total_.upper; }

  std::shared_ptr<const SpectralBasis> basis(std::size_t K) const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!basis_ || basis_->size() < K) basis_ = SpectralBasis::get(model_, K);
    return basis_;
  }

  SpectralModel model_;
  SeriesBracket total_;
  mutable std::mutex mutex_;
  mutable std::shared_ptr<const SpectralBasis> basis_;
};

class LegendreProfile final : public SpectralProfile {
 public:
  explicit LegendreProfile(double s) : s_(s) {}

  double sigma_sq(std::size_t rank) const override {
    const double v = legendre_sigma(s_, rank - 1);
    return v * v;
  }
  double christoffel(std::size_t m) const override {
    if (m == 0) return 0.0;
    const double a = static_cast<double>(m - 1);
    return 0.5 * a * a;
  }
  double sigma_sq_remainder(std::size_t K) const override {
    // Ranks > K are degrees j >= K with sigma^2 <= j^-2s.
    if (K == 0) return kInf;
    const double k = static_cast<double>(K);
    return std::pow(k, -2.0 * s_) + std::pow(k, 1.0 - 2.0 * s_) / (2.0 * s_ - 1.0);
  }
  double weighted_remainder(std::size_t K) const override {
    // (4k-1)^2/(2k) <= 8k and sigma_k^2 <= (k-1)^-2s; sum_{j>=K} 8(j+1) j^-2s <= 16 sum j^(1-2s).
    if (K == 0) return kInf;
    const double k = static_cast<double>(K);
    return 16.0 * (std::pow(k, 1.0 - 2.0 * s_) + std::pow(k, 2.0 - 2.0 * s_) / (2.0 * s_ - 2.0));
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "legendre:" << s_;
    return os.str();
  }

 private:
  double s_;
};

}  // namespace

CertifiedSum SpectralProfile::sigma_sq_tail(std::size_t from, const TruncationPolicy& policy) const {
  return truncated_sum(
      from, [this](std::size_t k) { return static_cast<long double>(sigma_sq(k)); },
      [this](std::size_t K) { return std::pair{sigma_sq_remainder_lower(K), sigma_sq_remainder(K)}; }, policy,
      *this);
}

CertifiedSum SpectralProfile::weighted_tail(std::size_t from, const TruncationPolicy& policy) const {
  return truncated_sum(
      from,
      [this](std::size_t k) {
        return static_cast<long double>(christoffel(4 * k)) * sigma_sq(k) / static_cast<long double>(k);
      },
      [this](std::size_t K) { return std::pair{0.0, weighted_remainder(K)}; }, policy, *this);
}

SeriesBracket trig_sigma_sq_total(const WeightModel& weight) {
  if (!weight.is_product()) throw ArgumentError("no closed-form total for custom weights");
  if (!(weight.s > 0.5)) throw ArgumentError("sum of sigma^2 diverges for s <= 1/2");
  static std::mutex mutex;
  static std::map<std::pair<int, double>, SeriesBracket> cache;
  const auto key = std::make_pair(static_cast<int>(weight.kind), weight.s);
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  // Exact partial sum up to J, then convexity brackets for the rest:
  // int_{J+1}^inf f + f(J+1)/2  <=  sum_{a>J} f(a)  <=  int_{J+1/2}^inf f.
  constexpr long J = 1L << 20;
  long double partial = 0.0L;
  for (long a = J; a >= 1; --a) partial += factor_sq_inv(weight, a);
  const auto lo = factor_integral(weight, J + 1.0L);
  const auto hi = factor_integral(weight, J + 0.5L);
  const long double tail_lo = lo.lower + 0.5L * factor_sq_inv(weight, J + 1.0L);
  const long double tail_hi = hi.upper;
  SeriesBracket out;
  out.lower = 1.0L + 2.0L * (partial + tail_lo);
  out.upper = 1.0L + 2.0L * (partial + tail_hi);
  std::lock_guard<std::mutex> lock(mutex);
  cache[key] = out;
  return out;
}

std::unique_ptr<SpectralProfile> make_profile(const SpectralModel& model) {
  if (model.kind() == BasisKind::legendre) {
    if (!(model.smoothness() > 1.0)) throw ArgumentError("Legendre tails need s > 1 (bounded kernel)");
    return std::make_unique<LegendreProfile>(model.smoothness());
  }
  if (!model.weight().is_product()) {
    throw ArgumentError("tail certification needs a product weight; custom weights have no analytic remainder");
  }
  return std::make_unique<TrigProfile>(model);
}

PowerLawProfile::PowerLawProfile(double p, double u) : p_(p), u_(u) {
  if (!(p > 0.5)) throw ArgumentError("power-law profile needs p > 1/2");
  if (!(u >= 0.0)) throw ArgumentError("power-law profile needs u >= 0");
}

double PowerLawProfile::sigma_sq(std::size_t rank) const {
  return std::pow(static_cast<double>(rank), -2.0 * p_);
}

double PowerLawProfile::christoffel(std::size_t m) const {
  if (m <= 1) return 0.0;
  return std::pow(static_cast<double>(m - 1), u_);
}

// k^-2p is convex: int_{K+1}^inf + f(K+1)/2 <= sum_{k>K} <= int_{K+1/2}^inf.
double PowerLawProfile::sigma_sq_remainder(std::size_t K) const {
  if (K == 0) return kInf;
  return std::pow(K + 0.5, 1.0 - 2.0 * p_) / (2.0 * p_ - 1.0);
}

double PowerLawProfile::sigma_sq_remainder_lower(std::size_t K) const {
  const double a = static_cast<double>(K) + 1.0;
  return std::pow(a, 1.0 - 2.0 * p_) / (2.0 * p_ - 1.0) + 0.5 * std::pow(a, -2.0 * p_);
}

double PowerLawProfile::weighted_remainder(std::size_t K) const {
  if (K == 0 || !(2.0 * p_ > u_)) return kInf;
  return std::pow(4.0, u_) * std::pow(static_cast<double>(K), u_ - 2.0 * p_) / (2.0 * p_ - u_);
}

std::string PowerLawProfile::describe() const {
  std::ostringstream os;
  os << "power_law:p=" << p_ << ":u=" << u_;
  return os.str();
}

double pointwise_remainder(const SpectralModel& model, std::size_t K) {
  if (K == 0) return kInf;
  if (model.kind() == BasisKind::legendre) {
    // |eta at degree j|^2 <= j + 1/2 <= 1.5 j for j >= 1.
    const double s = model.smoothness();
    if (!(s > 1.0)) throw ArgumentError("Legendre tails need s > 1 (bounded kernel)");
    const double k = static_cast<double>(K);
    return 1.5 * (std::pow(k, 1.0 - 2.0 * s) + std::pow(k, 2.0 - 2.0 * s) / (2.0 * s - 2.0));
  }
  return make_profile(model)->sigma_sq_remainder(K);
}

}  // namespace wlsq
