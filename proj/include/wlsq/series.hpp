#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <string>

#include "wlsq/spectral.hpp"

namespace wlsq {

/// Truncated infinite sum with an analytic bound on the discarded part:
/// the true value lies in [value, value + remainder].
struct CertifiedSum {
  double value = 0.0;
  double remainder = 0.0;
  std::size_t truncation_rank = 0;
};

/// Stop once remainder <= max(abs_eps, rel_eps * value).
struct TruncationPolicy {
  double abs_eps = 0.0;
  double rel_eps = 1e-6;
  std::size_t max_rank = std::size_t{1} << 26;
};

/// Rank-indexed view of sigma_k^2 and the Christoffel sup N(m), with
/// remainder bounds for the two tails the bounds need.
class SpectralProfile {
 public:
  virtual ~SpectralProfile() = default;

  virtual double sigma_sq(std::size_t rank) const = 0;
  /// N(m) = sup_x sum_{k<m} |eta_k(x)|^2.
  virtual double christoffel(std::size_t m) const = 0;
  /// Upper bound on sum_{k>K} sigma_k^2.
  virtual double sigma_sq_remainder(std::size_t K) const = 0;
  /// Lower bound on the same sum; tightens truncated tails.
  virtual double sigma_sq_remainder_lower(std::size_t /*K*/) const { return 0.0; }
  /// Upper bound on sum_{k>K} N(4k) sigma_k^2 / k.
  virtual double weighted_remainder(std::size_t K) const = 0;
  /// Make ranks up to K cheap to query.
  virtual void reserve(std::size_t /*K*/) const {}
  virtual std::string describe() const = 0;

  /// sum_{k>=from} sigma_k^2.
  virtual CertifiedSum sigma_sq_tail(std::size_t from, const TruncationPolicy& policy = {}) const;
  /// sum_{k>=from} N(4k) sigma_k^2 / k.
  virtual CertifiedSum weighted_tail(std::size_t from, const TruncationPolicy& policy = {}) const;
};

/// Profile of a built-in model. Throws ArgumentError for custom weights
/// (no analytic remainder) and for trig models with s <= 1/2.
std::unique_ptr<SpectralProfile> make_profile(const SpectralModel& model);

/// Synthetic spectrum sigma_k^2 = k^(-2p) with N(m) = (m-1)^u.
class PowerLawProfile final : public SpectralProfile {
 public:
  PowerLawProfile(double p, double u);
  double sigma_sq(std::size_t rank) const override;
  double christoffel(std::size_t m) const override;
  double sigma_sq_remainder(std::size_t K) const override;
  double sigma_sq_remainder_lower(std::size_t K) const override;
  double weighted_remainder(std::size_t K) const override;
  std::string describe() const override;

 private:
  double p_;
  double u_;
};

/// sum over Z of the one-dimensional factor f(|k|)^-2 for a product weight,
/// bracketed: lower <= true <= upper.
struct SeriesBracket {
  long double lower = 0.0L;
  long double upper = 0.0L;
};
SeriesBracket trig_sigma_sq_total(const WeightModel& weight);

/// Upper bound on sup_x sum_{k>K} sigma_k^2 |eta_k(x)|^2.
double pointwise_remainder(const SpectralModel& model, std::size_t K);

}  // namespace wlsq
