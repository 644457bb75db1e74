#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wlsq {

using cplx = std::complex<double>;

enum class WeightKind { sharp_mixed, plus_mixed, custom };

/// Product (or user-supplied) smoothness weight w(k) over Z^d.
///
/// sharp_mixed: w(k) = prod_j (1 + |k_j|)^s
/// plus_mixed:  w(k) = prod_j (1 + |k_j|^2)^(s/2)
/// custom:      w(k) = evaluator(k); enumeration of {w <= R} needs a
///              coordinate bound b(R, j) with w(k) <= R  =>  |k_j| <= b(R, j).
struct WeightModel {
  WeightKind kind = WeightKind::sharp_mixed;
  double s = 1.0;
  int d = 1;
  std::function<double(std::span<const int>)> evaluator;
  std::function<int(double, int)> coordinate_bound;
  std::string description;

  static WeightModel sharp(double s, int d);
  static WeightModel plus(double s, int d);
  static WeightModel custom(int d, std::function<double(std::span<const int>)> evaluator,
                            std::function<int(double, int)> coordinate_bound,
                            std::string description);

  bool is_product() const { return kind != WeightKind::custom; }
};

/// w(k). Throws ArgumentError when k.size() != d.
double weight_eval(const WeightModel& model, std::span<const int> k);

/// Largest |k_j| that can occur in {k : w(k) <= R}.
int frequency_box_bound(const WeightModel& model, double radius, int coordinate);

/// The frequency set I(R) = {k in Z^d : w(k) <= R} in lexicographic order.
std::vector<std::vector<int>> frequency_set(const WeightModel& model, double radius);

enum class BasisKind { trigonometric, legendre };

/// Orthonormal eigen-system of an RKHS embedding together with its base measure.
///
/// Trigonometric: eta_k(x) = exp(i k.x) on the torus [0, 2pi)^d with the
/// probability measure (2pi)^-d dx, sigma = 1/w(k).
/// Legendre: L2(dx)-normalized Legendre polynomials on [-1, 1] with Lebesgue
/// measure (mass 2); degree j carries sigma = (1 + (j(j+1))^s)^(-1/2), and
/// rank 1 is degree 0. Any s > 0 gives a valid spectrum; the kernel is
/// bounded (and tails certifiable) only for s > 1.
class SpectralModel {
 public:
  static SpectralModel trigonometric(WeightModel weight);
  static SpectralModel legendre(double s);

  BasisKind kind() const { return kind_; }
  const WeightModel& weight() const { return weight_; }
  double smoothness() const { return kind_ == BasisKind::legendre ? legendre_s_ : weight_.s; }
  int dim() const { return kind_ == BasisKind::legendre ? 1 : weight_.d; }
  double measure_mass() const { return kind_ == BasisKind::legendre ? 2.0 : 1.0; }
  /// |eta_k(x)| = 1 for every k and x.
  bool unimodular() const { return kind_ == BasisKind::trigonometric; }
  bool real_valued() const { return kind_ == BasisKind::legendre; }
  /// Tail certification is available: product weights with s > 1/2, or
  /// Legendre with s > 1 (bounded kernel).
  bool certifiable() const {
    return kind_ == BasisKind::legendre ? legendre_s_ > 1.0 : weight_.is_product() && weight_.s > 0.5;
  }

  bool contains(std::span<const double> x) const;
  /// Throws DomainError if x is not in D (or ArgumentError on size mismatch).
  void check_point(std::span<const double> x) const;
  std::string domain_description() const;
  /// Density of the model measure rho_D with respect to Lebesgue measure on D.
  double lebesgue_density() const;
  /// Stable identifier; empty for custom weights.
  std::string key() const;

 private:
  SpectralModel() = default;
  BasisKind kind_ = BasisKind::trigonometric;
  WeightModel weight_;
  double legendre_s_ = 0.0;
};

/// sigma for a Legendre model at polynomial degree j.
double legendre_sigma(double s, std::size_t degree);

struct SpectrumEntry {
  std::size_t rank;        // 1-based
  std::vector<int> index;  // frequency vector (trig) or {degree} (Legendre)
  double sigma;
};

/// Non-increasing rearrangement of the singular numbers.
struct RankedSpectrum {
  static constexpr std::string_view tie_rule =
      "sigma descending; ties by |k|_1 ascending, then coordinates lexicographically ascending";
  std::vector<SpectrumEntry> entries;
};

/// First `count` entries of the rearrangement. Throws ResourceError (carrying
/// the radius reached) when more than `enumeration_budget` frequencies would
/// have to be enumerated.
RankedSpectrum ranked_spectrum(const SpectralModel& model, std::size_t count,
                               std::size_t enumeration_budget = std::size_t{1} << 26);

/// eta at `rank` evaluated at x.
cplx basis_eval(const SpectralModel& model, std::size_t rank, std::span<const double> x);

/// Normalized Legendre values sqrt((2j+1)/2) P_j(x) for j = 0..count-1.
void legendre_normalized(double x, std::span<double> out);

/// Ranked spectrum of fixed size with fast batch evaluation of eta_1..eta_r.
/// Immutable; `get` memoizes per model key.
class SpectralBasis {
 public:
  SpectralBasis(const SpectralModel& model, std::size_t size);

  static std::shared_ptr<const SpectralBasis> get(const SpectralModel& model, std::size_t min_size);

  const SpectralModel& model() const { return model_; }
  std::size_t size() const { return sigma_.size(); }
  double sigma(std::size_t rank) const { return sigma_[rank - 1]; }
  std::span<const double> sigmas() const { return sigma_; }
  /// Frequency of a trig rank (d entries) or {degree} for Legendre.
  std::span<const int> index(std::size_t rank) const;
  /// sum_{k <= r} sigma_k^2, compensated extended-precision sum.
  long double sigma_sq_prefix(std::size_t r) const { return prefix_[r] + prefix_lo_[r]; }
  /// total - sum_{k <= r} sigma_k^2 without rounding the prefix to one long double first.
  long double sigma_sq_complement(long double total, std::size_t r) const {
    return (total - prefix_[r]) - prefix_lo_[r];
  }

  /// out[k-1] = eta_k(x) for k = 1..count (count <= size()).
  void eval(std::span<const double> x, std::size_t count, std::span<cplx> out) const;
  /// Real-valued models only.
  void eval_real(std::span<const double> x, std::size_t count, std::span<double> out) const;

  RankedSpectrum spectrum(std::size_t count) const;

 private:
  SpectralModel model_;
  std::vector<double> sigma_;
  std::vector<int> freq_;  // size * d, trig only
  std::vector<int> max_abs_;  // per coordinate, trig only
  std::vector<long double> prefix_;
  std::vector<long double> prefix_lo_;
};

}  // namespace wlsq
