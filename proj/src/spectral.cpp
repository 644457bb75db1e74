#include "wlsq/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include "wlsq/errors.hpp"

namespace wlsq {

namespace {

double factor(const WeightModel& model, int k) {
  const double a = std::abs(static_cast<double>(k));
  if (model.kind == WeightKind::sharp_mixed) return std::pow(1.0 + a, model.s);
  return std::pow(1.0 + a * a, 0.5 * model.s);
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ArgumentError(std::string(name) + " must be a positive finite number");
  }
}

// Factors multiplied in ascending |k_j| order so permuted frequencies give
// bit-identical weights (ties in the rearrangement stay exact). `table`, when
// given, holds factor(a) for every |k_j| that can occur.
double product_weight(const WeightModel& model, std::span<const int> k, const std::vector<double>* table) {
  constexpr std::size_t kInline = 32;
  std::array<int, kInline> inline_buf{};
  std::vector<int> heap_buf;
  int* a = inline_buf.data();
  if (k.size() > kInline) {
    heap_buf.resize(k.size());
    a = heap_buf.data();
  }
  for (std::size_t j = 0; j < k.size(); ++j) a[j] = std::abs(k[j]);
  std::sort(a, a + k.size());
  double w = 1.0;
  for (std::size_t j = 0; j < k.size(); ++j) w *= table ? (*table)[a[j]] : factor(model, a[j]);
  return w;
}

}  // namespace

WeightModel WeightModel::sharp(double s, int d) {
  require_positive(s, "s");
  if (d < 1) throw ArgumentError("d must be >= 1");
  WeightModel w;
  w.kind = WeightKind::sharp_mixed;
  w.s = s;
  w.d = d;
  std::ostringstream os;
  os << "prod_j (1+|k_j|)^" << s << " on Z^" << d;
  w.description = os.str();
  return w;
}

WeightModel WeightModel::plus(double s, int d) {
  require_positive(s, "s");
  if (d < 1) throw ArgumentError("d must be >= 1");
  WeightModel w;
  w.kind = WeightKind::plus_mixed;
  w.s = s;
  w.d = d;
  std::ostringstream os;
  os << "prod_j (1+|k_j|^2)^(" << s << "/2) on Z^" << d;
  w.description = os.str();
  return w;
}

WeightModel WeightModel::custom(int d, std::function<double(std::span<const int>)> evaluator,
                                std::function<int(double, int)> coordinate_bound,
                                std::string description) {
  if (d < 1) throw ArgumentError("d must be >= 1");
  if (!evaluator) throw ArgumentError("custom weight needs an evaluator");
  if (!coordinate_bound) throw ArgumentError("custom weight needs a coordinate bound function");
  WeightModel w;
  w.kind = WeightKind::custom;
  w.d = d;
  w.evaluator = std::move(evaluator);
  w.coordinate_bound = std::move(coordinate_bound);
  w.description = std::move(description);
  return w;
}

double weight_eval(const WeightModel& model, std::span<const int> k) {
  if (k.size() != static_cast<std::size_t>(model.d)) {
    throw ArgumentError("frequency has " + std::to_string(k.size()) + " coordinates, model has d=" +
                        std::to_string(model.d));
  }
  if (model.kind == WeightKind::custom) {
    const double w = model.evaluator(k);
    if (!(w > 0.0)) throw ArgumentError("custom weight returned a non-positive value");
    return w;
  }
  return product_weight(model, k, nullptr);
}

int frequency_box_bound(const WeightModel& model, double radius, int coordinate) {
  if (radius < 1.0) return -1;
  if (model.kind == WeightKind::custom) return model.coordinate_bound(radius, coordinate);
  // Every other factor is >= 1, so |k_j| is limited by factor(k_j) <= R.
  double guess = model.kind == WeightKind::sharp_mixed
                     ? std::pow(radius, 1.0 / model.s) - 1.0
                     : std::sqrt(std::max(0.0, std::pow(radius, 2.0 / model.s) - 1.0));
  int b = static_cast<int>(std::max(0.0, std::floor(guess)));
  while (factor(model, b + 1) <= radius) ++b;
  while (b > 0 && factor(model, b) > radius) --b;
  return b;
}

namespace {

void enumerate_product(const WeightModel& model, double radius, const std::vector<double>& table,
                       std::vector<int>& current, int coord, double partial, std::vector<std::vector<int>>& out,
                       std::size_t budget) {
  if (coord == model.d) {
    if (product_weight(model, current, &table) <= radius) {
      if (out.size() >= budget) throw ResourceError("frequency enumeration budget exceeded", radius);
      out.push_back(current);
    }
    return;
  }
  // Factors increase with |k_j|, so the first overshoot ends the coordinate.
  const int b = static_cast<int>(table.size()) - 1;
  for (int a = 0; a <= b; ++a) {
    const double next = partial * table[a];
    if (next > radius * (1.0 + 1e-12)) break;
    current[coord] = a;
    enumerate_product(model, radius, table, current, coord + 1, next, out, budget);
    if (a > 0) {
      current[coord] = -a;
      enumerate_product(model, radius, table, current, coord + 1, next, out, budget);
    }
  }
  current[coord] = 0;
}

void enumerate_box(const WeightModel& model, double radius, std::vector<int>& current, int coord,
                   std::vector<std::vector<int>>& out, std::size_t budget) {
  if (coord == model.d) {
    if (weight_eval(model, current) <= radius) {
      if (out.size() >= budget) throw ResourceError("frequency enumeration budget exceeded", radius);
      out.push_back(current);
    }
    return;
  }
  const int b = model.coordinate_bound(radius, coord);
  for (int k = -b; k <= b; ++k) {
    current[coord] = k;
    enumerate_box(model, radius, current, coord + 1, out, budget);
  }
  current[coord] = 0;
}

std::vector<std::vector<int>> frequency_set_budget(const WeightModel& model, double radius,
                                                   std::size_t budget) {
  std::vector<std::vector<int>> out;
  if (!(radius >= 1.0) && model.kind != WeightKind::custom) return out;
  std::vector<int> current(model.d, 0);
  if (model.kind == WeightKind::custom) {
    enumerate_box(model, radius, current, 0, out, budget);
  } else {
    const int b = frequency_box_bound(model, radius, 0);
    std::vector<double> table(b + 1);
    for (int a = 0; a <= b; ++a) table[a] = factor(model, a);
    enumerate_product(model, radius, table, current, 0, 1.0, out, budget);
  }
  return out;
}

}  // namespace

std::vector<std::vector<int>> frequency_set(const WeightModel& model, double radius) {
  auto out = frequency_set_budget(model, radius, std::size_t{1} << 28);
  std::sort(out.begin(), out.end());
  return out;
}

SpectralModel SpectralModel::trigonometric(WeightModel weight) {
  if (weight.d < 1) throw ArgumentError("d must be >= 1");
  SpectralModel m;
  m.kind_ = BasisKind::trigonometric;
  m.weight_ = std::move(weight);
  return m;
}

SpectralModel SpectralModel::legendre(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw ArgumentError("Legendre model needs s > 0");
  SpectralModel m;
  m.kind_ = BasisKind::legendre;
  m.legendre_s_ = s;
  m.weight_.d = 1;
  return m;
}

bool SpectralModel::contains(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dim())) return false;
  if (kind_ == BasisKind::legendre) return x[0] >= -1.0 && x[0] <= 1.0;
  return std::all_of(x.begin(), x.end(), [](double v) { return v >= 0.0 && v <= 2.0 * M_PI; });
}

void SpectralModel::check_point(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dim())) {
    throw ArgumentError("point has " + std::to_string(x.size()) + " coordinates, model has d=" +
                        std::to_string(dim()));
  }
  if (!contains(x)) throw DomainError("point outside " + domain_description());
}

std::string SpectralModel::domain_description() const {
  if (kind_ == BasisKind::legendre) return "[-1,1] with Lebesgue measure dx";
  return "torus [0,2pi)^" + std::to_string(weight_.d) + " with measure (2pi)^-d dx";
}

double SpectralModel::lebesgue_density() const {
  if (kind_ == BasisKind::legendre) return 1.0;
  return std::pow(2.0 * M_PI, -weight_.d);
}

std::string SpectralModel::key() const {
  std::ostringstream os;
  os.precision(17);
  if (kind_ == BasisKind::legendre) {
    os << "legendre:" << legendre_s_;
  } else if (weight_.kind == WeightKind::sharp_mixed) {
    os << "trig_sharp:" << weight_.s << ":" << weight_.d;
  } else if (weight_.kind == WeightKind::plus_mixed) {
    os << "trig_plus:" << weight_.s << ":" << weight_.d;
  } else {
    return {};
  }
  return os.str();
}

double legendre_sigma(double s, std::size_t degree) {
  const double j = static_cast<double>(degree);
  return 1.0 / std::sqrt(1.0 + std::pow(j * (j + 1.0), s));
}

namespace {

struct RankedFrequencies {
  std::vector<std::vector<int>> freqs;
  std::vector<double> weights;
};

RankedFrequencies rank_trig(const WeightModel& model, std::size_t count, std::size_t budget) {
  double radius = 1.0;
  std::vector<std::vector<int>> set;
  while (true) {
    set = frequency_set_budget(model, radius, budget);
    if (set.size() >= count) break;
    if (radius > 1e300) throw ResourceError("weight radius overflow during rearrangement", radius);
    // |I(R)| grows roughly like R^(1/s); aim slightly past the target.
    const double fill = set.empty() ? 4.0 : static_cast<double>(count) / static_cast<double>(set.size());
    const double s = model.is_product() ? model.s : 1.0;
    radius *= std::clamp(1.05 * std::pow(fill, s), 1.25, 8.0);
  }
  std::vector<double> w(set.size());
  std::vector<int> l1(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    w[i] = weight_eval(model, set[i]);
    l1[i] = std::accumulate(set[i].begin(), set[i].end(), 0, [](int a, int b) { return a + std::abs(b); });
  }
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (w[a] != w[b]) return w[a] < w[b];
    if (l1[a] != l1[b]) return l1[a] < l1[b];
    return set[a] < set[b];
  });
  RankedFrequencies out;
  out.freqs.reserve(count);
  out.weights.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    out.freqs.push_back(std::move(set[order[r]]));
    out.weights.push_back(w[order[r]]);
  }
  return out;
}

}  // namespace

// sigma^2 of one frequency in long double, independent of the double weight's rounding.
long double sigma_sq_extended(const WeightModel& model, const std::vector<int>& k, double weight) {
  if (model.kind == WeightKind::custom) return 1.0L / (static_cast<long double>(weight) * weight);
  long double v = 1.0L;
  const long double s = model.s;
  for (int c : k) {
    const long double a = std::abs(c);
    v *= model.kind == WeightKind::sharp_mixed ? std::pow(1.0L + a, -2.0L * s) : std::pow(1.0L + a * a, -s);
  }
  return v;
}

RankedSpectrum ranked_spectrum(const SpectralModel& model, std::size_t count, std::size_t enumeration_budget) {
  if (count < 1) throw ArgumentError("ranked_spectrum needs N >= 1");
  RankedSpectrum out;
  out.entries.reserve(count);
  if (model.kind() == BasisKind::legendre) {
    for (std::size_t r = 1; r <= count; ++r) {
      out.entries.push_back({r, {static_cast<int>(r - 1)}, legendre_sigma(model.smoothness(), r - 1)});
    }
    return out;
  }
  auto ranked = rank_trig(model.weight(), count, enumeration_budget);
  for (std::size_t r = 0; r < count; ++r) {
    out.entries.push_back({r + 1, std::move(ranked.freqs[r]), 1.0 / ranked.weights[r]});
  }
  return out;
}

void legendre_normalized(double x, std::span<double> out) {
  const std::size_t count = out.size();
  if (count == 0) return;
  double p_prev = 1.0;
  out[0] = p_prev * std::sqrt(0.5);
  if (count == 1) return;
  double p = x;
  out[1] = p * std::sqrt(1.5);
  for (std::size_t n = 1; n + 1 < count; ++n) {
    const double nn = static_cast<double>(n);
    const double p_next = ((2.0 * nn + 1.0) * x * p - nn * p_prev) / (nn + 1.0);
    p_prev = p;
    p = p_next;
    out[n + 1] = p * std::sqrt((2.0 * nn + 3.0) / 2.0);
  }
}

cplx basis_eval(const SpectralModel& model, std::size_t rank, std::span<const double> x) {
  if (rank < 1) throw ArgumentError("rank must be >= 1");
  model.check_point(x);
  if (model.kind() == BasisKind::legendre) {
    std::vector<double> values(rank);
    legendre_normalized(x[0], values);
    return values.back();
  }
  const auto basis = SpectralBasis::get(model, rank);
  const auto k = basis->index(rank);
  double phase = 0.0;
  for (std::size_t j = 0; j < k.size(); ++j) phase += static_cast<double>(k[j]) * x[j];
  return std::polar(1.0, phase);
}

SpectralBasis::SpectralBasis(const SpectralModel& model, std::size_t size) : model_(model) {
  if (size < 1) throw ArgumentError("basis size must be >= 1");
  sigma_.resize(size);
  std::vector<long double> terms(size);
  if (model.kind() == BasisKind::legendre) {
    for (std::size_t r = 0; r < size; ++r) {
      sigma_[r] = legendre_sigma(model.smoothness(), r);
      terms[r] = static_cast<long double>(sigma_[r]) * sigma_[r];
    }
  } else {
    const int d = model.dim();
    auto ranked = rank_trig(model.weight(), size, std::size_t{1} << 27);
    freq_.resize(size * d);
    max_abs_.assign(size * d, 0);
    for (std::size_t r = 0; r < size; ++r) {
      sigma_[r] = 1.0 / ranked.weights[r];
      terms[r] = sigma_sq_extended(model.weight(), ranked.freqs[r], ranked.weights[r]);
      for (int c = 0; c < d; ++c) {
        const int v = ranked.freqs[r][c];
        freq_[r * d + c] = v;
        const int prev = r == 0 ? 0 : max_abs_[(r - 1) * d + c];
        max_abs_[r * d + c] = std::max(prev, std::abs(v));
      }
    }
  }
  // Neumaier summation: tails far below one ulp of the prefix still count.
  prefix_.resize(size + 1);
  prefix_lo_.resize(size + 1);
  prefix_[0] = 0.0L;
  prefix_lo_[0] = 0.0L;
  long double lo = 0.0L;
  for (std::size_t r = 0; r < size; ++r) {
    const long double a = prefix_[r];
    const long double t = a + terms[r];
    lo += a >= terms[r] ? (a - t) + terms[r] : (terms[r] - t) + a;
    prefix_[r + 1] = t;
    prefix_lo_[r + 1] = lo;
  }
}

std::shared_ptr<const SpectralBasis> SpectralBasis::get(const SpectralModel& model, std::size_t min_size) {
  min_size = std::max<std::size_t>(min_size, 1);
  const std::string key = model.key();
  if (key.empty()) return std::make_shared<const SpectralBasis>(model, min_size);
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const SpectralBasis>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end() && it->second->size() >= min_size) return it->second;
  std::size_t size = 64;
  while (size < min_size) size *= 2;
  if (it != cache.end()) size = std::max(size, 2 * it->second->size());
  auto basis = std::make_shared<const SpectralBasis>(model, size);
  cache[key] = basis;
  return basis;
}

std::span<const int> SpectralBasis::index(std::size_t rank) const {
  if (rank < 1 || rank > size()) throw ArgumentError("rank outside basis");
  if (model_.kind() == BasisKind::legendre) {
    // Degrees are implicit; expose through a small static table is awkward, so
    // trig-only callers use this accessor.
    throw ArgumentError("index() is only available for trigonometric bases");
  }
  const auto d = static_cast<std::size_t>(model_.dim());
  return {freq_.data() + (rank - 1) * d, d};
}

void SpectralBasis::eval(std::span<const double> x, std::size_t count, std::span<cplx> out) const {
  if (count > size()) throw ArgumentError("basis evaluation beyond basis size");
  if (model_.kind() == BasisKind::legendre) {
    std::vector<double> values(count);
    legendre_normalized(x[0], values);
    for (std::size_t k = 0; k < count; ++k) out[k] = values[k];
    return;
  }
  if (count == 0) return;
  const int d = model_.dim();
  // Per-coordinate tables exp(i j x_c) for |j| <= running max.
  std::vector<std::vector<cplx>> tables(d);
  for (int c = 0; c < d; ++c) {
    const int b = max_abs_[(count - 1) * d + c];
    auto& t = tables[c];
    t.resize(2 * b + 1);
    for (int j = -b; j <= b; ++j) t[j + b] = std::polar(1.0, static_cast<double>(j) * x[c]);
  }
  for (std::size_t r = 0; r < count; ++r) {
    cplx v = tables[0][freq_[r * d] + (static_cast<int>(tables[0].size()) - 1) / 2];
    for (int c = 1; c < d; ++c) {
      const int b = (static_cast<int>(tables[c].size()) - 1) / 2;
      v *= tables[c][freq_[r * d + c] + b];
    }
    out[r] = v;
  }
}

void SpectralBasis::eval_real(std::span<const double> x, std::size_t count, std::span<double> out) const {
  if (!model_.real_valued()) throw ArgumentError("eval_real on a complex basis");
  if (count > size()) throw ArgumentError("basis evaluation beyond basis size");
  legendre_normalized(x[0], out.subspan(0, count));
}

RankedSpectrum SpectralBasis::spectrum(std::size_t count) const {
  if (count > size()) throw ArgumentError("spectrum request beyond basis size");
  RankedSpectrum out;
  out.entries.reserve(count);
  for (std::size_t r = 1; r <= count; ++r) {
    std::vector<int> idx;
    if (model_.kind() == BasisKind::legendre) {
      idx = {static_cast<int>(r - 1)};
    } else {
      auto k = index(r);
      idx.assign(k.begin(), k.end());
    }
    out.entries.push_back({r, std::move(idx), sigma_[r - 1]});
  }
  return out;
}

}  // namespace wlsq
