#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "wlsq/errors.hpp"
#include "wlsq/grid.hpp"
#include "wlsq/rng.hpp"
#include "wlsq/spectral.hpp"

using namespace wlsq;

namespace {

// Brute force over a box that certainly contains every frequency of interest.
std::vector<double> brute_sigmas(const WeightModel& w, int box) {
  std::vector<double> out;
  std::vector<int> k(w.d, -box);
  while (true) {
    double prod = 1.0;
    for (int v : k) {
      const double a = std::abs(v);
      prod *= w.kind == WeightKind::sharp_mixed ? std::pow(1.0 + a, w.s) : std::pow(1.0 + a * a, 0.5 * w.s);
    }
    out.push_back(1.0 / prod);
    int c = w.d - 1;
    while (c >= 0 && ++k[c] > box) k[c--] = -box;
    if (c < 0) break;
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace

TEST_CASE("philox known-answer vector") {
  // Random123 reference: philox4x32_10, counter 0, key 0.
  Philox rng(0);
  CHECK(rng() == 0x6627e8d5u);
  CHECK(rng() == 0xe169c58du);
  CHECK(rng() == 0xbc57ac4cu);
  CHECK(rng() == 0x9b00dbd8u);
}

TEST_CASE("philox substreams are reproducible and distinct") {
  auto a = Philox::substream(42, 3);
  auto b = Philox::substream(42, 3);
  auto c = Philox::substream(42, 4);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
  CHECK(Philox::substream(42, 3).next_u64() != c.next_u64());
  Philox u(7);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("weight_eval examples") {
  const std::vector<int> zero2{0, 0};
  const std::vector<int> one1{1};
  const std::vector<int> ones2{1, 1};
  CHECK(weight_eval(WeightModel::sharp(2, 2), zero2) == 1.0);
  CHECK(weight_eval(WeightModel::sharp(2, 1), one1) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(weight_eval(WeightModel::plus(1, 2), ones2) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(weight_eval(WeightModel::sharp(2, 2), one1), ArgumentError);
}

TEST_CASE("weight_eval is permutation invariant bit for bit") {
  const auto w = WeightModel::sharp(1.3, 3);
  const std::vector<int> a{3, -1, 7};
  const std::vector<int> b{-7, 3, 1};
  CHECK(weight_eval(w, a) == weight_eval(w, b));
}

TEST_CASE("frequency_set examples") {
  const auto set = frequency_set(WeightModel::sharp(1, 2), 2.0);
  CHECK(set.size() == 5);
  CHECK(std::find(set.begin(), set.end(), std::vector<int>{0, 0}) != set.end());
  CHECK(std::find(set.begin(), set.end(), std::vector<int>{-1, 0}) != set.end());
  CHECK(std::find(set.begin(), set.end(), std::vector<int>{0, 1}) != set.end());
  CHECK(frequency_set(WeightModel::sharp(1, 1), 1.0).size() == 1);
  CHECK(frequency_set(WeightModel::sharp(1, 1), 3.0).size() == 5);
  CHECK(frequency_set(WeightModel::sharp(1, 1), 0.5).empty());
}

TEST_CASE("frequency_set matches brute force enumeration") {
  for (const auto& w : {WeightModel::sharp(1, 2), WeightModel::plus(1.5, 2), WeightModel::sharp(0.7, 3)}) {
    for (double R : {1.0, 2.0, 3.5, 10.0, 17.0}) {
      const auto set = frequency_set(w, R);
      std::size_t brute = 0;
      const int box = static_cast<int>(std::pow(R, 1.0 / w.s)) + 1;
      std::vector<int> k(w.d, -box);
      while (true) {
        if (weight_eval(w, k) <= R) ++brute;
        int c = w.d - 1;
        while (c >= 0 && ++k[c] > box) k[c--] = -box;
        if (c < 0) break;
      }
      CHECK(set.size() == brute);
    }
  }
}

TEST_CASE("custom weights use the supplied box bound") {
  auto w = WeightModel::custom(
      2, [](std::span<const int> k) { return 1.0 + std::abs(k[0]) + 2.0 * std::abs(k[1]); },
      [](double R, int) { return static_cast<int>(R); }, "1+|k1|+2|k2|");
  // k2 = 0: |k1| <= 2; |k2| = 1: k1 = 0.
  CHECK(frequency_set(w, 3.0).size() == 7);
}

TEST_CASE("ranked spectrum examples") {
  const auto model = SpectralModel::trigonometric(WeightModel::sharp(1, 1));
  const auto spec = ranked_spectrum(model, 5);
  const std::vector<double> expected{1.0, 0.5, 0.5, 1.0 / 3.0, 1.0 / 3.0};
  REQUIRE(spec.entries.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(spec.entries[i].rank == i + 1);
    CHECK(spec.entries[i].sigma == doctest::Approx(expected[i]).epsilon(1e-15));
  }
  // Tie rule: |k|_1 then lexicographic, so -1 precedes 1.
  CHECK(spec.entries[1].index == std::vector<int>{-1});
  CHECK(spec.entries[2].index == std::vector<int>{1});

  const auto leg = ranked_spectrum(SpectralModel::legendre(1), 3);
  CHECK(leg.entries[0].sigma == 1.0);
  CHECK(leg.entries[1].sigma == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(leg.entries[2].sigma == doctest::Approx(1.0 / std::sqrt(7.0)).epsilon(1e-15));
  CHECK(leg.entries[2].index == std::vector<int>{2});
}

TEST_CASE("ranked spectrum equals brute-force rearrangement") {
  for (const auto& w : {WeightModel::sharp(1, 2), WeightModel::plus(2, 2), WeightModel::sharp(1.5, 3)}) {
    const auto model = SpectralModel::trigonometric(w);
    const auto spec = ranked_spectrum(model, 200);
    const auto brute = brute_sigmas(w, 60);
    for (std::size_t i = 0; i < 200; ++i) {
      CHECK(spec.entries[i].sigma == doctest::Approx(brute[i]).epsilon(1e-14));
      if (i > 0) CHECK(spec.entries[i - 1].sigma >= spec.entries[i].sigma);
    }
    std::map<std::vector<int>, int> seen;
    for (const auto& e : spec.entries) CHECK(++seen[e.index] == 1);
  }
}

TEST_CASE("ranked spectrum budget overflow reports radius") {
  const auto model = SpectralModel::trigonometric(WeightModel::sharp(1, 2));
  try {
    ranked_spectrum(model, 5000, 100);
    FAIL("expected ResourceError");
  } catch (const ResourceError& e) {
    CHECK(e.achieved() >= 1.0);
  }
}

TEST_CASE("basis_eval examples") {
  const auto trig = SpectralModel::trigonometric(WeightModel::sharp(2, 2));
  const std::vector<double> x{0.3, 5.9};
  for (std::size_t r = 1; r <= 30; ++r) CHECK(std::abs(basis_eval(trig, r, x)) == doctest::Approx(1.0).epsilon(1e-14));

  const auto leg = SpectralModel::legendre(2);
  const std::vector<double> p{0.37};
  const std::vector<double> one{1.0};
  CHECK(basis_eval(leg, 1, p).real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  for (std::size_t r = 1; r <= 50; ++r) {
    CHECK(basis_eval(leg, r, one).real() == doctest::Approx(std::sqrt((2.0 * (r - 1) + 1.0) / 2.0)).epsilon(1e-12));
  }
  const std::vector<double> outside{1.5};
  CHECK_THROWS_AS(basis_eval(leg, 1, outside), DomainError);
  const std::vector<double> bad_torus{-0.1, 1.0};
  CHECK_THROWS_AS(basis_eval(trig, 1, bad_torus), DomainError);
}

TEST_CASE("orthonormality under quadrature") {
  const auto trig = SpectralModel::trigonometric(WeightModel::sharp(1, 2));
  const auto basis = SpectralBasis::get(trig, 20);
  const auto rule = quadrature(trig, 32);
  std::vector<cplx> eta(20);
  std::vector<std::vector<cplx>> gram(20, std::vector<cplx>(20));
  for (std::size_t q = 0; q < rule.size(); ++q) {
    basis->eval(rule.node(q), 20, eta);
    for (int j = 0; j < 20; ++j)
      for (int k = 0; k < 20; ++k) gram[j][k] += rule.weights[q] * eta[j] * std::conj(eta[k]);
  }
  for (int j = 0; j < 20; ++j)
    for (int k = 0; k < 20; ++k) CHECK(std::abs(gram[j][k] - (j == k ? 1.0 : 0.0)) < 1e-12);

  const auto leg = SpectralModel::legendre(2);
  const auto lrule = quadrature(leg, 64);
  std::vector<double> v(40);
  std::vector<std::vector<double>> lg(40, std::vector<double>(40));
  for (std::size_t q = 0; q < lrule.size(); ++q) {
    legendre_normalized(lrule.nodes[q], v);
    for (int j = 0; j < 40; ++j)
      for (int k = 0; k < 40; ++k) lg[j][k] += lrule.weights[q] * v[j] * v[k];
  }
  for (int j = 0; j < 40; ++j)
    for (int k = 0; k < 40; ++k) CHECK(std::abs(lg[j][k] - (j == k ? 1.0 : 0.0)) < 1e-12);
}

TEST_CASE("appendix singular-value bound holds on the rearrangement") {
  for (int d : {2, 4}) {
    for (double s : {1.0, 2.0}) {
      const auto basis = SpectralBasis::get(SpectralModel::trigonometric(WeightModel::sharp(s, d)), 5000);
      const double expo = s / (1.0 + std::log2(static_cast<double>(d)));
      for (std::size_t n = 6; n <= 5000; ++n) {
        CHECK_MESSAGE(basis->sigma(n) <= std::pow(16.0 / (3.0 * n), expo), "d=", d, " s=", s, " n=", n);
      }
    }
  }
}

TEST_CASE("plus-norm singular-value bound") {
  for (int d : {3, 4}) {
    const double s = 1.5;
    const double l = std::log2(d - 1.0);
    const double cd = std::pow(1.0 + (1.0 / (d - 1.0)) * (1.0 + 2.0 / l), d - 1.0);
    const auto basis = SpectralBasis::get(SpectralModel::trigonometric(WeightModel::plus(s, d)), 3000);
    for (std::size_t n = 2; n <= 3000; ++n) {
      CHECK(basis->sigma(n) <= std::pow(cd / n, s / (2.0 * (1.0 + l))) * (1.0 + 1e-12));
    }
  }
}
