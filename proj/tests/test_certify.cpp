#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "wlsq/certify.hpp"
#include "wlsq/christoffel.hpp"
#include "wlsq/errors.hpp"
#include "wlsq/rng.hpp"
#include "wlsq/series.hpp"
#include "oracles.hpp"

using namespace wlsq;

namespace {

const SpectralModel trig1 = SpectralModel::trigonometric(WeightModel::sharp(2, 1));
const SpectralModel trig2 = SpectralModel::trigonometric(WeightModel::sharp(2, 2));
const SpectralModel leg2 = SpectralModel::legendre(2);

RecoveryOperator make_operator(const SpectralModel& model, std::size_t m, std::size_t n, std::uint64_t seed) {
  const auto nodes = draw_nodes(model, m, n, DensityVariant::krieg_ullrich, seed);
  return fit(assemble(model, nodes, m, true), std::vector<cplx>(n, 0.0));
}

// Unit-norm f = sum_k a_k sigma_k eta_k over the first `ranks` ranks.
std::vector<cplx> unit_ball_coefficients(const SpectralModel& model, std::size_t ranks, Philox& rng) {
  const auto basis = SpectralBasis::get(model, ranks);
  std::vector<cplx> a(ranks);
  double norm = 0.0;
  for (auto& v : a) {
    v = model.real_valued() ? cplx(rng.normal()) : rng.complex_normal();
    norm += std::norm(v);
  }
  for (std::size_t k = 0; k < ranks; ++k) a[k] *= basis->sigma(k + 1) / std::sqrt(norm);
  return a;
}

cplx series(const SpectralModel& model, const std::vector<cplx>& coef, std::span<const double> x) {
  const auto basis = SpectralBasis::get(model, coef.size());
  std::vector<cplx> eta(coef.size());
  basis->eval(x, coef.size(), eta);
  cplx acc = 0.0;
  for (std::size_t k = 0; k < coef.size(); ++k) acc += coef[k] * eta[k];
  return acc;
}

}  // namespace

TEST_CASE("kernel diagonal on the torus is the spectral trace") {
  const auto total = trig_sigma_sq_total(trig1.weight());
  for (double t : {0.0, 1.0, 5.0}) {
    const std::vector<double> x{t};
    const auto k = kernel_eval(trig1, x, x, 1e-9);
    CHECK(std::abs(k.value.imag()) <= 1e-15);
    CHECK(k.value.real() <= static_cast<double>(total.upper) + 1e-15);
    CHECK(k.value.real() + k.remainder >= static_cast<double>(total.lower) - 1e-15);
    CHECK(k.remainder <= 1e-9);
  }
}

TEST_CASE("kernel is hermitian") {
  const std::vector<double> x{0.3, 2.0};
  const std::vector<double> y{4.1, 5.9};
  const auto a = kernel_eval(trig2, x, y, 1e-8);
  const auto b = kernel_eval(trig2, y, x, 1e-8);
  CHECK(std::abs(a.value - std::conj(b.value)) <= 2e-8);
  const std::vector<double> u{-0.4};
  const std::vector<double> v{0.8};
  const auto c = kernel_eval(leg2, u, v, 1e-8);
  const auto e = kernel_eval(leg2, v, u, 1e-8);
  CHECK(std::abs(c.value - std::conj(e.value)) <= 2e-8);
}

TEST_CASE("legendre kernel at the endpoint matches partial sums") {
  const std::vector<double> one{1.0};
  const auto k = kernel_eval(leg2, one, one, 1e-7);
  long double direct = 0.0L;
  for (long j = 0; j < 2000000; ++j) {
    direct += (2.0L * j + 1.0L) / 2.0L / (1.0L + std::pow(static_cast<long double>(j) * (j + 1), 2));
  }
  CHECK(std::abs(k.value.real() - static_cast<double>(direct)) <= k.remainder + 1e-12);
  CHECK_THROWS_AS(kernel_eval(leg2, one, one, 1e-14, 1000), ResourceError);
}

TEST_CASE("zero operator gives the kernel diagonal") {
  const auto zero = FactoredOperator::zero(trig1);
  const std::vector<double> x{2.2};
  const auto e = pointwise_wce(zero, trig1, x, 1e-10);
  const auto k = kernel_eval(trig1, x, x, 1e-10);
  CHECK(e.value == doctest::Approx(std::sqrt(k.value.real())).epsilon(1e-12));
  const auto cert = certify_sup(zero, trig1, GridSpec::uniform(trig1, 16), 1e-10);
  CHECK(cert.sup_value == doctest::Approx(std::sqrt(k.value.real())).epsilon(1e-12));

  const auto zl = FactoredOperator::zero(leg2);
  const std::vector<double> one{1.0};
  const auto kl = kernel_eval(leg2, one, one, 1e-8);
  CHECK(certify_sup(zl, leg2, GridSpec::uniform(leg2, 33), 1e-8).sup_value ==
        doctest::Approx(std::sqrt(kl.value.real())).epsilon(1e-10));
}

TEST_CASE("power function vanishes at nodes of an interpolating operator") {
  for (const auto& model : {trig1, leg2}) {
    const std::size_t m = 6;
    const auto op = make_operator(model, m, m - 1, 42);
    for (std::size_t i = 0; i < op.nodes().size(); ++i) {
      for (auto route : {CertifyRoute::spectral, CertifyRoute::gram}) {
        CertifyOptions options;
        options.route = route;
        const auto e = pointwise_wce(op, model, op.nodes().point(i), 1e-9, options);
        CHECK(e.value <= 1e-6);
        CHECK(e.raw_square >= -1e-10);
      }
    }
  }
}

TEST_CASE("routes agree") {
  for (const auto& model : {trig1, leg2}) {
    const auto op = make_operator(model, 7, 30, 3);
    const auto grid = GridSpec::uniform(model, 41);
    const double eps = 1e-7;
    CertifyOptions spectral;
    spectral.keep_values = true;
    CertifyOptions gram = spectral;
    gram.route = CertifyRoute::gram;
    CertifyOptions serial = spectral;
    serial.exec = Exec::serial;
    const auto a = certify_sup(op, model, grid, eps, spectral);
    const auto b = certify_sup(op, model, grid, eps, gram);
    const auto c = certify_sup(op, model, grid, eps, serial);
    CHECK(a.truncation_rank == b.truncation_rank);
    CHECK(a.sup_value == doctest::Approx(b.sup_value).epsilon(1e-8));
    CHECK(a.sup_value == doctest::Approx(c.sup_value).epsilon(1e-13));
    CHECK(a.argmax_index == c.argmax_index);
    CHECK(b.roundoff_violations == 0);
    const auto points = grid_points(model, grid);
    for (std::size_t i = 0; i < grid.size(); i += 5) {
      const auto e = pointwise_wce(op, model, {points.data() + i, 1}, eps);
      CHECK(e.value == doctest::Approx(a.values[i]).epsilon(1e-9));
      CHECK(e.slack == doctest::Approx(a.slacks[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("two-dimensional certificate routes agree") {
  const auto op = make_operator(trig2, 9, 60, 8);
  const auto grid = GridSpec::uniform(trig2, 12);
  CertifyOptions gram;
  gram.route = CertifyRoute::gram;
  const auto a = certify_sup(op, trig2, grid, 1e-5);
  const auto b = certify_sup(op, trig2, grid, 1e-5, gram);
  CHECK(a.sup_value == doctest::Approx(b.sup_value).epsilon(1e-8));
  CHECK(a.argmax.size() == 2);
}

TEST_CASE("finite spectrum certificate vanishes in the exact-reproduction regime") {
  for (const auto& model : {trig1, leg2}) {
    const std::size_t m = 9;
    const auto op = make_operator(model, m, 80, 5);
    CertifyOptions options;
    options.fixed_rank = m - 1;
    const auto cert = certify_sup(op, model, GridSpec::uniform(model, 257), 1.0, options);
    CHECK(cert.sup_value <= 1e-6);
    CHECK(cert.truncation_slack == 0.0);
  }
}

TEST_CASE("certificate dominates sampled unit-ball errors") {
  Philox rng(77);
  for (const auto& model : {trig1, leg2}) {
    const std::size_t m = 8;
    const auto nodes = draw_nodes(model, m, 60, DensityVariant::krieg_ullrich, 19);
    const auto matrix = assemble(model, nodes, m, true);
    const auto op0 = fit(matrix, std::vector<cplx>(60, 0.0));
    const auto grid = GridSpec::uniform(model, 129);
    const auto cert = certify_sup(op0, model, grid, 1e-8);
    const auto points = grid_points(model, grid);
    for (int t = 0; t < 100; ++t) {
      const auto coef = unit_ball_coefficients(model, 300, rng);
      std::vector<cplx> f(60);
      for (std::size_t i = 0; i < 60; ++i) f[i] = series(model, coef, nodes.point(i));
      const auto op = fit(matrix, f);
      double worst = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::span<const double> x(points.data() + i, 1);
        worst = std::max(worst, std::abs(series(model, coef, x) - op.evaluate(x)));
      }
      CHECK(worst <= cert.upper() + 1e-12);
    }
  }
}

TEST_CASE("unit-ball search bounds the power function from below") {
  Philox rng(2718);
  const auto op = make_operator(trig1, 3, 5, 11);
  for (double t : {0.0, 2.0 * M_PI / 3.0, 4.0 * M_PI / 3.0}) {
    const std::vector<double> x{t};
    const auto e = pointwise_wce(op, trig1, x, 1e-12);
    const auto search = oracle::unit_ball_search(trig1, op, x, 40, 10000, 1000, rng);
    CHECK(search.best <= e.value + e.slack);
    CHECK(search.best * 1.05 >= e.value);
    // Independent uniform directions in C^40 alone stay far below e(x).
    CHECK(search.best_iid < 0.8 * e.value);
  }
}

TEST_CASE("more nodes give a smaller certificate in the median") {
  const std::size_t m = 8;
  const auto grid = GridSpec::uniform(trig1, 256);
  std::vector<double> ratio;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const auto many = draw_nodes(trig1, m, 200, DensityVariant::krieg_ullrich, 500 + trial);
    std::vector<std::size_t> prefix(40);
    for (std::size_t i = 0; i < 40; ++i) prefix[i] = i;
    const auto few = many.subset(prefix);
    const auto a = fit(assemble(trig1, many, m, true), std::vector<cplx>(200, 0.0));
    const auto b = fit(assemble(trig1, few, m, true), std::vector<cplx>(40, 0.0));
    ratio.push_back(certify_sup(a, trig1, grid, 1e-9).sup_value / certify_sup(b, trig1, grid, 1e-9).sup_value);
  }
  std::nth_element(ratio.begin(), ratio.begin() + 10, ratio.end());
  CHECK(ratio[10] <= 1.0);
}

TEST_CASE("certificate obeys the projection plus coefficient decomposition") {
  for (const auto& model : {trig1, leg2}) {
    const std::size_t m = 10;
    const std::size_t n = 120;
    const auto op = make_operator(model, m, n, 31);
    const FactoredOperator f(op);
    const auto grid = GridSpec::uniform(model, 129);
    const double eps = 1e-9;
    const auto cert = certify_sup(f, model, grid, eps);
    const std::size_t K = cert.truncation_rank;
    // C = B Phi_K diag(sigma) restricted to ranks >= m.
    const auto basis = SpectralBasis::get(model, K);
    Eigen::MatrixXcd phi(n, K - (m - 1));
    std::vector<cplx> row(K);
    for (std::size_t i = 0; i < n; ++i) {
      basis->eval(op.nodes().point(i), K, row);
      for (std::size_t k = m - 1; k < K; ++k) phi(i, k - (m - 1)) = row[k] * basis->sigma(k + 1);
    }
    const Eigen::MatrixXcd B = f.is_real() ? Eigen::MatrixXcd(f.b_real().cast<cplx>()) : f.b_complex();
    const double c_norm = Eigen::JacobiSVD<Eigen::MatrixXcd>(B * phi).singularValues()(0);
    const auto proj = projection_error_sup(model, m, grid, eps);
    const double N = christoffel_sup(model, m, grid);
    CHECK(cert.sup_value <= proj.upper + std::sqrt(N) * c_norm + 1e-12);
  }
}

TEST_CASE("certify argument errors") {
  const auto op = make_operator(trig1, 5, 20, 1);
  CHECK_THROWS_AS(certify_sup(op, leg2, GridSpec::uniform(leg2, 9), 1e-6), ArgumentError);
  CHECK_THROWS_AS(certify_sup(op, trig1, GridSpec::uniform(trig1, 9), 0.0), ArgumentError);
  CHECK(kernel_truncation_rank(trig1, 1e-6) >= 1);
  CHECK(pointwise_remainder(trig1, kernel_truncation_rank(trig1, 1e-6)) <= 1e-6);
  CHECK(pointwise_remainder(trig1, kernel_truncation_rank(trig1, 1e-6) - 1) > 1e-6);
}
