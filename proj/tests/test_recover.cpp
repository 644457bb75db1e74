#include <doctest.h>

#include <cmath>
#include <vector>

#include "wlsq/errors.hpp"
#include "wlsq/grid.hpp"
#include "wlsq/recover.hpp"
#include "wlsq/rng.hpp"

using namespace wlsq;

namespace {

const SpectralModel trig1 = SpectralModel::trigonometric(WeightModel::sharp(2, 1));
const SpectralModel trig2 = SpectralModel::trigonometric(WeightModel::sharp(2, 2));
const SpectralModel leg2 = SpectralModel::legendre(2);

// Random unit-norm element of span{eta_1..eta_{m-1}}; real coefficients for real models.
std::vector<cplx> random_coefficients(const SpectralModel& model, std::size_t m, Philox& rng) {
  std::vector<cplx> c(m - 1);
  double norm = 0.0;
  for (auto& v : c) {
    v = model.real_valued() ? cplx(rng.normal()) : rng.complex_normal();
    norm += std::norm(v);
  }
  for (auto& v : c) v /= std::sqrt(norm);
  return c;
}

cplx series(const SpectralModel& model, const std::vector<cplx>& c, std::span<const double> x) {
  cplx acc = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) acc += c[k] * basis_eval(model, k + 1, x);
  return acc;
}

std::vector<cplx> sample(const SpectralModel& model, const NodeSet& nodes, const std::vector<cplx>& c) {
  std::vector<cplx> f(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) f[i] = series(model, c, nodes.point(i));
  return f;
}

double sup_error(const SpectralModel& model, const RecoveryOperator& op, const std::vector<cplx>& c,
                 std::size_t per_dim) {
  const GridSpec grid = GridSpec::uniform(model, per_dim);
  const auto pts = grid_points(model, grid);
  const auto d = static_cast<std::size_t>(model.dim());
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::span<const double> x(pts.data() + i * d, d);
    worst = std::max(worst, std::abs(op.evaluate(x) - series(model, c, x)));
  }
  return worst;
}

}  // namespace

TEST_CASE("assemble: trig weighted equals plain and entries are unimodular") {
  const auto nodes = draw_nodes(trig1, 9, 40, DensityVariant::krieg_ullrich, 3);
  const auto w = assemble(trig1, nodes, 9, true);
  const auto p = assemble(trig1, nodes, 9, false);
  CHECK(w.rows() == 40);
  CHECK(w.cols() == 8);
  CHECK((w.dense() - p.dense()).norm() == 0.0);
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(p.entry(i, k)) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("assemble: single node, m = 2") {
  const auto nodes = draw_nodes(leg2, 2, 1, DensityVariant::simple, 11);
  const auto a = assemble(leg2, nodes, 2, true);
  REQUIRE(a.rows() == 1);
  REQUIRE(a.cols() == 1);
  const double rho = nodes.sampling_density(0);
  CHECK(a.entry(0, 0).real() == doctest::Approx(basis_eval(leg2, 1, nodes.point(0)).real() / std::sqrt(rho)));
}

TEST_CASE("assemble argument errors") {
  const auto nodes = draw_nodes(trig1, 9, 5, DensityVariant::krieg_ullrich, 3);
  CHECK_THROWS_AS(assemble(trig1, nodes, 9, false), ArgumentError);
  CHECK_THROWS_AS(assemble(trig1, nodes, 1, false), ArgumentError);
  const auto leg_nodes = draw_nodes(leg2, 5, 20, DensityVariant::krieg_ullrich, 3);
  CHECK_THROWS_AS(assemble(leg2, leg_nodes, 6, true), ArgumentError);
  CHECK_NOTHROW(assemble(leg2, leg_nodes, 6, false));
}

TEST_CASE("fit matches the normal equations on small systems") {
  Philox rng(17);
  for (const auto& model : {trig1, leg2}) {
    for (std::size_t m = 2; m <= 4; ++m) {
      for (std::size_t n = m - 1; n <= 12; n += 3) {
        const auto nodes = draw_nodes(model, m, n, DensityVariant::krieg_ullrich, 100 + n + m);
        const auto a = assemble(model, nodes, m, true);
        std::vector<cplx> f(n);
        for (auto& v : f) v = model.real_valued() ? cplx(rng.normal()) : rng.complex_normal();
        const auto op = fit(a, f);
        const Eigen::MatrixXcd L = a.dense();
        Eigen::VectorXcd g(n);
        for (std::size_t i = 0; i < n; ++i) g(i) = f[i] * a.row_scale()(i);
        const Eigen::VectorXcd normal = (L.adjoint() * L).ldlt().solve(L.adjoint() * g);
        CHECK((op.coefficients() - normal).norm() <= 1e-8 * std::max(1.0, normal.norm()));
      }
    }
  }
}

TEST_CASE("exact reproduction on the approximation space") {
  Philox rng(5);
  struct Case {
    SpectralModel model;
    std::size_t m;
    std::size_t grid;
  };
  for (const auto& c : {Case{trig1, 9, 512}, Case{trig2, 9, 32}, Case{leg2, 12, 513}}) {
    const std::size_t n = static_cast<std::size_t>(20.0 * c.m * std::log(static_cast<double>(c.m)));
    const auto nodes = draw_nodes(c.model, c.m, n, DensityVariant::krieg_ullrich, 9);
    const auto a = assemble(c.model, nodes, c.m, true);
    for (int t = 0; t < 10; ++t) {
      const auto coef = random_coefficients(c.model, c.m, rng);
      const auto op = fit(a, sample(c.model, nodes, coef));
      CHECK(op.rank_ok());
      CHECK(op.residual_norm() <= 1e-9 * op.sample_norm());
      CHECK(sup_error(c.model, op, coef, c.grid) <= 1e-9);
    }
  }
}

TEST_CASE("zero samples and linearity") {
  const auto nodes = draw_nodes(leg2, 6, 60, DensityVariant::krieg_ullrich, 1);
  const auto a = assemble(leg2, nodes, 6, true);
  const auto zero = fit(a, std::vector<cplx>(60, 0.0));
  CHECK(zero.coefficients().norm() == 0.0);

  Philox rng(8);
  std::vector<cplx> u(60);
  std::vector<cplx> v(60);
  std::vector<cplx> mix(60);
  const cplx alpha(0.7, -1.1);
  const cplx beta(-2.0, 0.3);
  for (std::size_t i = 0; i < 60; ++i) {
    u[i] = rng.complex_normal();
    v[i] = rng.complex_normal();
    mix[i] = alpha * u[i] + beta * v[i];
  }
  const auto ou = fit(a, u);
  const auto ov = fit(a, v);
  const auto om = fit(a, mix);
  for (double t : {-1.0, -0.2, 0.5, 1.0}) {
    const std::vector<double> x{t};
    CHECK(std::abs(om.evaluate(x) - (alpha * ou.evaluate(x) + beta * ov.evaluate(x))) <= 1e-10);
  }
}

TEST_CASE("node weights reproduce the approximant") {
  Philox rng(21);
  for (const auto& model : {trig1, leg2}) {
    const auto nodes = draw_nodes(model, 7, 50, DensityVariant::krieg_ullrich, 4);
    std::vector<cplx> f(50);
    for (auto& v : f) v = rng.complex_normal();
    const auto op = fit(assemble(model, nodes, 7, true), f);
    for (double t : {0.1, 0.9}) {
      const std::vector<double> x{t};
      const auto w = op.node_weights(x);
      cplx acc = 0.0;
      for (std::size_t i = 0; i < 50; ++i) acc += w(i) * f[i];
      CHECK(std::abs(acc - op.evaluate(x)) <= 1e-10);
    }
  }
}

TEST_CASE("square system interpolates") {
  Philox rng(2);
  const auto nodes = draw_nodes(trig1, 6, 5, DensityVariant::krieg_ullrich, 77);
  std::vector<cplx> f(5);
  for (auto& v : f) v = rng.complex_normal();
  const auto op = fit(assemble(trig1, nodes, 6, true), f);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(op.evaluate(nodes.point(i)) - f[i]) <= 1e-9);
}

TEST_CASE("constant fit on the torus") {
  const auto nodes = draw_nodes(trig1, 5, 30, DensityVariant::krieg_ullrich, 6);
  const auto op = fit(assemble(trig1, nodes, 5, true), std::vector<cplx>(30, cplx(2.5, -1.0)));
  for (double t : {0.0, 1.0, 4.0}) {
    const std::vector<double> x{t};
    CHECK(std::abs(op.evaluate(x) - cplx(2.5, -1.0)) <= 1e-12);
  }
}

TEST_CASE("rank deficiency") {
  NodeSet nodes;
  nodes.dim = 1;
  nodes.points = {0.3, 0.3, 0.3, 0.3};
  nodes.density = {1.0, 1.0, 1.0, 1.0};
  nodes.m = 4;
  const auto a = assemble(trig1, nodes, 4, true);
  try {
    fit(a, std::vector<cplx>(4, 1.0));
    FAIL("expected RankDeficientError");
  } catch (const RankDeficientError& e) {
    CHECK(e.rank() == 1);
    CHECK(e.columns() == 3);
  }
  const auto check = spectral_norm_check(a);
  CHECK(std::isinf(check.norm));
  CHECK_FALSE(check.pass);
}

TEST_CASE("spectral norm check") {
  // Equispaced nodes on the torus give L* L = n I for |k| < n/2.
  NodeSet nodes;
  nodes.dim = 1;
  nodes.m = 5;
  for (int i = 0; i < 16; ++i) {
    nodes.points.push_back(2.0 * M_PI * i / 16.0);
    nodes.density.push_back(1.0);
  }
  const auto check = spectral_norm_check(assemble(trig1, nodes, 5, true));
  CHECK(check.norm == doctest::Approx(1.0 / 4.0).epsilon(1e-12));
  CHECK(check.threshold == doctest::Approx(std::sqrt(2.0 / 16.0)));
  CHECK(check.pass);
}

TEST_CASE("coefficient norm bound chain") {
  // ||c|| <= ||G|| (sum |f - P f|^2 / rho)^(1/2) for f with P_{m-1} f = 0.
  const std::size_t m = 6;
  const auto nodes = draw_nodes(leg2, m, 80, DensityVariant::krieg_ullrich, 12);
  const auto a = assemble(leg2, nodes, m, true);
  std::vector<cplx> f(80);
  for (std::size_t i = 0; i < 80; ++i) f[i] = basis_eval(leg2, 9, nodes.point(i));
  const auto op = fit(a, f);
  double rhs = 0.0;
  for (std::size_t i = 0; i < 80; ++i) rhs += std::norm(f[i]) / nodes.sampling_density(i);
  CHECK(op.coefficients().norm() <= spectral_norm_check(a).norm * std::sqrt(rhs) * (1.0 + 1e-12));
}
