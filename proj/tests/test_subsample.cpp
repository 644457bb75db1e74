#include <doctest.h>

#include <cmath>
#include <vector>

#include "wlsq/errors.hpp"
#include "wlsq/grid.hpp"
#include "wlsq/rng.hpp"
#include "wlsq/subsample.hpp"

using namespace wlsq;

namespace {

const SpectralModel trig1 = SpectralModel::trigonometric(WeightModel::sharp(2, 1));

// n/m copies of each standard basis vector, scaled so the frame is tight at `level`.
Eigen::MatrixXcd identity_frame(std::size_t m, std::size_t copies, double level) {
  Eigen::MatrixXcd rows = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m * copies), static_cast<Eigen::Index>(m));
  const double scale = std::sqrt(level / copies);
  for (std::size_t c = 0; c < copies; ++c) {
    for (std::size_t j = 0; j < m; ++j) rows(static_cast<Eigen::Index>(c * m + j), static_cast<Eigen::Index>(j)) = scale;
  }
  return rows;
}

}  // namespace

TEST_CASE("frame bounds examples") {
  const std::size_t m = 4;
  const std::size_t copies = 5;
  // Unscaled standard basis vectors, each n/m times: the frame operator is (n/m) I.
  const auto unit = identity_frame(m, copies, static_cast<double>(copies));
  const auto b = frame_bounds(unit);
  CHECK(b.lower == doctest::Approx(5.0));
  CHECK(b.upper == doctest::Approx(5.0));

  Eigen::MatrixXcd one(1, 3);
  one << cplx(1.0, 1.0), cplx(0.0, 2.0), cplx(-1.0, 0.0);
  const auto single = frame_bounds(one);
  CHECK(single.lower == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(single.upper == doctest::Approx(7.0));

  const auto empty = frame_bounds(Eigen::MatrixXcd(0, 3));
  CHECK(empty.lower == 0.0);
  CHECK(empty.upper == 0.0);
}

TEST_CASE("trig frame bounds concentrate near one") {
  const std::size_t m = 9;
  const auto nodes = draw_nodes(trig1, m, 4000, DensityVariant::krieg_ullrich, 31);
  const auto b = frame_bounds(frame_rows(assemble(trig1, nodes, m, true)));
  CHECK(b.lower > 0.85);
  CHECK(b.upper < 1.15);
}

TEST_CASE("regime constants") {
  const auto small = subsample_constants(20, 4, 1.0, 1.0, 1.0);
  CHECK_FALSE(small.large_oversampling);
  CHECK(small.C1 == 47.0);
  CHECK(small.C2 == 1.0);
  CHECK(small.C3 == 47.0);
  const auto large = subsample_constants(1000, 4, 1.0, 0.5, 2.0);
  CHECK(large.large_oversampling);
  CHECK(large.C1 == 1642.0 * 2.0);
  CHECK(large.C2 == doctest::Approx(6.0 + 4.0 * std::sqrt(2.0)));
  CHECK(large.C3 == 1642.0 * 4.0);
  CHECK_THROWS_AS(subsample_constants(10, 2, 1.0, 2.0, 1.0), ArgumentError);
}

TEST_CASE("identity frame subsample") {
  for (std::size_t copies : {5, 60}) {
    const std::size_t m = 4;
    const auto rows = identity_frame(m, copies, 1.0);
    const auto r = weaver_subsample(rows, m, 1.0, 1.0, 1.0);
    CHECK(static_cast<double>(r.budget) <= r.constants.C1 * m);
    CHECK(r.achieved.lower >= r.constants.C2 * (1.0 - 1e-10));
    CHECK(r.achieved.upper <= r.constants.C3 * (1.0 + 1e-10));
    // Every direction must be present.
    std::vector<int> seen(m, 0);
    for (auto i : r.indices) seen[i % m] = 1;
    for (int s : seen) CHECK(s == 1);
  }
  // Small oversampling: one copy of each direction is the least J can hold.
  const auto r = weaver_subsample(identity_frame(4, 5, 1.0), 4, 1.0, 1.0, 1.0);
  CHECK(r.budget >= 4);
}

TEST_CASE("trig rows subsample and recovery on the subset") {
  Philox rng(40);
  for (std::size_t m : {16, 64}) {
    const std::size_t n = 20 * m;
    const auto nodes = draw_nodes(trig1, m, n, DensityVariant::krieg_ullrich, 1000 + m);
    const auto rows = frame_rows(assemble(trig1, nodes, m, true));
    const auto fb = frame_bounds(rows);
    const auto r = weaver_subsample(rows, m - 1, 1.0, fb.lower, fb.upper);
    CHECK(static_cast<double>(r.budget) <= r.constants.C1 * (m - 1));
    CHECK(r.achieved.lower >= r.constants.C2 * (1.0 - 1e-10));
    CHECK(r.achieved.upper <= r.constants.C3 * (1.0 + 1e-10));
    CHECK(r.budget < n);

    const auto sub = nodes.subset(r.indices);
    const auto a = assemble(trig1, sub, m, true);
    std::vector<cplx> coef(m - 1);
    double norm = 0.0;
    for (auto& c : coef) {
      c = rng.complex_normal();
      norm += std::norm(c);
    }
    for (auto& c : coef) c /= std::sqrt(norm);
    std::vector<cplx> f(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) {
      for (std::size_t k = 0; k + 1 < m; ++k) f[i] += coef[k] * basis_eval(trig1, k + 1, sub.point(i));
    }
    const auto op = fit(a, f);
    for (const double t : {0.0, 1.3, 2.9, 5.5}) {
      const std::vector<double> x{t};
      cplx truth = 0.0;
      for (std::size_t k = 0; k + 1 < m; ++k) truth += coef[k] * basis_eval(trig1, k + 1, x);
      CHECK(std::abs(op.evaluate(x) - truth) <= 1e-9);
    }
  }
}

TEST_CASE("subsample precondition errors name the row") {
  auto rows = identity_frame(3, 4, 1.0);
  rows(7, 1) = 2.0;
  try {
    weaver_subsample(rows, 3, 1.0, 1.0, 1.0);
    FAIL("expected ArgumentError");
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("row 7") != std::string::npos);
  }
  CHECK_THROWS_AS(weaver_subsample(identity_frame(3, 4, 1.0), 3, 1.0, 1.5, 2.0), ArgumentError);
  CHECK_THROWS_AS(weaver_subsample(identity_frame(3, 4, 1.0), 2, 1.0, 1.0, 1.0), ArgumentError);
}
