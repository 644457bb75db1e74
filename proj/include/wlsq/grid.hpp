#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wlsq/spectral.hpp"

namespace wlsq {

/// Execution policy for grid loops. `serial` is the reference path.
enum class Exec { serial, parallel };

/// Tensor grid over D used to approximate suprema.
///
/// Torus: x_j = 2 pi j / N per coordinate. [-1, 1]: Chebyshev-Lobatto points
/// -cos(pi j / (N-1)), so both endpoints are included.
struct GridSpec {
  std::vector<std::size_t> counts;

  /// 4096 points per dimension for d <= 2, 64 for d >= 3.
  static GridSpec defaults(const SpectralModel& model);
  static GridSpec uniform(const SpectralModel& model, std::size_t per_dim);

  std::size_t size() const;
  /// Throws ArgumentError if the grid does not fit the model.
  void validate(const SpectralModel& model) const;
};

/// Grid points, row-major (point i occupies [i*d, (i+1)*d)).
std::vector<double> grid_points(const SpectralModel& model, const GridSpec& grid);

/// Quadrature against the model measure rho_D: sum_i weights[i] f(nodes_i).
/// Torus: tensor trapezoid (exact for trigonometric polynomials of degree
/// < N per coordinate). [-1, 1]: Gauss-Legendre with N nodes (exact to degree 2N-1).
struct QuadratureRule {
  int dim = 1;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
  std::span<const double> node(std::size_t i) const {
    return {nodes.data() + i * dim, static_cast<std::size_t>(dim)};
  }
};

QuadratureRule quadrature(const SpectralModel& model, std::size_t per_dim);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace wlsq
