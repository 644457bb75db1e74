#include "wlsq/grid.hpp"

#include <cmath>

#include "wlsq/errors.hpp"

namespace wlsq {

GridSpec GridSpec::defaults(const SpectralModel& model) {
  return uniform(model, model.dim() <= 2 ? 4096 : 64);
}

GridSpec GridSpec::uniform(const SpectralModel& model, std::size_t per_dim) {
  GridSpec g;
  g.counts.assign(model.dim(), per_dim);
  return g;
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (auto c : counts) n *= c;
  return counts.empty() ? 0 : n;
}

void GridSpec::validate(const SpectralModel& model) const {
  if (counts.size() != static_cast<std::size_t>(model.dim())) {
    throw ArgumentError("grid has " + std::to_string(counts.size()) + " dimensions, model has " +
                        std::to_string(model.dim()));
  }
  for (auto c : counts) {
    if (c < 2) throw ArgumentError("grid needs at least 2 points per dimension");
  }
}

namespace {

std::vector<double> axis(const SpectralModel& model, std::size_t count) {
  std::vector<double> x(count);
  for (std::size_t j = 0; j < count; ++j) {
    if (model.kind() == BasisKind::legendre) {
      x[j] = -std::cos(M_PI * static_cast<double>(j) / static_cast<double>(count - 1));
    } else {
      x[j] = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(count);
    }
  }
  if (model.kind() == BasisKind::legendre) {
    x.front() = -1.0;
    x.back() = 1.0;
  }
  return x;
}

template <class Emit>
void tensor(const std::vector<std::vector<double>>& axes, Emit emit) {
  const std::size_t d = axes.size();
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    emit(idx);
    std::size_t c = d;
    while (c > 0) {
      --c;
      if (++idx[c] < axes[c].size()) break;
      idx[c] = 0;
      if (c == 0) return;
    }
  }
}

}  // namespace

std::vector<double> grid_points(const SpectralModel& model, const GridSpec& grid) {
  grid.validate(model);
  const std::size_t d = grid.counts.size();
  std::vector<std::vector<double>> axes;
  for (auto c : grid.counts) axes.push_back(axis(model, c));
  std::vector<double> out;
  out.reserve(grid.size() * d);
  tensor(axes, [&](const std::vector<std::size_t>& idx) {
    for (std::size_t c = 0; c < d; ++c) out.push_back(axes[c][idx[c]]);
  });
  return out;
}

void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw ArgumentError("Gauss-Legendre rule needs n >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double kk = static_cast<double>(k);
      const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
      p0 = p1;
      p1 = p2;
    }
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

QuadratureRule quadrature(const SpectralModel& model, std::size_t per_dim) {
  if (per_dim < 1) throw ArgumentError("quadrature needs at least one node per dimension");
  QuadratureRule rule;
  rule.dim = model.dim();
  if (model.kind() == BasisKind::legendre) {
    gauss_legendre(per_dim, rule.nodes, rule.weights);
    return rule;
  }
  std::vector<std::vector<double>> axes(rule.dim);
  for (auto& a : axes) {
    a.resize(per_dim);
    for (std::size_t j = 0; j < per_dim; ++j) a[j] = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(per_dim);
  }
  const double w = std::pow(static_cast<double>(per_dim), -rule.dim);
  tensor(axes, [&](const std::vector<std::size_t>& idx) {
    for (int c = 0; c < rule.dim; ++c) rule.nodes.push_back(axes[c][idx[c]]);
    rule.weights.push_back(w);
  });
  return rule;
}

}  // namespace wlsq
