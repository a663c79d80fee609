#pragma once

#include <vector>

#include "mfpt/types.hpp"

namespace mfpt {

// Quadrature discretization of the positive unit simplex. Uniform midpoint
// grid for d <= 2, barycentric lattice for d = 3, Dirichlet quasi-random
// nodes with equal weights otherwise.
struct SimplexGrid {
  int d = 1;
  int resolution = 1;
  std::vector<Vec> points;
  std::vector<double> weights;  // positive, sum to 1

  static SimplexGrid make(int d, int resolution, std::uint64_t seed = 2718);
  SimplexGrid coarsened() const;  // halved resolution, for error estimation

  // Interpolation stencil at a direction point: indices and convex weights.
  std::vector<std::pair<int, double>> stencil(const Vec& x) const;

  double interpolate(const std::vector<double>& values, const Vec& x) const {
    double acc = 0.0;
    for (auto [i, w] : stencil(x)) acc += w * values[static_cast<std::size_t>(i)];
    return acc;
  }
  double interpolate(const Vec& values, const Vec& x) const {
    double acc = 0.0;
    for (auto [i, w] : stencil(x)) acc += w * values[i];
    return acc;
  }
};

}  // namespace mfpt
