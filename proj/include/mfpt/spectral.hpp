#pragma once

#include <string>

#include "mfpt/grid.hpp"
#include "mfpt/law.hpp"

namespace mfpt {

// Top eigendata of the discretized transfer operator P_s and its conjugate,
// for a fixed s. r is normalized so that nu(r) = 1.
struct SpectralSolution {
  double s = 0.0;
  double kappa = 1.0;
  SimplexGrid grid;
  Vec r;        // eigenfunction r_s on grid points, strictly positive
  Vec nu;       // eigenmeasure nu_s as grid weights (probability)
  Vec nu_star;  // eigenmeasure of the conjugate operator
  Vec r_star;   // r*_s on grid points, quadrature of <x,.>^s against nu_s
  double nu_r = 1.0;  // nu_s(r_s) under the stored normalization
  double residual = 0.0;
  std::string method = "power-iteration";

  double r_at(const Vec& x) const { return grid.interpolate(r, x); }
  double r_star_at(const Vec& y) const;
};

// Power iteration on the grid-discretized P_s (finite-support laws only).
// The conjugate operator P*_s is solved independently; the residual covers
// the fixed-point defect, the primal/conjugate eigenvalue gap, and a grid
// refinement estimate.
SpectralSolution transfer_fixed_point(const Law& law, double s,
                                      const SimplexGrid& grid,
                                      double tol = 1e-12, int max_iter = 10000);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Monte Carlo estimate of (E||Pi_n||^s)^{1/n} with log-domain accumulation
// and a delta-method standard error. Consistent as n grows.
McEstimate kappa_mc(const Law& law, double s, int n, int samples,
                    std::uint64_t seed);

}  // namespace mfpt
