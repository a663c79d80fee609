#include "mfpt/spectral.hpp"

#include <cmath>

namespace mfpt {

double SpectralSolution::r_star_at(const Vec& y) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.points.size(); ++i)
    acc += std::pow(y.dot(grid.points[i]), s) * nu[static_cast<Eigen::Index>(i)];
  return acc;
}

namespace {

// Dense discretization of P_s: (P_s phi)(x_i) = sum_j T(i,j) phi_j, with
// image points scattered onto the grid by the interpolation stencil.
Mat discretize(const Law& law, double s, const SimplexGrid& grid,
               bool conjugate) {
  const int n = static_cast<int>(grid.points.size());
  Mat t = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const Vec& x = grid.points[static_cast<std::size_t>(i)];
    for (const auto& atom : law.atoms()) {
      Mat g = conjugate ? Mat(atom.M.transpose()) : atom.M;
      Vec v = g * x;
      double nv = v.sum();
      if (nv <= 0.0)
        throw DomainError("transfer_fixed_point: degenerate projective action");
      double coef = atom.p * std::pow(nv, s);
      for (auto [j, w] : grid.stencil(v / nv)) t(i, j) += coef * w;
    }
  }
  return t;
}

struct EigenPair {
  double kappa;
  Vec right;     // eigenfunction, positive, l1-normalized
  Vec left;      // eigenmeasure weights, probability vector
  double residual;
};

EigenPair power_iterate(const Mat& t, double tol, int max_iter) {
  const Eigen::Index n = t.rows();
  Vec v = Vec::Constant(n, 1.0 / static_cast<double>(n));
  Vec w = v;
  double kappa = 1.0, prev = 0.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    Vec tv = t * v;
    Vec wt = t.transpose() * w;
    double rayleigh = w.dot(tv) / w.dot(v);
    v = tv / tv.sum();
    w = wt / wt.sum();
    kappa = rayleigh;
    double res = (t * v - kappa * v).cwiseAbs().maxCoeff() / v.cwiseAbs().maxCoeff();
    if ((it > 0 && std::abs(kappa - prev) < tol * std::max(1.0, std::abs(kappa))) ||
        res < 1e-10)
      break;
    prev = kappa;
  }
  double res = (t * v - kappa * v).cwiseAbs().maxCoeff() / v.cwiseAbs().maxCoeff();
  if (it >= max_iter && res > 1e-6)
    throw DomainError("transfer_fixed_point: power iteration did not converge");
  return {kappa, v, w, res};
}

double kappa_of(const Law& law, double s, const SimplexGrid& grid, double tol,
                int max_iter, bool conjugate) {
  return power_iterate(discretize(law, s, grid, conjugate), tol, max_iter).kappa;
}

}  // namespace

SpectralSolution transfer_fixed_point(const Law& law, double s,
                                      const SimplexGrid& grid, double tol,
                                      int max_iter) {
  if (s < 0.0) throw DomainError("transfer_fixed_point: s must be >= 0");
  SpectralSolution sol;
  sol.s = s;
  sol.grid = grid;

  EigenPair primal = power_iterate(discretize(law, s, grid, false), tol, max_iter);
  EigenPair conj = power_iterate(discretize(law, s, grid, true), tol, max_iter);

  sol.kappa = primal.kappa;
  double mismatch = std::abs(primal.kappa - conj.kappa) /
                    std::max(1.0, std::abs(primal.kappa));
  double grid_err = 0.0;
  if (law.d() > 1 && grid.resolution > 2) {
    // Richardson estimate of the discretization error from a coarsened solve.
    double kc = kappa_of(law, s, grid.coarsened(), tol, max_iter, false);
    grid_err = std::abs(sol.kappa - kc) / 3.0;
  }
  sol.residual = std::max({primal.residual, conj.residual, mismatch, grid_err});
  if (mismatch > std::max(10.0 * tol, 10.0 * grid_err) + 1e-9)
    throw DomainError("transfer_fixed_point: primal/conjugate kappa mismatch");

  // nu is the left eigenvector of P_s; r scaled so that nu(r) = 1.
  sol.nu = primal.left;
  sol.nu_star = conj.left;
  double nur = sol.nu.dot(primal.right);
  if (nur <= 0.0) throw DomainError("transfer_fixed_point: nu(r) <= 0");
  sol.r = primal.right / nur;
  sol.nu_r = 1.0;
  if ((sol.r.array() <= 0.0).any())
    throw DomainError("transfer_fixed_point: eigenfunction not positive");

  sol.r_star = Vec(sol.nu.size());
  for (Eigen::Index i = 0; i < sol.r_star.size(); ++i)
    sol.r_star[i] = sol.r_star_at(grid.points[static_cast<std::size_t>(i)]);
  return sol;
}

McEstimate kappa_mc(const Law& law, double s, int n, int samples,
                    std::uint64_t seed) {
  if (s < 0.0 || n < 1) throw DomainError("kappa_mc: need s >= 0 and n >= 1");
  std::vector<double> logs(static_cast<std::size_t>(samples));
  for (int rep = 0; rep < samples; ++rep) {
    StreamRng rng(seed, static_cast<std::uint64_t>(rep));
    Mat pi = Mat::Identity(law.d(), law.d());
    double log_scale = 0.0;
    for (int k = 0; k < n; ++k) {
      pi = pi * law.sample(rng).M;
      double nm = op_norm(pi);
      if (nm <= 0.0) { log_scale = -1e300; break; }
      log_scale += std::log(nm);
      pi /= nm;
    }
    logs[static_cast<std::size_t>(rep)] = s * log_scale;
  }
  double m = *std::max_element(logs.begin(), logs.end());
  double mean_a = 0.0;
  for (double l : logs) mean_a += std::exp(l - m);
  mean_a /= samples;
  double var_a = 0.0;
  for (double l : logs) {
    double d = std::exp(l - m) - mean_a;
    var_a += d * d;
  }
  var_a /= std::max(1, samples - 1);
  double log_mean = m + std::log(mean_a);
  McEstimate est;
  est.value = std::exp(log_mean / n);
  double se_log = std::sqrt(var_a / samples) / mean_a;
  est.std_error = est.value * se_log / n;
  return est;
}

}  // namespace mfpt
