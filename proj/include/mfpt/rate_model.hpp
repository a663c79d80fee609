#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "mfpt/spectral.hpp"

namespace mfpt {

// Calibrated spectral engine for one law: Lambda = log kappa and its
// derivatives, the tail index alpha with drift parameters rho and
// sigma_alpha, and a cache of transfer-operator solutions keyed by s.
class RateModel {
 public:
  explicit RateModel(Law law, int grid_resolution = 0, double tol = 1e-12);

  const Law& law() const { return law_; }
  const SimplexGrid& grid() const { return grid_; }

  const SpectralSolution& solve(double s) const;
  double lambda(double s) const { return std::log(solve(s).kappa); }

  // (Lambda, Lambda', ..., Lambda^(order)) by central differences with
  // Richardson extrapolation; orders 4 and 5 carry reduced accuracy.
  std::array<double, 6> lambda_derivs(double s, int order = 5) const;
  double lambda_prime(double s) const { return lambda_derivs(s, 1)[1]; }
  double sigma(double s) const;  // sqrt(Lambda''(s))

  // Root of Lambda with positive slope; fills alpha, rho, sigma_alpha.
  void calibrate(double s_lo = 1e-3, double s_hi = 4.0);
  bool calibrated() const { return alpha_.has_value(); }
  double alpha() const;
  double rho() const;
  double sigma_alpha() const;

  // Invert Lambda'(s) = q (monotone by convexity).
  double s_of_slope(double q) const;
  double s_of_beta(double beta) const { return s_of_slope(1.0 / beta); }

 private:
  Law law_;
  SimplexGrid grid_;
  double tol_;
  mutable std::map<double, SpectralSolution> cache_;
  mutable std::mutex mutex_;
  std::optional<double> alpha_, rho_, sigma_alpha_;
};

}  // namespace mfpt
