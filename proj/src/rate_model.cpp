#include "mfpt/rate_model.hpp"

#include <cmath>

namespace mfpt {

namespace {

int default_resolution(int d) {
  if (d == 1) return 1;
  if (d == 2) return 240;
  if (d == 3) return 24;
  return 600;
}

}  // namespace

RateModel::RateModel(Law law, int grid_resolution, double tol)
    : law_(std::move(law)),
      grid_(SimplexGrid::make(law_.d(), grid_resolution > 0
                                            ? grid_resolution
                                            : default_resolution(law_.d()))),
      tol_(tol) {}

const SpectralSolution& RateModel::solve(double s) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(s);
  if (it != cache_.end()) return it->second;
  auto sol = transfer_fixed_point(law_, s, grid_, tol_);
  return cache_.emplace(s, std::move(sol)).first->second;
}

std::array<double, 6> RateModel::lambda_derivs(double s, int order) const {
  if (order < 0 || order > 5)
    throw DomainError("lambda_derivs: order must be in [0, 5]");
  std::array<double, 6> out{};
  out[0] = lambda(s);
  if (order == 0) return out;

  const double h0 = 1e-2 * std::max(1.0, std::abs(s));
  // Stencil must stay inside s >= 0.
  double h = h0;
  if (s - 3.0 * h < 0.0) h = std::max(1e-4, s / 3.5);
  if (s - 3.0 * h < 0.0)
    throw DomainError("lambda_derivs: stencil exits the computable s-range");

  auto sample = [&](double step, double f[7]) {
    for (int j = -3; j <= 3; ++j) f[j + 3] = lambda(s + j * step);
  };
  double fh[7], fh2[7];
  sample(h, fh);
  sample(h / 2.0, fh2);

  auto d1 = [](const double f[7], double step) {
    return (f[1] - 8.0 * f[2] + 8.0 * f[4] - f[5]) / (12.0 * step);
  };
  auto d2 = [](const double f[7], double step) {
    return (-f[1] + 16.0 * f[2] - 30.0 * f[3] + 16.0 * f[4] - f[5]) /
           (12.0 * step * step);
  };
  auto d3 = [](const double f[7], double step) {
    return (f[1] - 2.0 * f[2] + 2.0 * f[4] - f[5]) /
           (2.0 * step * step * step);
  };
  auto d4 = [](const double f[7], double step) {
    return (f[1] - 4.0 * f[2] + 6.0 * f[3] - 4.0 * f[4] + f[5]) /
           (step * step * step * step);
  };
  auto d5 = [](const double f[7], double step) {
    return (-f[0] + 4.0 * f[1] - 5.0 * f[2] + 5.0 * f[4] - 4.0 * f[5] + f[6]) /
           (2.0 * std::pow(step, 5));
  };

  // O(h^4) formulas for orders 1-2 with one Richardson level; O(h^2)
  // formulas for 3-5 with one level.
  out[1] = (16.0 * d1(fh2, h / 2) - d1(fh, h)) / 15.0;
  if (order >= 2) out[2] = (16.0 * d2(fh2, h / 2) - d2(fh, h)) / 15.0;
  if (order >= 3) out[3] = (4.0 * d3(fh2, h / 2) - d3(fh, h)) / 3.0;
  if (order >= 4) out[4] = (4.0 * d4(fh2, h / 2) - d4(fh, h)) / 3.0;
  if (order >= 5) out[5] = (4.0 * d5(fh2, h / 2) - d5(fh, h)) / 3.0;

  if (order >= 2 && out[2] < -1e-6)
    throw DomainError("lambda_derivs: non-convex Lambda'' indicates an "
                      "upstream spectral failure");
  return out;
}

double RateModel::sigma(double s) const {
  double l2 = lambda_derivs(s, 2)[2];
  if (l2 <= 0.0) throw DomainError("sigma: Lambda''(s) <= 0");
  return std::sqrt(l2);
}

void RateModel::calibrate(double s_lo, double s_hi) {
  double lo = s_lo, hi = s_hi;
  double f_lo = lambda(lo);
  if (f_lo >= 0.0)
    throw DomainError("calibrate: no positive root (Lambda(s_lo) >= 0, "
                      "nonnegative drift at 0)");
  double f_hi = lambda(hi);
  int expand = 0;
  while (f_hi <= 0.0 && expand < 6) {
    hi *= 2.0;
    f_hi = lambda(hi);
    ++expand;
  }
  if (f_hi <= 0.0)
    throw DomainError("calibrate: no positive root (no sign change in bracket)");

  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    double f_mid = lambda(mid);
    if (f_mid < 0.0) { lo = mid; f_lo = f_mid; }
    else { hi = mid; f_hi = f_mid; }
    if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
  }
  double a = 0.5 * (lo + hi);
  // Newton polish using the spectral derivative.
  for (int it = 0; it < 8; ++it) {
    auto d = lambda_derivs(a, 1);
    if (d[1] <= 0.0) break;
    double step = d[0] / d[1];
    a -= step;
    if (std::abs(step) < 1e-14 * std::max(1.0, a)) break;
  }
  auto d = lambda_derivs(a, 2);
  if (std::abs(d[0]) > 1e-10 * std::max(1.0, std::abs(d[1])))
    throw DomainError("calibrate: root polish did not reach tolerance");
  if (d[1] <= 0.0)
    throw DomainError("calibrate: root has nonpositive slope");
  alpha_ = a;
  rho_ = 1.0 / d[1];
  if (d[2] <= 0.0) throw DomainError("calibrate: sigma_alpha^2 <= 0");
  sigma_alpha_ = std::sqrt(d[2]);
}

double RateModel::alpha() const {
  if (!alpha_) throw DomainError("RateModel: not calibrated");
  return *alpha_;
}
double RateModel::rho() const {
  if (!rho_) throw DomainError("RateModel: not calibrated");
  return *rho_;
}
double RateModel::sigma_alpha() const {
  if (!sigma_alpha_) throw DomainError("RateModel: not calibrated");
  return *sigma_alpha_;
}

double RateModel::s_of_slope(double q) const {
  double lo = 1e-3, hi = 1.0;
  double f_lo = lambda_prime(lo);
  if (q <= f_lo)
    throw DomainError("s_of_slope: q below the achievable slope range");
  double f_hi = lambda_prime(hi);
  int expand = 0;
  while (f_hi < q && expand < 8) {
    hi *= 2.0;
    f_hi = lambda_prime(hi);
    ++expand;
  }
  if (f_hi < q)
    throw DomainError("s_of_slope: q above the achievable slope range");
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (lambda_prime(mid) < q) lo = mid; else hi = mid;
    if (hi - lo < 1e-11 * std::max(1.0, hi)) break;
  }
  double sv = 0.5 * (lo + hi);
  for (int it = 0; it < 6; ++it) {
    auto d = lambda_derivs(sv, 2);
    if (d[2] <= 0.0) break;
    double step = (d[1] - q) / d[2];
    sv -= step;
    if (sv <= 0.0) { sv = 0.5 * (lo + hi); break; }
    if (std::abs(step) < 1e-13 * std::max(1.0, sv)) break;
  }
  return sv;
}

}  // namespace mfpt
