#include "mfpt/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "mfpt/oracle.hpp"
#include "mfpt/simulate.hpp"

namespace mfpt {

double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

double legendre(const RateModel& model, double q) {
  double s = model.s_of_slope(q);
  return s * q - model.lambda(s);
}

RatePoint rate_I(const RateModel& model, double beta) {
  if (beta <= 0.0) throw DomainError("rate_I: beta must be > 0");
  RatePoint pt;
  pt.beta = beta;
  pt.s = model.s_of_beta(beta);
  pt.gammas = model.lambda_derivs(pt.s, 5);
  double lam = pt.gammas[0], lam1 = pt.gammas[1];
  pt.I = pt.s - lam / lam1;
  // One-step decay rate of the passage law at scale beta. Equal to -dI/dbeta:
  // I(beta) = s - beta Lambda(s) with Lambda'(s) = 1/beta gives
  // dI/dbeta = -Lambda(s) by the envelope identity, and Lambda(s) > 0 on
  // (0, rho), so the local window factors below stay positive.
  pt.I_prime = lam;
  return pt;
}

double cramer_xi_terms(const std::array<double, 6>& g, double t) {
  double g2 = g[2], g3 = g[3], g4 = g[4], g5 = g[5];
  if (g2 <= 0.0) throw DomainError("cramer_xi: sigma_s^2 <= 0");
  double c0 = g3 / (6.0 * std::pow(g2, 1.5));
  double c1 = (g4 * g2 - 3.0 * g3 * g3) / (24.0 * std::pow(g2, 3.0));
  double c2 = (g5 * g2 * g2 - 10.0 * g4 * g3 * g2 + 15.0 * g3 * g3 * g3) /
              (120.0 * std::pow(g2, 4.5));
  return c0 + c1 * t + c2 * t * t;
}

double cramer_xi(const RateModel& model, double s, double t) {
  return cramer_xi_terms(model.lambda_derivs(s, 5), t);
}

ExpandResult expand_I(const RateModel& model, double beta, double l) {
  if (l >= beta) throw DomainError("expand_I: need l < beta");
  RatePoint pt = rate_I(model, beta);
  double s = pt.s;
  double sigma = std::sqrt(pt.gammas[2]);
  double bl = beta - l;
  double h = l * l / (2.0 * sigma * sigma * beta * beta * bl * bl * bl) -
             std::pow(l, 3) / (std::pow(sigma, 3) * std::pow(beta, 3) *
                               std::pow(bl, 4)) *
                 cramer_xi_terms(pt.gammas, l / (sigma * beta * bl));
  // The perturbation series is exact (up to the truncated Cramer tail) for
  // the normalized rate J(beta) = I(beta)/beta^2 = Lambda*(1/beta)/beta,
  // because Lambda* expands cleanly around the slope 1/beta. Expand J, then
  // scale back by (beta - l)^2.
  double J = pt.I / (beta * beta);
  double expansion_J = J + l / bl * J + s * l / (beta * bl * bl) + h;
  ExpandResult out;
  out.expansion = bl * bl * expansion_J;
  out.direct = rate_I(model, bl).I;
  return out;
}

PrefactorEstimate prefactor_varkappa(const RateModel& model, double s,
                                     const std::string& estimator, int n_max,
                                     int mc_samples, std::uint64_t seed,
                                     int workers) {
  if (model.calibrated() && s <= model.alpha())
    throw DomainError("prefactor_varkappa: need s > alpha");
  const SpectralSolution& sol = model.solve(s);
  PrefactorEstimate out;
  out.s = s;
  out.estimator = estimator;

  std::vector<double> se;
  if (estimator == "oracle") {
    int feasible = n_max;
    double k = static_cast<double>(model.law().atoms().size());
    while (feasible > 2 && std::pow(k, feasible) > (1 << 22)) --feasible;
    for (int n = 1; n <= feasible; ++n) {
      out.trace.push_back(exact_W(model.law(), sol, s, n).weighted);
      se.push_back(0.0);
    }
  } else if (estimator == "mc") {
    // Running forward-process paths; per-n means of |V_n|^s r_s(direction).
    std::vector<double> sums(static_cast<std::size_t>(n_max), 0.0);
    std::vector<double> sq(static_cast<std::size_t>(n_max), 0.0);
    std::vector<std::vector<double>> per_path(
        static_cast<std::size_t>(mc_samples));
    parallel_for(mc_samples, workers, [&](long long rep) {
      StreamRng rng(seed, static_cast<std::uint64_t>(rep));
      Vec v = Vec::Zero(model.law().d());
      auto& row = per_path[static_cast<std::size_t>(rep)];
      row.resize(static_cast<std::size_t>(n_max));
      for (int n = 1; n <= n_max; ++n) {
        const Atom& a = model.law().sample(rng);
        v = a.M * v + a.Q;
        double nv = v.sum();
        row[static_cast<std::size_t>(n - 1)] =
            nv > 0.0 ? std::pow(nv, s) * sol.r_at(v / nv) : 0.0;
      }
    });
    for (const auto& row : per_path)
      for (int n = 0; n < n_max; ++n) {
        sums[static_cast<std::size_t>(n)] += row[static_cast<std::size_t>(n)];
        sq[static_cast<std::size_t>(n)] +=
            row[static_cast<std::size_t>(n)] * row[static_cast<std::size_t>(n)];
      }
    for (int n = 1; n <= n_max; ++n) {
      double mean = sums[static_cast<std::size_t>(n - 1)] / mc_samples;
      double var = sq[static_cast<std::size_t>(n - 1)] / mc_samples - mean * mean;
      double scale = std::pow(sol.kappa, n);
      out.trace.push_back(mean / scale);
      se.push_back(std::sqrt(std::max(0.0, var) / mc_samples) / scale);
    }
  } else {
    throw DomainError("prefactor_varkappa: estimator must be oracle or mc");
  }

  // Plateau: three successive values within max(1e-4 relative, MC half-CI).
  std::size_t stop = out.trace.size() - 1;
  for (std::size_t n = 2; n < out.trace.size(); ++n) {
    double tol = std::max(1e-4 * std::abs(out.trace[n]),
                          se[n] > 0.0 ? se[n] : 0.0);
    if (std::abs(out.trace[n] - out.trace[n - 1]) <= tol &&
        std::abs(out.trace[n - 1] - out.trace[n - 2]) <= tol) {
      out.plateau = true;
      stop = n;
      break;
    }
  }
  double limit = out.trace[stop];
  double spread = out.plateau
      ? std::abs(out.trace[stop] - out.trace[stop - 1]) + 2.0 * se[stop]
      : std::abs(out.trace.back() - out.trace[out.trace.size() / 2]) +
            2.0 * se.back();
  if (!out.plateau && out.trace.size() >= 5) {
    // The residual of the trace decays geometrically (subleading spectral
    // gap), so when the increment ratio has stabilized the limit is
    // recovered by Aitken extrapolation of the tail.
    std::size_t m = out.trace.size() - 1;
    double d1 = out.trace[m - 1] - out.trace[m - 2];
    double d2 = out.trace[m] - out.trace[m - 1];
    double d0 = out.trace[m - 2] - out.trace[m - 3];
    if (d0 > 0.0 && d1 > 0.0 && d2 > 0.0) {
      double r1 = d1 / d0, r2 = d2 / d1;
      if (r2 > 0.0 && r2 < 0.98 && std::abs(r2 - r1) < 0.05) {
        double tail = d2 * r2 / (1.0 - r2);
        limit = out.trace[m] + tail;
        spread = std::abs(r2 - r1) / (1.0 - r2) * d2 / (1.0 - r2) +
                 2.0 * se[m] + 1e-4 * limit;
        out.plateau = true;
      }
    }
  }

  auto g = model.lambda_derivs(s, 2);
  double sigma = std::sqrt(g[2]);
  double front =
      std::sqrt(g[1]) / (s * sigma * sol.nu_r * std::sqrt(2.0 * M_PI));
  out.varkappa = front * limit;
  out.lo = front * (limit - spread);
  out.hi = front * (limit + spread);
  return out;
}

namespace {

LDPrediction base_prediction(const RateModel& model,
                             const PrefactorEstimate& pf, double u,
                             double beta, double l, const Vec* y) {
  if (!model.calibrated())
    throw DomainError("predict: model not calibrated");
  if (beta >= model.rho() || beta <= 0.0)
    throw DomainError("predict: beta outside the lower-deviation range "
                      "(0, rho)");
  if (l < 0.0 || l >= beta) throw DomainError("predict: need 0 <= l < beta");
  RatePoint pt = rate_I(model, beta);
  double target = (beta - l) * std::log(u);
  LDPrediction pred;
  pred.u = u;
  pred.beta = beta;
  pred.l = l;
  pred.chi = target - std::floor(target);
  double kappa = std::exp(pt.gammas[0]);
  pred.C = pf.varkappa * std::pow(kappa, -pred.chi);
  double rate = l == 0.0 ? pt.I : rate_I(model, beta - l).I;
  pred.value = pred.C / std::sqrt(std::log(u)) * std::exp(-rate * std::log(u));
  if (y) pred.value *= model.solve(pt.s).r_star_at(*y);
  pred.variant = y ? "directional" : "cumulative";
  return pred;
}

}  // namespace

LDPrediction predict_ld(const RateModel& model, const PrefactorEstimate& pf,
                        double u, double beta, double l, const Vec* y) {
  return base_prediction(model, pf, u, beta, l, y);
}

LDPrediction predict_local(const RateModel& model, const PrefactorEstimate& pf,
                           double u, double beta, double l, double a, int m,
                           const Vec* y) {
  if (a > 0.0 || m < 1 || a + m > 0.0)
    throw DomainError("predict_local: need a <= 0, m >= 1, a + m <= 0");
  LDPrediction pred = base_prediction(model, pf, u, beta, l, y);
  double ip = rate_I(model, beta).I_prime;
  pred.value *= std::exp(a * ip) * (std::exp(m * ip) - 1.0);
  pred.variant = "local";
  return pred;
}

LDPrediction predict_pointwise(const RateModel& model,
                               const PrefactorEstimate& pf, double u,
                               double beta, const Vec* y) {
  LDPrediction pred = predict_local(model, pf, u, beta, 0.0, -1.0, 1, y);
  pred.variant = "pointwise";
  return pred;
}

double predict_clt(const RateModel& model, double u, double t) {
  (void)model;
  (void)u;
  return normal_cdf(t);
}

double clt_standardize(const RateModel& model, double u, double n) {
  double lu = std::log(u);
  return (n - model.rho() * lu) /
         (model.sigma_alpha() * std::pow(model.rho(), 1.5) * std::sqrt(lu));
}

std::pair<double, double> predict_lln_window(const RateModel& model, double u,
                                             double b) {
  double lu = std::log(u);
  if (lu <= 1.0) throw DomainError("predict_lln_window: need u > e");
  double half = b * std::sqrt(std::log(lu) / lu);
  return {(model.rho() - half) * lu, (model.rho() + half) * lu};
}

double predict_matrix_ld(const RateModel& model, int n, double q, double l,
                         const Vec& x, const Vec* y) {
  double s = model.s_of_slope(q);
  auto g = model.lambda_derivs(s, 5);
  double sigma = std::sqrt(g[2]);
  double lstar = s * q - g[0];  // Lambda*(q)
  double lstar_ql = lstar + s * l + l * l / (2.0 * sigma * sigma) -
                    std::pow(l, 3) / std::pow(sigma, 3) *
                        cramer_xi_terms(g, l / sigma);
  const SpectralSolution& sol = model.solve(s);
  double value = sol.r_at(normalize_direction(x)) / sol.nu_r *
                 std::exp(-n * lstar_ql) /
                 (s * sigma * std::sqrt(2.0 * M_PI * n));
  if (y) value *= sol.r_star_at(normalize_direction(*y));
  return value;
}

KestenFit kesten_prefactor(double alpha, const std::vector<double>& samples,
                           const std::vector<double>& u_grid) {
  KestenFit fit;
  std::vector<double> sorted(samples);
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<double> weights;
  for (double u : u_grid) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), u);
    double p = static_cast<double>(sorted.end() - it) / n;
    fit.trace.push_back(std::pow(u, alpha) * p);
    weights.push_back(p * n);  // exceedance counts, for CI weighting
  }
  // Plateau over the upper half of the grid, excluding starved points.
  std::size_t lo = fit.trace.size() / 2;
  double mean = 0.0;
  int used = 0;
  for (std::size_t i = lo; i < fit.trace.size(); ++i)
    if (weights[i] >= 25.0) {
      mean += fit.trace[i];
      ++used;
    }
  if (used == 0) return fit;  // pre-asymptotic: no plateau flag
  mean /= used;
  double dev = 0.0, worst_se = 0.0;
  for (std::size_t i = lo; i < fit.trace.size(); ++i)
    if (weights[i] >= 25.0) {
      dev = std::max(dev, std::abs(fit.trace[i] - mean) / mean);
      worst_se = std::max(worst_se, fit.trace[i] / std::sqrt(weights[i]));
    }
  fit.C = mean;
  fit.flatness = dev;
  fit.plateau = dev < 0.5;
  fit.lo = mean - 2.0 * worst_se - dev * mean;
  fit.hi = mean + 2.0 * worst_se + dev * mean;
  return fit;
}

}  // namespace mfpt
