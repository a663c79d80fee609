#pragma once

#include <string>
#include <vector>

#include "mfpt/rate_model.hpp"

namespace mfpt {

double normal_cdf(double t);

// Rate function data at one time scale beta = 1/Lambda'(s).
struct RatePoint {
  double beta = 0.0;
  double s = 0.0;
  double I = 0.0;        // I(beta) = s - Lambda(s)/Lambda'(s)
  double I_prime = 0.0;  // decay rate Lambda(s) = -dI/dbeta, positive on (0,rho)
  std::array<double, 6> gammas{};  // Lambda^(k)(s), k = 0..5
};

// Fenchel-Legendre transform Lambda*(q) = s q - Lambda(s) at q = Lambda'(s).
double legendre(const RateModel& model, double q);

RatePoint rate_I(const RateModel& model, double beta);

// Truncated Cramer series: the three leading terms in t.
double cramer_xi_terms(const std::array<double, 6>& g, double t);
double cramer_xi(const RateModel& model, double s, double t);

struct ExpandResult {
  double expansion = 0.0;  // I(beta) + perturbation terms + h_s(l)
  double direct = 0.0;     // rate_I(beta - l).I, computed independently
};
ExpandResult expand_I(const RateModel& model, double beta, double l);

struct PrefactorEstimate {
  double s = 0.0;
  double varkappa = 0.0;
  double lo = 0.0, hi = 0.0;  // confidence/plateau interval
  std::vector<double> trace;  // kappa^{-n} E[|V_n|^s r_s(.)] values used
  bool plateau = false;
  std::string estimator;
};

// varkappa_s = sqrt(Lambda'(s)) / (s sigma_s nu_s(r_s) sqrt(2 pi)) times the
// limit of the (nondecreasing, bounded) moment trace. "oracle" enumerates
// exactly; "mc" uses forward-process sampling with error bars.
PrefactorEstimate prefactor_varkappa(const RateModel& model, double s,
                                     const std::string& estimator = "oracle",
                                     int n_max = 18, int mc_samples = 200000,
                                     std::uint64_t seed = 1, int workers = 1);

struct LDPrediction {
  double u = 0.0, beta = 0.0, l = 0.0;
  double chi = 0.0;    // fractional part of (beta - l) log u
  double C = 0.0;      // varkappa_s * kappa(s)^(-chi)
  double value = 0.0;  // predicted probability
  std::string variant;
};

// P(tau_u <= (beta - l) log u) ~ C_{beta,l}(u)/sqrt(log u) u^{-I(beta-l)};
// the directional variant multiplies by r*_s(y).
LDPrediction predict_ld(const RateModel& model, const PrefactorEstimate& pf,
                        double u, double beta, double l = 0.0,
                        const Vec* y = nullptr);

// P(tau_u - (beta - l) log u in (a, a+m]) carries the extra window factor
// e^{a I'(beta)} (e^{m I'(beta)} - 1); requires a <= 0, m >= 1, a + m <= 0.
LDPrediction predict_local(const RateModel& model, const PrefactorEstimate& pf,
                           double u, double beta, double l, double a, int m,
                           const Vec* y = nullptr);

// P(tau_u = floor(beta log u)): the local window at a = -1, m = 1, l = 0.
LDPrediction predict_pointwise(const RateModel& model,
                               const PrefactorEstimate& pf, double u,
                               double beta, const Vec* y = nullptr);

// Conditioned CLT: returns Phi(t); clt_standardize maps a passage time n to
// (n - rho log u) / (sigma_alpha rho^{3/2} sqrt(log u)).
double predict_clt(const RateModel& model, double u, double t);
double clt_standardize(const RateModel& model, double u, double n);

// Localization window [rho -+ b sqrt(loglog u / log u)] * log u.
std::pair<double, double> predict_lln_window(const RateModel& model, double u,
                                             double b);

// Bahadur-Rao-Petrov asymptotic for P(log |Pi_n x| >= n(q + l)); with y,
// for the coefficients <y, Pi_n x>. q must equal Lambda'(s) for some s.
double predict_matrix_ld(const RateModel& model, int n, double q, double l,
                         const Vec& x, const Vec* y = nullptr);

struct KestenFit {
  double C = 0.0;
  double lo = 0.0, hi = 0.0;
  double flatness = 0.0;  // max relative deviation over the plateau
  bool plateau = false;
  std::vector<double> trace;  // u^alpha * P(|V| > u) along the grid
};

// Plateau regression of u^alpha P(|V| > u) over the u grid from stationary
// samples of |V| (or of <y, V>).
KestenFit kesten_prefactor(double alpha, const std::vector<double>& samples,
                           const std::vector<double>& u_grid);

}  // namespace mfpt
