#pragma once

#include <vector>

#include "mfpt/spectral.hpp"

namespace mfpt {

struct EnumerationBudget {
  int max_depth = 24;
  std::uint64_t max_paths = 1ULL << 24;
  double prune_tol = 0.0;  // branches below this mass are dropped and reported
};

// Exact law of tau_u (or tau_u^y) on a finite-support law: P(tau = n) for
// n = 1..n_max plus the remaining mass P(tau > n_max).
struct PassageLaw {
  std::vector<double> p_tau;  // index 0 holds P(tau = 1)
  double p_beyond = 0.0;
  double pruned_mass = 0.0;

  double p_at(int n) const {
    return (n >= 1 && n <= static_cast<int>(p_tau.size()))
               ? p_tau[static_cast<std::size_t>(n - 1)] : 0.0;
  }
  double p_leq(int n) const {
    double acc = 0.0;
    for (int k = 1; k <= n && k <= static_cast<int>(p_tau.size()); ++k)
      acc += p_tau[static_cast<std::size_t>(k - 1)];
    return acc;
  }
};

PassageLaw exact_passage_law(const Law& law, double u, int n_max,
                             const Vec* y = nullptr,
                             EnumerationBudget budget = {});

// E ||Pi_n||^s by path enumeration.
double exact_matrix_moment(const Law& law, double s, int n,
                           EnumerationBudget budget = {});

struct WValues {
  double weighted = 0.0;  // E[|V_n|^s r_s(V_n/|V_n|)] / kappa(s)^n
  double plain = 0.0;     // E[|V_n|^s] / kappa(s)^n
};

WValues exact_W(const Law& law, const SpectralSolution& spectral, double s,
                int n, EnumerationBudget budget = {});

// P(|V_n| > u) and, when y is given, P(<y, V_n> > u).
double exact_exceedance(const Law& law, double u, int n, const Vec* y = nullptr,
                        EnumerationBudget budget = {});

// P(log |Pi_n x| >= threshold) or, with y, P(log <y, Pi_n x> >= threshold).
double exact_matrix_tail(const Law& law, int n, double log_threshold,
                         const Vec& x, const Vec* y = nullptr,
                         EnumerationBudget budget = {});

}  // namespace mfpt
