#pragma once

#include <optional>
#include <vector>

#include "mfpt/spectral.hpp"

namespace mfpt {

// State of the forward process V*_n = M_n V*_{n-1} + Q_n. The direction is
// the projective chain G_n . x0 with G_n = M_n ... M_1 and pi_log_norm the
// accumulated log |G_n x0|.
struct PathState {
  long long n = 0;
  Vec V;
  double pi_log_norm = 0.0;
  Vec direction;
};

PathState forward_step(const PathState& state, const Mat& M, const Vec& Q);

struct PassageSample {
  long long tau = -1;  // -1 when censored at max_steps
  Vec direction;       // V_tau / |V_tau| (last direction if censored)
  double overshoot = 0.0;
  double log_weight = 0.0;  // importance log-weight; 0 for plain MC
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  bool censored() const { return tau < 0; }
  double weight() const { return std::exp(log_weight); }
};

// First passage of the perpetuity sequence V_n = V_{n-1} + Pi_{n-1} Q_n.
// Passage is strict: |V_n| > u (or <y, V_n> > u for the directional time).
PassageSample simulate_tau(const Law& law, double u, long long max_steps,
                           std::uint64_t seed, std::uint64_t stream,
                           const Vec* y = nullptr);

// Same, under the exponential tilt of the matrix increments by
// |g x|^s r_s(g.x) / (kappa(s) r_s(x)). The Q-component keeps its
// conditional law given M. Weights use the sampler's actual normalizer, so
// weighted indicators are unbiased for untilted probabilities regardless of
// the discretization error in r_s.
PassageSample simulate_tau_tilted(const Law& law, double u, double s,
                                  const SpectralSolution& spectral,
                                  long long max_steps, std::uint64_t seed,
                                  std::uint64_t stream, const Vec* y = nullptr);

// i.i.d. draws of V*_n (same law as V_n) via the forward recursion.
std::vector<Vec> sample_V(const Law& law, int n, int samples,
                          std::uint64_t seed, int workers = 1);

// Default censoring horizon: 4 * rho * log u when rho is known.
long long default_max_steps(double u, double rho);

// Simple index-based worker pool; results must be written to distinct slots.
void parallel_for(long long count, int workers,
                  const std::function<void(long long)>& fn);

}  // namespace mfpt
