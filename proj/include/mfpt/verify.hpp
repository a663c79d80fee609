#pragma once

#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

#include "mfpt/asymptotics.hpp"

namespace mfpt {

using ordered_json = nlohmann::ordered_json;

// Per-theorem comparison of predicted against empirical quantities. The
// deterministic part (everything except meta) is byte-reproducible from the
// same law, seed and worker-independent sampling.
struct VerificationReport {
  std::string theorem;
  std::string verdict;  // pass | warn | fail
  std::uint64_t law_hash = 0;
  std::uint64_t seed = 0;
  ordered_json params;
  ordered_json details;
  double runtime_sec = 0.0;

  ordered_json to_json(bool include_meta = true) const;
  bool failed() const { return verdict == "fail"; }
};

// Two-sided Kolmogorov-Smirnov distance of samples against a reference cdf.
double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf);

// Weighted variant for self-normalized conditional samples.
double weighted_ks(std::vector<std::pair<double, double>> value_weight,
                   const std::function<double(double)>& cdf);

// Hill tail-index estimate from the top k order statistics.
double hill_estimator(std::vector<double> samples, int k);

VerificationReport check_kesten(const Law& law, RateModel& model,
                                const std::vector<double>& u_grid, int samples,
                                std::uint64_t seed, int workers = 1);

VerificationReport check_lln(const Law& law, RateModel& model,
                             const std::vector<double>& u_grid, int samples,
                             std::uint64_t seed, double b = 0.0,
                             int workers = 1);

VerificationReport check_clt(const Law& law, RateModel& model,
                             const std::vector<double>& u_grid, int samples,
                             std::uint64_t seed, int workers = 1);

VerificationReport check_ld(const Law& law, RateModel& model,
                            const PrefactorEstimate& pf, double beta,
                            const std::vector<double>& l_schedule,
                            const std::vector<double>& u_grid, int samples,
                            std::uint64_t seed, int workers = 1);

VerificationReport check_local(const Law& law, RateModel& model,
                               const PrefactorEstimate& pf, double beta,
                               const std::vector<int>& n_grid);

VerificationReport check_matrix_ld(const Law& law, RateModel& model,
                                   const std::vector<int>& n_grid, double q,
                                   const Vec& x, const Vec* y = nullptr);

// Importance-sampling estimate of P(tau_u <= n_cap) with its standard error,
// tilted at the given s.
struct IsEstimate {
  double p = 0.0;
  double se = 0.0;
};
IsEstimate estimate_passage_tilted(const Law& law,
                                   const SpectralSolution& spectral, double u,
                                   long long n_cap, int samples,
                                   std::uint64_t seed, int workers = 1,
                                   const Vec* y = nullptr);

// Conditioned passage-time samples (value, self-normalizing weight) drawn
// under the tilt at alpha; conditioning on {tau_u < infinity}.
std::vector<std::pair<double, double>> conditioned_tau_samples(
    const Law& law, RateModel& model, double u, int samples,
    std::uint64_t seed, int workers = 1);

}  // namespace mfpt
