#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mfpt/oracle.hpp"
#include "mfpt/rate_model.hpp"
#include "mfpt/simulate.hpp"

using namespace mfpt;

namespace {

// Mean and standard error of weighted indicator estimates.
struct MeanSe {
  double mean = 0.0, se = 0.0;
};

MeanSe summarize(const std::vector<double>& xs) {
  MeanSe out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - out.mean) * (x - out.mean);
  var /= static_cast<double>(xs.size() - 1);
  out.se = std::sqrt(var / static_cast<double>(xs.size()));
  return out;
}

}  // namespace

TEST_CASE("forward_step recursion") {
  PathState st;
  st.V = Vec(2);
  st.V << 1.0, 2.0;
  st.direction = Vec(2);
  st.direction << 0.5, 0.5;
  Mat id = Mat::Identity(2, 2);
  Vec q(2);
  q << 1.0, 1.0;
  PathState next = forward_step(st, id, q);
  CHECK(next.n == 1);
  CHECK(next.V[0] == doctest::Approx(2.0));
  CHECK(next.V[1] == doctest::Approx(3.0));
  CHECK(next.pi_log_norm == doctest::Approx(0.0));

  // d = 1: V = 3, M = 2, Q = 1 -> 7.
  PathState s1;
  s1.V = Vec::Constant(1, 3.0);
  s1.direction = Vec::Constant(1, 1.0);
  PathState n1 = forward_step(s1, Mat::Constant(1, 1, 2.0),
                              Vec::Constant(1, 1.0));
  CHECK(n1.V[0] == doctest::Approx(7.0));
  CHECK(n1.pi_log_norm == doctest::Approx(std::log(2.0)));
}

TEST_CASE("deterministic passage time") {
  Law law = build_law_scalar({{{2.0, 1.0, 1.0}}});
  for (std::uint64_t stream = 0; stream < 16; ++stream) {
    PassageSample s = simulate_tau(law, 10.0, 100, 3, stream);
    CHECK(s.tau == 4);
    CHECK(s.overshoot == doctest::Approx(5.0));  // V_4 = 15
    CHECK(s.weight() == doctest::Approx(1.0));
  }
}

TEST_CASE("bounded trajectory is censored, never silently dropped") {
  Law law = build_law_scalar({{{0.5, 1.0, 1.0}}});  // V_n -> 2 < 10
  PassageSample s = simulate_tau(law, 10.0, 5000, 3, 0);
  CHECK(s.censored());
  CHECK(s.tau == -1);
}

TEST_CASE("plain MC matches enumeration: P(tau_3 = 3) = 1/2") {
  Law law = build_law_scalar({{{2.0, 1.0, 0.5}}, {{0.5, 1.0, 0.5}}});
  const int reps = 20000;
  int hits = 0;
  for (int rep = 0; rep < reps; ++rep) {
    PassageSample s = simulate_tau(law, 3.0, 3, 99,
                                   static_cast<std::uint64_t>(rep));
    if (!s.censored()) {
      CHECK(s.tau == 3);  // P(tau <= 2) = 0
      ++hits;
    }
  }
  double p = hits / static_cast<double>(reps);
  double se = std::sqrt(0.25 / reps);
  CHECK(std::abs(p - 0.5) < 3.0 * se);
}

TEST_CASE("marginal equality between forward process and perpetuity") {
  // P(|V*_n| > u) from forward sampling equals oracle P(|V_n| > u).
  Law law = law_golden();
  double u = 5.0;
  int n = 6;
  double exact = exact_exceedance(law, u, n);
  const int reps = 40000;
  auto vs = sample_V(law, n, reps, 21);
  int hits = 0;
  for (const Vec& v : vs) hits += v.sum() > u;
  double p = hits / static_cast<double>(reps);
  double se = std::sqrt(exact * (1.0 - exact) / reps);
  CHECK(std::abs(p - exact) < 3.0 * se);
}

TEST_CASE("tilted estimator is unbiased against the oracle") {
  Law law = law_golden();
  RateModel model(law);
  model.calibrate();
  double u = 8.0;
  int n = 6;
  double exact = exact_passage_law(law, u, n).p_leq(n);
  for (double s : {model.alpha(), model.alpha() + 0.4}) {
    const SpectralSolution& sol = model.solve(s);
    const int reps = 30000;
    std::vector<double> w(reps, 0.0);
    for (int rep = 0; rep < reps; ++rep) {
      PassageSample ps = simulate_tau_tilted(law, u, s, sol, n, 7,
                                             static_cast<std::uint64_t>(rep));
      if (!ps.censored()) w[static_cast<std::size_t>(rep)] = ps.weight();
    }
    MeanSe est = summarize(w);
    CHECK(std::abs(est.mean - exact) < 3.0 * est.se);
  }
}

TEST_CASE("tilt at s = 0 degenerates to plain MC") {
  Law law = law_golden();
  RateModel model(law);
  const SpectralSolution& sol = model.solve(0.0);
  for (std::uint64_t stream = 0; stream < 50; ++stream) {
    PassageSample s = simulate_tau_tilted(law, 6.0, 0.0, sol, 20, 5, stream);
    CHECK(s.log_weight == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("deterministic law: tilted weights are exactly 1") {
  // Single atom: the tilt cannot change the path, and kappa^n/|Pi_n|^s = 1.
  Law law = build_law_scalar({{{2.0, 1.0, 1.0}}});
  RateModel model(law);
  const SpectralSolution& sol = model.solve(1.2);
  PassageSample s = simulate_tau_tilted(law, 50.0, 1.2, sol, 50, 5, 0);
  CHECK_FALSE(s.censored());
  CHECK(s.log_weight == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("tau is nondecreasing in u along a fixed path") {
  // V_n increases along each path, so raising u can only delay passage; a
  // path censored at some u stays censored at every larger u.
  Law law = law_golden();
  for (std::uint64_t stream = 0; stream < 30; ++stream) {
    long long prev = 1;
    bool censored = false;
    for (double u : {0.5, 1.5, 4.0, 10.0, 30.0}) {
      PassageSample s = simulate_tau(law, u, 4000, 13, stream);
      if (censored) {
        CHECK(s.censored());
        continue;
      }
      if (s.censored()) {
        censored = true;
        continue;
      }
      CHECK(s.tau >= prev);
      prev = s.tau;
    }
  }
}

TEST_CASE("sample_V closed forms") {
  // n = 1: V_1 = Q.
  auto v1 = sample_V(law_two_d2(), 1, 50, 3);
  for (const Vec& v : v1) {
    bool is_q1 = std::abs(v[0] - 1.0) < 1e-15 && std::abs(v[1] - 0.5) < 1e-15;
    bool is_q2 = std::abs(v[0] - 0.5) < 1e-15 && std::abs(v[1] - 1.0) < 1e-15;
    CHECK((is_q1 || is_q2));
  }
  // Deterministic contraction: V_20 = 2 - 2^{-19}.
  Law half = build_law_scalar({{{0.5, 1.0, 1.0}}});
  auto v20 = sample_V(half, 20, 5, 3);
  for (const Vec& v : v20)
    CHECK(std::abs(v[0] - 2.0) <= std::pow(2.0, -18.0));
  // Mean of |V_n| for the deterministic half law: 2(1 - 2^{-n}).
  auto v6 = sample_V(half, 6, 3, 3);
  CHECK(v6[0][0] == doctest::Approx(2.0 * (1.0 - std::pow(2.0, -6.0))));
}

TEST_CASE("results are independent of the worker count") {
  Law law = law_golden();
  auto run = [&](int workers) {
    std::vector<long long> taus(4000);
    parallel_for(4000, workers, [&](long long rep) {
      taus[static_cast<std::size_t>(rep)] =
          simulate_tau(law, 25.0, 2000, 31, static_cast<std::uint64_t>(rep))
              .tau;
    });
    return taus;
  };
  auto one = run(1);
  auto eight = run(8);
  CHECK(one == eight);
}

TEST_CASE("default censoring horizon") {
  long long n = default_max_steps(std::exp(10.0), 3.0);
  CHECK(n >= 121);  // ceil(4 * 3 * 10) + 1, modulo rounding of log(exp(10))
  CHECK(n <= 122);
  CHECK(default_max_steps(std::exp(1.0), 2.0) >= 9);
}

TEST_CASE("input validation") {
  Law law = law_golden();
  CHECK_THROWS_AS(simulate_tau(law, -1.0, 10, 1, 0), DomainError);
  CHECK_THROWS_AS(simulate_tau(law, 5.0, 0, 1, 0), DomainError);
}
