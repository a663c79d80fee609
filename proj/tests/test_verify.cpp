#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mfpt/oracle.hpp"
#include "mfpt/verify.hpp"

using namespace mfpt;

TEST_CASE("KS distance closed forms") {
  // Midpoint quantiles of U(0,1): the empirical cdf straddles the line by
  // exactly 1/(2n) on each side, so the KS distance is 0.5/n.
  auto uniform = [](double t) { return std::min(1.0, std::max(0.0, t)); };
  for (int n : {4, 10, 25}) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      xs[static_cast<std::size_t>(i)] = (i + 0.5) / n;
    CHECK(ks_statistic(xs, uniform) == doctest::Approx(0.5 / n)
                                           .epsilon(1e-12));
  }
  // A point mass at the median of the reference has distance 1/2.
  CHECK(ks_statistic({0.5}, uniform) == doctest::Approx(0.5));
  CHECK_THROWS_AS(ks_statistic({}, uniform), DomainError);
}

TEST_CASE("weighted KS generalizes the unweighted one") {
  auto uniform = [](double t) { return std::min(1.0, std::max(0.0, t)); };
  std::vector<double> xs{0.05, 0.35, 0.55, 0.95};
  std::vector<std::pair<double, double>> vw, vw_scaled;
  for (double x : xs) {
    vw.emplace_back(x, 1.0);
    vw_scaled.emplace_back(x, 7.25);  // self-normalizing: scale-invariant
  }
  double plain = ks_statistic(xs, uniform);
  CHECK(weighted_ks(vw, uniform) == doctest::Approx(plain).epsilon(1e-12));
  CHECK(weighted_ks(vw_scaled, uniform) == doctest::Approx(plain)
                                               .epsilon(1e-12));
  // Sending one weight to zero removes the point.
  std::vector<std::pair<double, double>> vw3{{0.05, 1.0}, {0.35, 1.0},
                                             {0.55, 1.0}, {0.95, 0.0}};
  std::vector<double> xs3{0.05, 0.35, 0.55};
  CHECK(weighted_ks(vw3, uniform) == doctest::Approx(ks_statistic(xs3,
                                                                  uniform)));
  CHECK_THROWS_AS(weighted_ks({}, uniform), DomainError);
}

TEST_CASE("Hill estimator on exact Pareto quantiles") {
  // P(X > x) = x^{-alpha}: quantiles x_i = (1 - p_i)^{-1/alpha}.
  for (double alpha : {1.0, 2.5}) {
    const int n = 50000;
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i)
      xs[static_cast<std::size_t>(i)] =
          std::pow(1.0 - (i + 0.5) / n, -1.0 / alpha);
    double est = hill_estimator(xs, 2000);
    CHECK(est == doctest::Approx(alpha).epsilon(0.02));
  }
  std::vector<double> tiny{1.0, 2.0};
  CHECK_THROWS_AS(hill_estimator(tiny, 5), DomainError);
}

TEST_CASE("tilted passage estimate agrees with the oracle") {
  Law law = law_golden();
  RateModel model(law);
  model.calibrate();
  double u = 8.0;
  int n = 6;
  double exact = exact_passage_law(law, u, n).p_leq(n);
  const SpectralSolution& sol = model.solve(model.alpha());
  IsEstimate est = estimate_passage_tilted(law, sol, u, n, 30000, 11, 4);
  CHECK(std::abs(est.p - exact) < 3.0 * est.se);
  CHECK(est.se > 0.0);
  CHECK(est.se < 0.05 * est.p);  // variance reduction actually works here
}

TEST_CASE("conditioned samples are worker-count independent") {
  Law law = law_nonarith();
  RateModel model(law);
  model.calibrate();
  auto one = conditioned_tau_samples(law, model, 50.0, 2000, 5, 1);
  auto eight = conditioned_tau_samples(law, model, 50.0, 2000, 5, 8);
  REQUIRE(one.size() == eight.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].first == eight[i].first);
    CHECK(one[i].second == eight[i].second);
  }
}

TEST_CASE("heavy-tail check passes on a calibratable law") {
  Law law = law_garch_bundled();
  RateModel model(law);
  model.calibrate();
  std::vector<double> grid;
  for (double e = 2.0; e <= 5.0; e += 1.0) grid.push_back(std::exp(e));
  VerificationReport rep = check_kesten(law, model, grid, 60000, 3, 2);
  CHECK_FALSE(rep.failed());
  CHECK(rep.theorem == "kesten");
  double hill = rep.details.at("alpha_hill").get<double>();
  CHECK(hill == doctest::Approx(model.alpha()).epsilon(0.12));
}

TEST_CASE("CLT check reports arithmetic laws as inapplicable") {
  Law law = law_golden();  // multiplier logs are commensurable
  RateModel model(law);
  model.calibrate();
  VerificationReport rep = check_clt(law, model, {std::exp(6.0)}, 500, 1, 1);
  CHECK(rep.verdict == "warn");
  CHECK_FALSE(rep.failed());
}

TEST_CASE("matrix deviation check passes on the bundled scalar law") {
  Law law = law_nonarith();
  RateModel model(law);
  model.calibrate();
  double q = model.lambda_prime(model.alpha());
  VerificationReport rep =
      check_matrix_ld(law, model, {8, 12, 16}, q, Vec::Constant(1, 1.0));
  CHECK_FALSE(rep.failed());
}

TEST_CASE("reports serialize deterministically without metadata") {
  Law law = law_nonarith();
  RateModel model(law);
  model.calibrate();
  auto run = [&](int workers) {
    VerificationReport rep =
        check_lln(law, model, {std::exp(6.0), std::exp(8.0)}, 4000, 9, 0.0,
                  workers);
    return rep.to_json(false).dump();
  };
  std::string a = run(1);
  std::string b = run(8);
  CHECK(a == b);
  // With metadata the runtime field may differ, but the verdict agrees.
  VerificationReport rep =
      check_lln(law, model, {std::exp(6.0), std::exp(8.0)}, 4000, 9, 0.0, 1);
  CHECK(rep.to_json(true).contains("meta"));
  CHECK_FALSE(rep.to_json(false).contains("meta"));
  CHECK((rep.verdict == "pass" || rep.verdict == "warn" ||
         rep.verdict == "fail"));
}

TEST_CASE("failed() maps only the fail verdict") {
  VerificationReport rep;
  rep.verdict = "pass";
  CHECK_FALSE(rep.failed());
  rep.verdict = "warn";
  CHECK_FALSE(rep.failed());
  rep.verdict = "fail";
  CHECK(rep.failed());
}
