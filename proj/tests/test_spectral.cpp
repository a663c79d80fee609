#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mfpt/oracle.hpp"
#include "mfpt/rate_model.hpp"

using namespace mfpt;

namespace {

// d = 1 closed form for the two-atom law {(2, 1/2), (1/4, 1/2)}:
// kappa(s) = (2^s + 4^{-s}) / 2.
double kappa_golden(double s) {
  return 0.5 * (std::pow(2.0, s) + std::pow(0.25, s));
}

}  // namespace

TEST_CASE("scalar law: kappa matches the closed form") {
  RateModel model(law_golden());
  for (double s : {0.25, 0.5, 1.0, 1.5, 2.0}) {
    CHECK(model.solve(s).kappa ==
          doctest::Approx(kappa_golden(s)).epsilon(1e-12));
  }
  CHECK(model.solve(1.0).kappa == doctest::Approx(1.125).epsilon(1e-9));
}

TEST_CASE("tail index: golden-ratio root") {
  // 2^a + 4^{-a} = 2 has the root a = log2((1+sqrt(5))/2).
  RateModel model(law_golden());
  model.calibrate();
  double expected = std::log2(0.5 * (1.0 + std::sqrt(5.0)));
  CHECK(model.alpha() == doctest::Approx(expected).epsilon(1e-9));
  CHECK(model.rho() == doctest::Approx(3.3782735502).epsilon(1e-6));
  CHECK(model.sigma_alpha() == doctest::Approx(0.8173779165).epsilon(1e-6));
}

TEST_CASE("d = 2: kappa(1) equals the Perron root of the mean matrix") {
  // At s = 1 the weighted operator acts linearly, so its top eigenvalue is
  // the dominant eigenvalue of E[M].
  RateModel two(law_two_d2());
  double exact_two = 0.5 * (1.1 + std::sqrt(1.12));
  CHECK(two.solve(1.0).kappa == doctest::Approx(exact_two).epsilon(1e-8));

  RateModel garch(law_garch_bundled());
  double exact_garch = 0.5 * (0.8 + std::sqrt(0.64 + 0.6));
  CHECK(garch.solve(1.0).kappa == doctest::Approx(exact_garch).epsilon(1e-8));
}

TEST_CASE("s = 0 is the Markov case: kappa = 1") {
  for (const Law& law : {law_golden(), law_two_d2(), law_garch_bundled()}) {
    RateModel model(law);
    CHECK(model.solve(0.0).kappa == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("eigen-data normalization and positivity") {
  RateModel model(law_two_d2());
  const SpectralSolution& sol = model.solve(0.8);
  CHECK((sol.r.array() > 0.0).all());
  CHECK((sol.nu.array() >= 0.0).all());
  CHECK(sol.nu.sum() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.nu.dot(sol.r) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.nu_r == doctest::Approx(1.0));
  // r* is a positive s-homogeneous average of <x, .>^s.
  Vec e1(2);
  e1 << 1.0, 0.0;
  CHECK(sol.r_star_at(e1) > 0.0);
}

TEST_CASE("fixed-point property of the discretized operator") {
  // kappa r(x) = sum_k p_k |M_k x|^s r(M_k . x) at interior grid points.
  RateModel model(law_two_d2());
  double s = 1.3;
  const SpectralSolution& sol = model.solve(s);
  const Law law = law_two_d2();
  double worst = 0.0;
  for (std::size_t i = 20; i + 20 < sol.grid.points.size(); i += 7) {
    const Vec& x = sol.grid.points[i];
    double applied = 0.0;
    for (const Atom& a : law.atoms()) {
      Vec v = a.M * x;
      applied += a.p * std::pow(v.sum(), s) * sol.r_at(v / v.sum());
    }
    worst = std::max(worst,
                     std::abs(applied - sol.kappa * sol.r_at(x)) /
                         std::abs(sol.kappa * sol.r_at(x)));
  }
  CHECK(worst < 1e-4);  // limited by grid interpolation, not the solver
}

TEST_CASE("grid refinement stability") {
  for (int res : {120, 240}) {
    RateModel coarse(law_two_d2(), res);
    RateModel fine(law_two_d2(), 2 * res);
    for (double s : {0.6, 1.2}) {
      const SpectralSolution& c = coarse.solve(s);
      double delta = std::abs(c.kappa - fine.solve(s).kappa);
      CHECK(delta <= 3.0 * c.residual + 1e-12);
    }
  }
}

TEST_CASE("pressure is convex") {
  for (const Law& law : {law_golden(), law_two_d2()}) {
    RateModel model(law);
    for (double s : {0.3, 0.7, 1.1, 1.6}) {
      CHECK(model.lambda_derivs(s, 2)[2] > 0.0);
    }
  }
}

TEST_CASE("derivatives match the scalar closed form") {
  RateModel model(law_golden());
  auto d = model.lambda_derivs(1.0, 2);
  // Lambda'(1) = (2 ln2 + 0.25 ln(1/4)) / 2.25.
  double l1 = (2.0 * std::log(2.0) + 0.25 * std::log(0.25)) / 2.25;
  CHECK(d[1] == doctest::Approx(l1).epsilon(1e-9));
  // Lambda''(1) from the closed form: E m^s (ln m)^2 / kappa - (Lambda')^2.
  double m2 = (2.0 * std::pow(std::log(2.0), 2) +
               0.25 * std::pow(std::log(0.25), 2)) / 2.25;
  CHECK(d[2] == doctest::Approx(m2 - l1 * l1).epsilon(1e-7));
}

TEST_CASE("monte carlo kappa is consistent") {
  Law law = law_golden();
  RateModel model(law);
  double s = 1.0;
  double exact = model.solve(s).kappa;
  double prev_err = 1e9;
  for (int n : {4, 8, 16}) {
    McEstimate est = kappa_mc(law, s, n, 40000, 17);
    double err = std::abs(est.value - exact);
    CHECK(err < std::max(4.0 * est.std_error, 0.01));
    CHECK(err <= prev_err + 2.0 * est.std_error);
    prev_err = err;
  }
}

TEST_CASE("uniform moment bound: E||Pi_n||^s <= c kappa(s)^n") {
  Law law = law_two_d2();
  RateModel model(law);
  double c = 0.0;
  for (double s : {0.4, 0.8, 1.2, 1.6}) {
    double kappa = model.solve(s).kappa;
    for (int n = 1; n <= 8; ++n) {
      double ratio = exact_matrix_moment(law, s, n) / std::pow(kappa, n);
      c = std::max(c, ratio);
      CHECK(ratio < 50.0);  // single modest constant suffices
    }
  }
  CHECK(c >= 1.0 - 1e-9);  // norms dominate iota, so the ratio reaches 1
}

TEST_CASE("calibration failure modes") {
  // All multipliers < 1: Lambda < 0 everywhere, no positive root.
  Law shrinking = build_law_scalar({{{0.5, 1.0, 0.5}}, {{0.8, 1.0, 0.5}}});
  RateModel model(shrinking);
  CHECK_THROWS_AS(model.calibrate(), DomainError);
  // Expanding law: Lambda(s_lo) >= 0 already.
  Law growing = build_law_scalar({{{2.0, 1.0, 1.0}}});
  RateModel model2(growing);
  CHECK_THROWS_AS(model2.calibrate(), DomainError);
}
