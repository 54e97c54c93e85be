#include <doctest.h>

#include "pwsbl/adaptive.hpp"
#include "pwsbl/proximal.hpp"
#include "support.hpp"

using namespace pwsbl;

TEST_CASE("pf_bl_mu with a correct guess never restarts") {
  const ProblemInstance p = make_max_of_quadratics(3, 2, 3.0, 1.0, 61);
  RngState rng = make_rng(61, 0);
  const Vec x0 = *p.truth().xstar + testsup::random_in_box(rng, 2, 1.0);
  PfBlOptions o;
  o.target_eps = 1e-6;
  const PfBlOutcome r = pf_bl_mu(p, x0, *p.truth().mu, 5, o);
  CHECK(r.status == RunStatus::kConverged);
  CHECK(r.restarts == 0);
  CHECK(p.value(r.x) - *p.truth().fstar <= 1e-6);
}

TEST_CASE("pf_bl_mu halves an oversized guess a bounded number of times") {
  const ProblemInstance p = make_max_of_quadratics(3, 2, 3.0, 1.0, 62);
  RngState rng = make_rng(62, 0);
  const Vec x0 = *p.truth().xstar + testsup::random_in_box(rng, 2, 1.0);
  PfBlOptions o;
  o.target_eps = 1e-6;
  const PfBlOutcome r = pf_bl_mu(p, x0, 64.0 * *p.truth().mu, 5, o);
  CHECK(r.status == RunStatus::kConverged);
  CHECK(r.restarts <= 7);
  CHECK(p.value(r.x) - *p.truth().fstar <= 1e-6);
  // the guesses halve exactly
  for (std::size_t q = 1; q < r.guesses.size(); ++q)
    CHECK(r.guesses[q] == doctest::Approx(0.5 * r.guesses[q - 1]));
}

TEST_CASE("pf_bl_mu budget exhaustion reports best-so-far") {
  const ProblemInstance p = make_max_of_quadratics(3, 2, 3.0, 1.0, 63);
  PfBlOptions o;
  o.max_oracle_calls = 4;
  const PfBlOutcome r =
      pf_bl_mu(p, *p.truth().xstar + Vec::Constant(2, 0.5), 4.0, 5, o);
  CHECK(r.status == RunStatus::kBudgetExhausted);
  CHECK(r.x.size() == 2);
}

TEST_CASE("pf_ippm with an adequate guess returns a small validated certificate") {
  const ProblemInstance p = make_weakly_convex_max(3, 2, 1.0, 71);
  RngState rng = make_rng(71, 0);
  const Vec x0 = testsup::random_in_box(rng, 2, 1.2);
  const double eps = 0.08;
  const PfIppmOutcome r = pf_ippm(p, x0, *p.truth().rho, 5, eps);
  REQUIRE(r.status == RunStatus::kConverged);
  CHECK(r.restarts == 0);
  REQUIRE(r.cert_f.has_value());
  CHECK(r.cert_f->nu <= eps);
  CHECK(r.cert_f->iota <= eps);
  const double v = validate_certificate(*r.cert_f, p.region(), 1e-10);
  CHECK(v <= r.cert_f->nu + 1e-8);
}

TEST_CASE("pf_ippm doubles an undersized guess a bounded number of times") {
  const ProblemInstance p = make_weakly_convex_max(2, 2, 2.0, 72);
  RngState rng = make_rng(72, 0);
  const Vec x0 = testsup::random_in_box(rng, 2, 1.2);
  const double eps = 0.1;
  const PfIppmOutcome r = pf_ippm(p, x0, *p.truth().rho / 8.0, 5, eps);
  REQUIRE(r.status == RunStatus::kConverged);
  CHECK(r.guesses.size() <= 4);  // rho/8 -> rho/4 -> rho/2 -> rho
  REQUIRE(r.cert_f.has_value());
  CHECK(r.cert_f->nu <= eps);
  CHECK(r.cert_f->iota <= eps);
}

TEST_CASE("pf_ippm output is Moreau-stationary at the final guess") {
  const ProblemInstance p = make_weakly_convex_max(2, 2, 1.0, 73);
  RngState rng = make_rng(73, 0);
  const Vec x0 = testsup::random_in_box(rng, 2, 1.2);
  const double eps = 0.1;
  PfIppmOptions o;
  o.seed = 73;
  const PfIppmOutcome r = pf_ippm(p, x0, *p.truth().rho, 4, eps, o);
  REQUIRE(r.status == RunStatus::kConverged);
  const double rho_final = r.guesses.back();
  const double rho_eff = std::max(rho_final, *p.truth().rho);
  const double resid = moreau_residual(p, r.xbar, rho_eff, 1e-12);
  CHECK(resid <= 2.0 * eps + 4.0 * eps * rho_final + 1e-6);
}
