#include <doctest.h>

#include "pwsbl/certify.hpp"
#include "pwsbl/proximal.hpp"
#include "support.hpp"

using namespace pwsbl;
using testsup::vec1;

TEST_CASE("wcert_search hand trace on |x| ends infeasible") {
  const ProblemInstance abs = testsup::make_abs_1d();
  const WcertOutcome out = wcert_search(objective_of(abs), vec1(0), 0.1, 1, kInf);
  CHECK(out.exit == WcertOutcome::Exit::kInfeasible);
  REQUIRE(out.cert.has_value());
  const WCertificate& c = *out.cert;
  CHECK(c.iota_unbounded);
  CHECK(c.delta_used == 0.1);
  // first search point is the projection onto -x <= -0.2, i.e. x = 0.2
  REQUIRE(c.points.size() == 2);
  CHECK(c.points[1].x[0] == doctest::Approx(0.2).epsilon(1e-9));
  // gap bound in the unbounded limit is 2 Delta, above the true gap 0
  CHECK(certificate_gap_bound(c, 1.0) == doctest::Approx(0.2));
}

TEST_CASE("wcert_search never returns False at an optimum") {
  const ProblemInstance sq = testsup::make_square_1d();
  for (double Delta : {1e-3, 0.1, 1.0, 10.0}) {
    const WcertOutcome out = wcert_search(objective_of(sq), vec1(0), Delta, 3, kInf);
    CHECK_FALSE(out.returned_false());
  }
  CHECK_THROWS_AS(wcert_search(objective_of(sq), vec1(0), 0.0, 3, kInf),
                  std::invalid_argument);
}

TEST_CASE("search distances are monotone and every certificate validates") {
  RngState rng = make_rng(17, 1);
  for (std::uint64_t seed : {5ULL, 6ULL, 7ULL, 8ULL}) {
    const ProblemInstance p = make_max_of_quadratics(3, 2, 4.0, 1.0, seed);
    const Vec xb = *p.truth().xstar + testsup::random_in_box(rng, 2, 1.0);
    const double gap = p.value(xb) - *p.truth().fstar;
    WcertOptions wo;
    wo.seed = seed;
    const WcertOutcome out =
        wcert_search(objective_of(p), xb, std::max(gap, 1e-6), 4, kInf, wo);
    REQUIRE_FALSE(out.returned_false());
    const WCertificate& c = *out.cert;
    double prev = 0.0;
    for (const OracleSample& s : c.points) {
      const double d = (s.x - c.center).norm();
      CHECK(d >= prev - 1e-12);
      prev = d;
    }
    const double v = validate_certificate(c, p.region(), 1e-10,
                                          c.iota_unbounded ? std::optional<double>(1e3)
                                                           : std::nullopt);
    const double nu_eff = c.iota_unbounded ? 2.0 * c.delta_used / 1e3 : c.nu;
    CHECK(v <= nu_eff + 1e-8);
    if (!c.iota_unbounded) {
      CHECK((c.points.back().x - c.center).norm() <= c.iota * (1 + 1e-12));
      CHECK(c.nu * c.iota == doctest::Approx(2.0 * c.delta_used));
    }
  }
}

TEST_CASE("bound formulas") {
  WCertificate c;
  c.center = vec1(0);
  c.iota = 1.0;
  c.nu = 0.1;
  c.delta_used = 0.1;
  CHECK(certificate_gap_bound(c, 2.0) == doctest::Approx(0.1));  // max(0.1, 0.01)
  c.iota = 0.01;
  CHECK(certificate_distance_bound(c, 2.0) == doctest::Approx(0.05));  // max(0.01, 0.05)
  c.nu = 0.0;
  CHECK(certificate_distance_bound(c, 2.0) == doctest::Approx(0.01));  // iota fallback
  c.nu = 0.1;
  c.iota = 0.05;
  CHECK(moreau_bound_from_cert(c, 1.0) == doctest::Approx(0.4));  // 2 nu + 4 iota rho
  WCertificate ub = c;
  ub.iota_unbounded = true;
  CHECK(certificate_gap_bound(ub, 2.0) == doctest::Approx(0.2));  // 2 Delta
  CHECK_THROWS_AS(certificate_distance_bound(ub, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(moreau_bound_from_cert(ub, 1.0), std::invalid_argument);
}

TEST_CASE("gap and distance bounds against ground truth") {
  RngState rng = make_rng(23, 5);
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    const ProblemInstance p = make_max_of_quadratics(3, 3, 3.0, 1.0, seed);
    const double mu = *p.truth().mu;
    const Vec xb = *p.truth().xstar + testsup::random_in_box(rng, 3, 0.8);
    const double gap = p.value(xb) - *p.truth().fstar;
    if (gap <= 0) continue;
    WcertOptions wo;
    wo.seed = seed;
    const WcertOutcome out = wcert_search(objective_of(p), xb, gap, 4, kInf, wo);
    REQUIRE_FALSE(out.returned_false());
    const WCertificate& c = *out.cert;
    CHECK(certificate_gap_bound(c, mu) >= gap - 1e-10);
    if (!c.iota_unbounded) {
      const double Lt = c.Ltilde.value_or(*p.truth().L);
      CHECK(certificate_gap_bound(c, mu) <=
            std::max(2.0, 32.0 * Lt / mu) * gap + 1e-8);
      CHECK(certificate_distance_bound(c, mu) >=
            (xb - *p.truth().xstar).norm() - 1e-10);
    }
  }
}

TEST_CASE("goldstein norm from the certificate model") {
  SUBCASE("absolute-value cuts cancel to zero") {
    WCertificate c;
    c.center = vec1(0);
    c.iota = 1.0;
    c.nu = 1e-9;
    c.model.push_back(testsup::make_cut(vec1(0), 0.0, vec1(1)));
    c.model.push_back(testsup::make_cut(vec1(0), 0.0, vec1(-1), 1));
    CHECK(goldstein_norm_from_cert(c, FeasibleRegion::whole_space(1)) <=
          c.nu + 1e-8);
  }
  SUBCASE("single cut returns its gradient norm") {
    WCertificate c;
    c.center = vec1(0.5);
    c.iota = 0.3;
    c.nu = 2.0;
    c.model.push_back(testsup::make_cut(vec1(0.5), 1.0, vec1(-2)));
    CHECK(goldstein_norm_from_cert(c, FeasibleRegion::whole_space(1)) ==
          doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("constrained regions are rejected") {
    WCertificate c;
    c.center = vec1(0);
    c.iota = 1;
    c.model.push_back(testsup::make_cut(vec1(0), 0.0, vec1(1)));
    CHECK_THROWS_AS(goldstein_norm_from_cert(c, FeasibleRegion::ball(vec1(0), 1.0)),
                    std::invalid_argument);
  }
  SUBCASE("suite certificates satisfy the nu bound") {
    RngState rng = make_rng(29, 3);
    for (std::uint64_t seed : {3ULL, 4ULL}) {
      const ProblemInstance p = make_max_of_quadratics(3, 2, 3.0, 1.0, seed);
      const Vec xb = *p.truth().xstar + testsup::random_in_box(rng, 2, 0.7);
      const double gap = p.value(xb) - *p.truth().fstar;
      const WcertOutcome out = wcert_search(objective_of(p), xb, std::max(gap, 1e-8), 4, kInf);
      REQUIRE_FALSE(out.returned_false());
      if (out.cert->iota_unbounded) continue;
      CHECK(goldstein_norm_from_cert(*out.cert, p.region()) <= out.cert->nu + 1e-8);
    }
  }
}

TEST_CASE("transfer to the base objective") {
  SUBCASE("parameter transform and precondition") {
    WCertificate c;
    c.center = vec1(0);
    c.iota = 0.05;
    c.nu = 0.2;
    c.delta_used = 0.1;
    c.model.push_back(testsup::make_cut(vec1(0), 0.0, vec1(1)));
    const WCertificate f = transfer_cert_to_f(c, 1.0);  // 2 iota rho = 0.1 <= nu
    CHECK(f.nu == doctest::Approx(0.4));
    CHECK(f.iota == doctest::Approx(0.05));
    c.nu = 0.05;  // now nu < 2 iota rho
    CHECK_THROWS_AS(transfer_cert_to_f(c, 1.0), std::invalid_argument);
  }
  SUBCASE("transferred certificate validates against f") {
    const ProblemInstance p = make_weakly_convex_max(2, 2, 1.0, 41);
    const double rho = *p.truth().rho;
    RngState rng = make_rng(41, 6);
    const Vec xb = testsup::random_in_box(rng, 2, 1.0);
    const ProxSurrogate P = make_surrogate(p, xb, rho);
    // a generous surrogate gap estimate
    const MoreauSolve ms = moreau_solve(p, xb, rho, 1e-11);
    const double Delta = std::max(p.value(xb) - ms.envelope, 1e-6) * 1.2;
    const WcertOutcome out =
        wcert_search(prox_objective(P), xb, Delta, 4, std::sqrt(Delta / rho));
    REQUIRE_FALSE(out.returned_false());
    REQUIRE_FALSE(out.cert->iota_unbounded);
    const WCertificate f = transfer_cert_to_f(*out.cert, rho);
    const double v = validate_certificate(f, p.region(), 1e-10);
    CHECK(v <= f.nu + 1e-8);
    CHECK(moreau_bound_from_cert(f, rho) >= ms.residual - 1e-6);
  }
}

TEST_CASE("emitted nu respects the 4 sqrt(Delta Ltilde) ceiling") {
  RngState rng = make_rng(67, 0);
  int finite = 0;
  for (std::uint64_t seed = 0; seed < 12 && finite < 4; ++seed) {
    const ProblemInstance p = make_max_of_quadratics(4, 3, 3.0, 1.0, 300 + seed);
    const Vec xb = *p.truth().xstar + testsup::random_in_box(rng, 3, 1.0);
    const double gap = p.value(xb) - *p.truth().fstar;
    if (gap <= 1e-10) continue;
    const WcertOutcome out = wcert_search(objective_of(p), xb, gap, 2, kInf);
    if (out.returned_false() || out.cert->iota_unbounded || !out.cert->Ltilde) continue;
    ++finite;
    CHECK(out.cert->nu <= 4.0 * std::sqrt(gap * *out.cert->Ltilde) + 1e-9);
  }
  CHECK(finite >= 1);
}

TEST_CASE("transfer with rho = 0 degenerates to plain doubling") {
  WCertificate c;
  c.center = vec1(0);
  c.iota = 0.05;
  c.nu = 0.2;
  c.delta_used = 0.1;
  c.model.push_back(testsup::make_cut(vec1(0.02), 0.1, vec1(1)));
  const WCertificate f = transfer_cert_to_f(c, 0.0);
  CHECK(f.nu == doctest::Approx(0.4));
  CHECK(f.model[0].value == doctest::Approx(0.1));  // cuts unchanged at rho = 0
  CHECK((f.model[0].gradient - c.model[0].gradient).norm() == 0.0);
}
