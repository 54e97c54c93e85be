#include <doctest.h>

#include "pwsbl/proximal.hpp"
#include "support.hpp"

using namespace pwsbl;
using testsup::vec1;

namespace {

// f identically zero on R.
ProblemInstance make_zero_1d() {
  std::vector<QuadPiece> pieces(1);
  pieces[0] = {0.0, testsup::vec1(0), testsup::vec1(0), 0.0};
  GroundTruth t;
  t.fstar = 0.0;
  t.xstar = testsup::vec1(0);
  return ProblemInstance(std::move(pieces), FeasibleRegion::whole_space(1), std::move(t), true);
}

}  // namespace

TEST_CASE("surrogate cut linearizes the quadratic at the sample center") {
  const ProblemInstance zero = make_zero_1d();
  const ProxSurrogate P = make_surrogate(zero, vec1(0), 1.0);
  const OracleSample s = prox_oracle(P, vec1(1), 0.0, make_rng(0, 0));
  // P(x) = x^2; sampled at 1: support must be 2x - 1
  CHECK(s.fx == doctest::Approx(1.0));
  CHECK(s.cut.support(vec1(0)) == doctest::Approx(-1.0));
  CHECK(s.cut.support(vec1(2)) == doctest::Approx(3.0));
  CHECK(s.cut.gradient[0] == doctest::Approx(2.0));
}

TEST_CASE("surrogate value at the center equals the base value") {
  const ProblemInstance p = make_weakly_convex_max(2, 2, 1.0, 5);
  const Vec c = testsup::vec2(0.3, -0.5);
  const ProxSurrogate P = make_surrogate(p, c, 1.0);
  const OracleSample s = prox_oracle(P, c, 0.0, make_rng(0, 0));
  CHECK(s.fx == doctest::Approx(p.value(c)));
}

TEST_CASE("surrogate cuts minorize P for weakly convex bases") {
  const ProblemInstance p = make_weakly_convex_max(3, 2, 1.5, 9);
  const double rho = 1.5;  // match the true modulus
  RngState rng = make_rng(9, 4);
  const Vec center = testsup::random_in_box(rng, 2, 1.0);
  const ProxSurrogate P = make_surrogate(p, center, rho);
  for (int s = 0; s < 25; ++s) {
    const Vec q = testsup::random_in_box(rng, 2, 1.5);
    const OracleSample smp = prox_oracle(P, q, 0.0, make_rng(9, 100 + s));
    for (int g = 0; g < 20; ++g) {
      const Vec x = testsup::random_in_box(rng, 2, 2.0);
      const double Pval = p.value(x) + rho * (x - center).squaredNorm();
      CHECK(smp.cut.support(x) <= Pval + 1e-10 * (1.0 + std::abs(Pval)));
    }
  }
}

TEST_CASE("cut transform round trip is exact") {
  RngState rng = make_rng(3, 3);
  for (int i = 0; i < 10; ++i) {
    Cut c;
    c.center = testsup::random_in_box(rng, 3, 2.0);
    c.value = uniform01(rng);
    c.gradient = testsup::random_in_box(rng, 3, 2.0);
    const Vec center = testsup::random_in_box(rng, 3, 2.0);
    const Cut back = to_base_cut(to_surrogate_cut(c, center, 0.7), center, 0.7);
    CHECK(back.value == doctest::Approx(c.value).epsilon(1e-14));
    CHECK((back.gradient - c.gradient).norm() <= 1e-14);
  }
}

TEST_CASE("moreau_residual on |x| matches the hand prox") {
  const ProblemInstance abs = testsup::make_abs_1d();
  // min |x| + (x-2)^2 at x = 1.5; residual = 1 * |2 - 1.5| = 0.5
  const MoreauSolve ms = moreau_solve(abs, vec1(2), 1.0, 1e-12);
  CHECK(ms.residual == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(ms.xhat[0] == doctest::Approx(1.5).epsilon(1e-5));
  // residual at an unconstrained smooth minimizer is ~0
  const ProblemInstance sq = testsup::make_square_1d();
  CHECK(moreau_residual(sq, vec1(0), 1.0, 1e-13) <= 1e-6);
}

TEST_CASE("moreau envelope gradient bound") {
  const ProblemInstance p = make_weakly_convex_max(2, 2, 1.0, 21);
  const double rho = 1.0;
  RngState rng = make_rng(21, 9);
  for (int s = 0; s < 5; ++s) {
    const Vec xb = testsup::random_in_box(rng, 2, 1.5);
    const MoreauSolve ms = moreau_solve(p, xb, rho, 1e-12);
    // ||grad f_2rho||^2 <= 8 rho (f(xbar) - f_2rho(xbar)), checked via the
    // (smaller) rho||xbar-xhat|| residual
    CHECK(ms.residual * ms.residual <=
          8.0 * rho * (p.value(xb) - ms.envelope) + 1e-8);
  }
}

TEST_CASE("ippm terminates immediately from a stationary start") {
  const ProblemInstance p = make_max_of_quadratics(1, 2, 2.0, 2.0, 7);
  const IppmOutcome r = ippm(p, *p.truth().xstar, 1.0, 4, 1e-4);
  CHECK(r.status == RunStatus::kConverged);
  CHECK((r.xbar - *p.truth().xstar).norm() <= 1e-9);
  CHECK(r.outer == 1);
}

TEST_CASE("ippm descent accounting and stationarity of the output") {
  const ProblemInstance p = make_weakly_convex_max(3, 2, 1.0, 33);
  const double rho = *p.truth().rho;
  const double eps = 0.05;
  RngState rng = make_rng(33, 2);
  const Vec x0 = testsup::random_in_box(rng, 2, 1.5);
  const IppmOutcome r = ippm(p, x0, rho, 5, eps);
  REQUIRE(r.status == RunStatus::kConverged);

  // per-step descent >= stored gap / 2, and the gaps telescope
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < r.centers.size(); ++s) {
    const double drop = p.value(r.centers[s]) - p.value(r.centers[s + 1]);
    CHECK(drop >= 0.5 * r.delta_bars[s] - 1e-10);
    total += 0.5 * r.delta_bars[s];
  }
  CHECK(total <= p.value(x0) - p.value(r.centers.back()) + 1e-9);

  // returned center is eps-Moreau stationary
  CHECK(moreau_residual(p, r.xbar, rho, 1e-12) <= eps + 1e-6);
}

TEST_CASE("surrogate same-piece empirical smoothness stays below L + 2 rho") {
  const ProblemInstance p = make_weakly_convex_max(3, 2, 1.0, 55);
  const double rho = *p.truth().rho;
  const double L = *p.truth().L;
  RngState rng = make_rng(55, 1);
  const Vec center = testsup::random_in_box(rng, 2, 1.0);
  const ProxSurrogate P = make_surrogate(p, center, rho);
  int checked = 0;
  for (int s = 0; s < 200 && checked < 60; ++s) {
    const Vec x = testsup::random_in_box(rng, 2, 1.6);
    const Vec y = testsup::random_in_box(rng, 2, 1.6);
    const OracleSample sx = prox_oracle(P, x, 0.0, make_rng(55, 2 * s));
    const OracleSample sy = prox_oracle(P, y, 0.0, make_rng(55, 2 * s + 1));
    if (sx.piece != sy.piece || (x - y).norm() < 1e-8) continue;
    ++checked;
    CHECK(empirical_smoothness(sx, sy, 0.0) <= L + 2.0 * rho + 1e-9);
  }
  CHECK(checked >= 20);
}
