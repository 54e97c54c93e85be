#include <doctest.h>

#include "pwsbl/bundle.hpp"
#include "support.hpp"

using namespace pwsbl;
using testsup::vec1;
using testsup::vec2;

TEST_CASE("Bundle keeps the m most recent cuts") {
  Bundle b(2);
  for (long t = 0; t < 4; ++t) b.push(testsup::make_cut(vec1(t), t, vec1(1), t));
  CHECK(b.size() == 2);
  CHECK(b[0].birth == 2);
  CHECK(b[1].birth == 3);
  CHECK_THROWS_AS(b.push(testsup::make_cut(vec1(0), 0, vec1(1), 1)), std::invalid_argument);
}

TEST_CASE("run_bl on |x| reaches the minimizer in one step") {
  const ProblemInstance abs = testsup::make_abs_1d();
  BlOptions o;
  o.max_iters = 5;
  const Trace t = run_bl(abs, 1, 0.0, vec1(1), o);
  CHECK(t.status == RunStatus::kConverged);
  REQUIRE(t.iterations() >= 2);
  CHECK(t.x(1)[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("run_bl on x^2 halves the iterate each step") {
  const ProblemInstance sq = testsup::make_square_1d();
  BlOptions o;
  o.max_iters = 10;
  o.stop_tol = -1.0;  // run the full budget
  const Trace t = run_bl(sq, 1, 0.0, vec1(1), o);
  REQUIRE(t.iterations() == 11);
  for (long k = 0; k <= 10; ++k)
    CHECK(t.x(k)[0] == doctest::Approx(std::pow(2.0, -static_cast<double>(k))).epsilon(1e-9));
}

TEST_CASE("run_bl flags an empty level set when fstar undershoots") {
  const ProblemInstance abs = testsup::make_abs_1d();
  BlOptions o;
  o.max_iters = 20;
  o.stop_tol = -1.0;
  const Trace t = run_bl(abs, 3, -0.5, vec1(1), o);
  CHECK(t.status == RunStatus::kInfeasibleLevelSet);
  CHECK(t.iterations() >= 1);  // the partial trace is returned
}

TEST_CASE("run_bl on the demo problem outruns 1e-8 distance quickly") {
  const ProblemInstance demo = demo_pws();
  BlOptions o;
  o.max_iters = 100;
  o.stop_tol = -1.0;
  const Trace t = run_bl(demo, 3, 0.0, vec2(1e-4, 1e-2), o);
  double best = kInf;
  for (long k = 0; k < t.iterations(); ++k) best = std::min(best, t.x(k).norm());
  CHECK(best <= 1e-8);
}

TEST_CASE("greedy matching pairs on hand labels") {
  SUBCASE("alternating labels") {
    const std::vector<int> labels = {0, 1, 0, 1, 0};
    const MatchingStats st = detect_matching_pairs(labels, 2);
    REQUIRE(st.p == 2);
    CHECK(st.pairs[0] == std::pair<long, long>(0, 2));
    CHECK(st.pairs[1] == std::pair<long, long>(2, 4));
    CHECK(st.kappa_bar == doctest::Approx(2.0));
    CHECK(st.sigma_bar == doctest::Approx(2.0));
  }
  SUBCASE("constant labels close every step") {
    const std::vector<int> labels(6, 3);
    const MatchingStats st = detect_matching_pairs(labels, 1);
    CHECK(st.p == 5);
    CHECK(st.sigma_bar == doctest::Approx(1.0));
  }
  SUBCASE("pigeonhole: pairs close at least every k+1 steps") {
    RngState rng = make_rng(2, 2);
    const int k = 4;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) labels.push_back(static_cast<int>(uniform01(rng) * k));
    const MatchingStats st = detect_matching_pairs(labels, k);
    REQUIRE(st.p >= 1);
    long prev = 0;
    for (auto [l, r] : st.pairs) {
      CHECK(r - prev <= k + 1);
      CHECK(l >= prev);      // non-overlap
      CHECK(r - l <= k);     // within-distance
      prev = r;
    }
  }
}

TEST_CASE("bridged three-point inequality on bundle-level runs") {
  SUBCASE("hand value on the x^2 trace") {
    const ProblemInstance sq = testsup::make_square_1d();
    BlOptions o;
    o.max_iters = 6;
    o.stop_tol = -1.0;
    const Trace t = run_bl(sq, 1, 0.0, vec1(1), o);
    // t=0, j=2: ||x2||^2 + (1/2)||x2 - x0||^2 = 1/16 + 9/32 = 0.34375 <= 1
    const double lhs =
        t.x(2).squaredNorm() + 0.5 * (t.x(2) - t.x(0)).squaredNorm();
    CHECK(lhs == doctest::Approx(0.34375).epsilon(1e-9));
    CHECK(lhs <= t.x(0).squaredNorm());
  }
  SUBCASE("max violation stays at roundoff level across seeds") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      const ProblemInstance p = make_max_of_quadratics(3, 3, 4.0, 1.0, seed);
      BlOptions o;
      o.max_iters = 60;
      o.stop_tol = -1.0;
      RngState rng = make_rng(seed, 31);
      const Vec x0 = *p.truth().xstar + testsup::random_in_box(rng, 3, 1.5);
      const Trace t = run_bl(p, 4, *p.truth().fstar, x0, o);
      const double d0 = (x0 - *p.truth().xstar).squaredNorm();
      CHECK(bridged_three_point_check(t, *p.truth().xstar, 8) <= 1e-8 * d0);
    }
  }
}

TEST_CASE("non-expansiveness and matching-pair contraction") {
  for (std::uint64_t seed : {4ULL, 9ULL}) {
    const ProblemInstance p = make_max_of_quadratics(3, 2, 3.0, 1.0, seed);
    const int k = *p.truth().k;
    const double L = *p.truth().L, mu = *p.truth().mu;
    BlOptions o;
    o.max_iters = 80;
    o.stop_tol = -1.0;
    RngState rng = make_rng(seed, 77);
    const Vec x0 = *p.truth().xstar + testsup::random_in_box(rng, 2, 1.5);
    const Trace t = run_bl(p, k + 1, *p.truth().fstar, x0, o);
    const Vec& xs = *p.truth().xstar;

    for (long i = 1; i < t.iterations(); ++i) {
      const double dprev = (t.x(i - 1) - xs).norm();
      if (dprev < 1e-7) break;  // at the fp resolution floor of the cuts
      CHECK((t.x(i) - xs).norm() <= dprev * (1.0 + 1e-6) + 1e-9);
    }

    const MatchingStats st = detect_matching_pairs(t, k, 0.0);
    REQUIRE(st.p >= 3);
    const double ratio = k * L / (k * L + mu);
    for (auto [l, r] : st.pairs) {
      CHECK((t.x(r) - xs).squaredNorm() <= ratio * (t.x(l) - xs).squaredNorm() + 1e-10);
      // cut feasibility carryover at the level fstar
      CHECK(t.samples[l].cut.support(t.x(r)) <= *p.truth().fstar + 1e-9);
    }
  }
}

TEST_CASE("matching stats carry the empirical smoothness average") {
  const ProblemInstance p = make_max_of_quadratics(2, 2, 2.0, 1.0, 12);
  BlOptions o;
  o.max_iters = 40;
  o.stop_tol = -1.0;
  const Trace t = run_bl(p, 3, *p.truth().fstar, vec2(1.3, -0.4), o);
  const MatchingStats st = detect_matching_pairs(t, 2, 0.0);
  REQUIRE(st.p >= 1);
  CHECK(st.L_bar <= *p.truth().L + 1e-9);  // same-piece pairs respect the true smoothness
  CHECK(st.L_bar >= 0.0);
}

TEST_CASE("function-value rate under the perturbed oracle") {
  // min_t f(x^t) - fstar <= L sigma kappa / (2N) dist0^2 + delta for the
  // (k, 2L, delta) oracle induced by the perturbation radius.
  const double L = 2.0, delta = 5e-3;
  for (std::uint64_t seed : {2ULL, 5ULL}) {
    const ProblemInstance p = make_max_of_quadratics(3, 2, L, 1.0, 40 + seed);
    BlOptions o;
    o.max_iters = 80;
    o.stop_tol = -1.0;
    o.perturbation_radius = perturbation_radius_for_delta(delta, L);
    o.seed = seed;
    RngState rng = make_rng(seed, 3);
    const Vec x0 = *p.truth().xstar + testsup::random_in_box(rng, 2, 1.2);
    const Trace t = run_bl(p, 5, *p.truth().fstar, x0, o);
    const long N = t.iterations() - 1;
    const MatchingStats st = detect_matching_pairs(t, 3, delta);
    if (st.p == 0) continue;
    double best = kInf;
    for (long i = 1; i <= N; ++i) best = std::min(best, t.fx(i) - *p.truth().fstar);
    const double d0 = (x0 - *p.truth().xstar).squaredNorm();
    const double rhs =
        (2.0 * L) * st.sigma_bar * st.kappa_bar / (2.0 * N) * d0 + delta;
    CHECK(best <= rhs + 1e-12);
  }
}
