#include "pwsbl/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>

#include "pwsbl/adaptive.hpp"
#include "pwsbl/bundle.hpp"
#include "pwsbl/certify.hpp"
#include "pwsbl/gapred.hpp"
#include "pwsbl/harness.hpp"
#include "pwsbl/problems.hpp"
#include "pwsbl/proximal.hpp"

namespace pwsbl::acceptance {

namespace {

char buf[512];

std::string fmt(const char* f, ...) {
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

Vec offset_start(const ProblemInstance& p, std::uint64_t seed, double spread) {
  RngState rng = make_rng(seed, 0xABCDEF);
  Vec v(p.dim());
  for (int i = 0; i < p.dim(); ++i) v[i] = spread * (2.0 * uniform01(rng) - 1.0);
  Vec base = p.truth().xstar ? *p.truth().xstar : Vec::Zero(p.dim());
  return p.region().project(base + v);
}

// Fine-grid minimum of f over its (2-d box) region with local refinement.
double grid_fmin_2d(const ProblemInstance& p) {
  Vec lo = p.region().lo(), hi = p.region().hi();
  double best = kInf;
  Vec bestx = 0.5 * (lo + hi);
  const int nper = 201;
  for (int level = 0; level < 8; ++level) {
    Vec x(2);
    for (int i = 0; i < nper; ++i) {
      for (int j = 0; j < nper; ++j) {
        x[0] = lo[0] + (hi[0] - lo[0]) * i / (nper - 1.0);
        x[1] = lo[1] + (hi[1] - lo[1]) * j / (nper - 1.0);
        const double v = p.value(x);
        if (v < best) {
          best = v;
          bestx = x;
        }
      }
    }
    const Vec span = 2.5 * (hi - lo) / (nper - 1.0);
    lo = (bestx - span).cwiseMax(p.region().lo());
    hi = (bestx + span).cwiseMin(p.region().hi());
  }
  return best;
}

// --- criterion 1 -----------------------------------------------------------

CriterionResult crit_demo() {
  CriterionResult r{1, "demo comparison vs Polyak", false, ""};
  const ProblemInstance demo = demo_pws();
  Vec x0(2);
  x0 << 1e-4, 1e-2;

  demo.reset_oracle_calls();
  BlOptions bo;
  bo.max_iters = 100;
  bo.stop_tol = -1.0;
  const Trace bl = run_bl(demo, 3, 0.0, x0, bo);
  long bl_calls = -1;
  for (const TraceRecord& rec : bl.records)
    if (rec.dist_to_xstar && *rec.dist_to_xstar <= 1e-8) {
      bl_calls = rec.oracle_calls;
      break;
    }

  demo.reset_oracle_calls();
  harness::PolyakOptions po;
  po.max_iters = 300000;
  const Trace pk = harness::polyak_subgradient(demo, x0, po);
  long pk_calls = -1;
  int flips = 0;
  for (std::size_t i = 0; i < pk.records.size(); ++i) {
    const TraceRecord& rec = pk.records[i];
    if (pk_calls < 0 && rec.dist_to_xstar && *rec.dist_to_xstar <= 1e-8)
      pk_calls = rec.oracle_calls;
    if (i > 0) {
      const double a = pk.records[i - 1].x[0], b2 = rec.x[0];
      if (a != 0 && b2 != 0 && (a > 0) != (b2 > 0)) ++flips;
    }
  }
  const long pk_eff = pk_calls < 0 ? po.max_iters + 1 : pk_calls;
  r.passed = bl_calls > 0 && bl_calls <= 100 && bl_calls < pk_eff && flips >= 10;
  r.detail = fmt("bl %ld calls to 1e-8, polyak %s, %d sign flips", bl_calls,
                 pk_calls < 0 ? "never (within 3e5)" : fmt("%ld calls", pk_calls).c_str(),
                 flips);
  return r;
}

// --- criterion 2 -----------------------------------------------------------

CriterionResult crit_bridged() {
  CriterionResult r{2, "bridged three-point inequality", false, ""};
  double worst_rel = -kInf;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int k = 1 + static_cast<int>(seed % 4);
    const int n = 2 + static_cast<int>(seed % 3);
    const ProblemInstance p = make_max_of_quadratics(k, n, 2.0 + (seed % 3), 1.0, 900 + seed);
    const Vec x0 = offset_start(p, seed, 1.5);
    BlOptions o;
    o.max_iters = 60;
    o.stop_tol = -1.0;
    const Trace t = run_bl(p, k + 2, *p.truth().fstar, x0, o);
    const double d0 = (x0 - *p.truth().xstar).squaredNorm();
    const double v = bridged_three_point_check(t, *p.truth().xstar, 10);
    worst_rel = std::max(worst_rel, v / (1e-8 * d0));
  }
  r.passed = worst_rel <= 1.0;
  r.detail = fmt("max violation = %.2e of the 1e-8*dist0^2 budget", worst_rel);
  return r;
}

// --- criterion 3 -----------------------------------------------------------

CriterionResult crit_contraction() {
  CriterionResult r{3, "matching-pair contraction", false, ""};
  long pairs_checked = 0;
  double worst = -kInf;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const int k = 2 + static_cast<int>(seed % 3);
    const double L = 1.0 + static_cast<double>(seed % 4);
    const ProblemInstance p = make_max_of_quadratics(k, 2 + seed % 2, L, 1.0, 500 + seed);
    const Vec x0 = offset_start(p, seed, 1.5);
    BlOptions o;
    o.max_iters = 70;
    o.stop_tol = -1.0;
    const Trace t = run_bl(p, k + 1, *p.truth().fstar, x0, o);
    const MatchingStats st = detect_matching_pairs(t, k, 0.0);
    const Vec& xs = *p.truth().xstar;
    const double ratio = k * L / (k * L + *p.truth().mu);
    for (auto [l, rr] : st.pairs) {
      ++pairs_checked;
      const double lhs = (t.x(rr) - xs).squaredNorm();
      const double rhs = ratio * (t.x(l) - xs).squaredNorm() + 1e-10;
      worst = std::max(worst, lhs - rhs);
    }
  }
  r.passed = pairs_checked >= 40 && worst <= 0.0;
  r.detail = fmt("%ld pairs, worst slack %.2e", pairs_checked, worst);
  return r;
}

// --- criterion 4 -----------------------------------------------------------

CriterionResult crit_linear_rate() {
  CriterionResult r{4, "linear convergence with detected kappa", false, ""};
  bool ok = true;
  double tightest = kInf;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int k = 2 + static_cast<int>(seed % 3);
    const double L = 1.5 + static_cast<double>(seed % 3);
    const double mu = 1.0;
    const ProblemInstance p = make_max_of_quadratics(k, 2, L, mu, 700 + seed);
    const Vec x0 = offset_start(p, seed, 1.5);
    BlOptions o;
    o.max_iters = 60;
    o.stop_tol = -1.0;
    const Trace t = run_bl(p, k + 1, *p.truth().fstar, x0, o);
    const double d0 = (x0 - *p.truth().xstar).squaredNorm();
    const std::vector<int> labels = t.piece_labels();
    for (long N : {20L, 40L, 60L}) {
      if (N >= t.iterations()) continue;
      const MatchingStats st =
          detect_matching_pairs(std::span<const int>(labels.data(), N + 1), k);
      if (st.p == 0) continue;
      const double kappa = st.sigma_bar * st.kappa_bar * (std::exp(1.0) * L / mu + 1.0);
      const double rhs =
          2.0 * std::exp(1.0) * std::pow(1.0 + 1.0 / kappa, -static_cast<double>(N)) * d0;
      const double lhs = (t.x(N) - *p.truth().xstar).squaredNorm();
      ok = ok && lhs <= rhs;
      if (rhs > 0) tightest = std::min(tightest, rhs / std::max(lhs, 1e-300));
    }
  }
  r.passed = ok;
  r.detail = fmt("bound holds at N in {20,40,60}; smallest headroom factor %.2g", tightest);
  return r;
}

// --- criterion 5 -----------------------------------------------------------

CriterionResult crit_apx_floor() {
  CriterionResult r{5, "apx-BL gap floor under perturbation", false, ""};
  const double delta = 1e-3;
  double worst = -kInf;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int k = 2 + static_cast<int>(seed % 2);
    const double L = 2.0;
    const ProblemInstance p = make_max_of_quadratics(k, 2, L, 1.0, 1100 + seed);
    const double radius = perturbation_radius_for_delta(delta, L);
    BlOptions o;
    o.max_iters = 220;
    o.stop_tol = -1.0;
    o.perturbation_radius = radius;
    o.seed = seed;
    const Trace t = run_bl(p, k + 2, *p.truth().fstar, offset_start(p, seed, 1.2), o);
    const double best_gap = t.best_fx() - *p.truth().fstar;
    worst = std::max(worst, best_gap);
  }
  r.passed = worst <= 10.0 * delta;
  r.detail = fmt("worst plateau gap %.3e vs 10*delta = %.1e", worst, 10 * delta);
  return r;
}

// --- criterion 6 -----------------------------------------------------------

CriterionResult crit_gr_contract() {
  CriterionResult r{6, "Gap Reduction contract (200 calls)", false, ""};
  RngState rng = make_rng(4242, 0);
  int calls = 0, iter_bound_fails = 0;
  double worst_gap_ratio = 0.0, worst_funder = -kInf;
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + static_cast<int>(uniform01(rng) * 4);
    const int n = 1 + static_cast<int>(uniform01(rng) * 4);
    const double mu = 0.5 + uniform01(rng);
    const double L = mu * (1.0 + uniform01(rng));  // mild conditioning
    const ProblemInstance p = make_max_of_quadratics(k, n, L, mu, 2000 + trial);
    const Vec x0 = offset_start(p, trial, 1.2);
    const double f0 = p.value(x0);
    double funder;
    if (trial % 2 == 0) {
      funder = *p.truth().fstar - 2.0 * uniform01(rng) - 1e-3;
    } else {
      const Vec g = p.subgradient(x0);
      funder = f0 - 2.0 * g.squaredNorm() / mu;  // the BL-mu seed bound
    }
    if (!(funder < f0)) continue;
    GROptions go;
    go.seed = 77000 + trial;
    const GRResult res = gap_reduction(mu, x0, f0, funder, k + 2, objective_of(p), go);
    if (res.status != RunStatus::kConverged) continue;
    ++calls;
    worst_gap_ratio =
        std::max(worst_gap_ratio, (res.fbar_plus - res.funder_plus) / (f0 - funder));
    worst_funder = std::max(worst_funder, res.funder_plus - *p.truth().fstar);
    const double bound = res.dp.pairs.empty() ? 0.0 : res.dp.iteration_bound;
    if (static_cast<double>(res.iterations) > bound + (k + 2)) ++iter_bound_fails;
  }
  r.passed = calls >= 190 && worst_gap_ratio <= 2.0 / 3.0 + 1e-12 &&
             worst_funder <= 1e-10 && iter_bound_fails == 0;
  r.detail = fmt("%d calls, worst gap ratio %.15f, worst funder-f* %.2e, %d bound misses",
                 calls, worst_gap_ratio, worst_funder, iter_bound_fails);
  return r;
}

// --- criterion 7 -----------------------------------------------------------

CriterionResult crit_bl_mu() {
  CriterionResult r{7, "BL-mu outer count and certified output", false, ""};
  bool ok = true;
  long worst_excess = -100;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const int k = 1 + static_cast<int>(seed % 4);
    const ProblemInstance p =
        make_max_of_quadratics(k, 2 + seed % 3, 1.0 + (seed % 3), 1.0, 3000 + seed);
    const double eps = 1e-6;
    BlMuOptions o;
    o.seed = seed;
    const BlMuResult res =
        bl_mu(p, offset_start(p, seed, 1.3), *p.truth().mu, k + 2, eps, o);
    if (res.status != RunStatus::kConverged) {
      ok = false;
      continue;
    }
    const long cap =
        static_cast<long>(std::ceil(std::log(res.delta0 / eps) / std::log(1.5))) + 1;
    worst_excess = std::max(worst_excess, res.outer - cap);
    ok = ok && res.outer <= cap && p.value(res.xhat) - *p.truth().fstar <= eps;
  }
  r.passed = ok;
  r.detail = fmt("12 runs, worst outer-count margin %ld below the bound", -worst_excess);
  return r;
}

// --- criterion 8 -----------------------------------------------------------

CriterionResult crit_wgap_props() {
  CriterionResult r{8, "W-gap validation, monotonicity, brute force", false, ""};
  RngState rng = make_rng(808, 0);
  bool ok = true;

  // (a) every emitted certificate validates
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const ProblemInstance p = make_max_of_quadratics(3, 2, 3.0, 1.0, 4000 + seed);
    const Vec xb = offset_start(p, seed, 1.0);
    const double gap = p.value(xb) - *p.truth().fstar;
    if (gap <= 1e-12) continue;
    WcertOptions wo;
    wo.seed = seed;
    const WcertOutcome out = wcert_search(objective_of(p), xb, gap, 4, kInf, wo);
    if (out.returned_false()) {
      ok = false;
      continue;
    }
    const WCertificate& c = *out.cert;
    const double nu_eff = c.iota_unbounded ? 2.0 * c.delta_used / 1e4 : c.nu;
    const double v = validate_certificate(c, p.region(), 1e-10,
                                          c.iota_unbounded ? std::optional<double>(1e4)
                                                           : std::nullopt);
    ok = ok && v <= nu_eff + 1e-8;
  }

  // (b) V_iota monotone over 5 radii
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 2;
    Vec center(n);
    for (int i = 0; i < n; ++i) center[i] = uniform01(rng) - 0.5;
    std::vector<Cut> cuts;
    Cut c0;
    c0.center = center;
    c0.value = uniform01(rng);
    c0.gradient = Vec(n);
    for (int i = 0; i < n; ++i) c0.gradient[i] = 2.0 * uniform01(rng) - 1.0;
    cuts.push_back(c0);
    for (int i = 1; i <= 3; ++i) {
      Cut c = c0;
      for (int j = 0; j < n; ++j) {
        c.center[j] += 0.1 * (2 * uniform01(rng) - 1);
        c.gradient[j] = 2.0 * uniform01(rng) - 1.0;
      }
      c.value = c0.value - 0.2 * uniform01(rng);
      c.birth = i;
      cuts.push_back(c);
    }
    double prev = kInf;
    for (double iota : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const double v = eval_wgap(center, cuts, iota, FeasibleRegion::whole_space(n));
      ok = ok && v <= prev + 1e-8;
      prev = v;
    }
  }

  // (c) dual/primal agreement against a refined grid search
  double worst_dev = 0.0;
  for (int trial = 0; trial < 14; ++trial) {
    const int n = 1 + trial % 2;
    const int m = 2 + static_cast<int>(uniform01(rng) * 4);
    std::vector<Cut> cuts;
    for (int i = 0; i < m; ++i) {
      Cut c;
      c.center = Vec(n);
      c.gradient = Vec(n);
      for (int j = 0; j < n; ++j) {
        c.center[j] = 2 * uniform01(rng) - 1;
        c.gradient[j] = 4 * uniform01(rng) - 2;
      }
      c.value = 2 * uniform01(rng) - 1;
      c.birth = i;
      cuts.push_back(c);
    }
    Vec center = Vec::Zero(n);
    const double radius = 0.5 + uniform01(rng);
    const FeasibleRegion region = (trial % 3 == 0)
                                      ? FeasibleRegion::box(Vec::Constant(n, -1.1),
                                                            Vec::Constant(n, 1.3))
                                      : FeasibleRegion::whole_space(n);
    const MinMaxResult mm = min_max_affine(cuts, region, Ball{center, radius}, 1e-12);

    // refined grid with feasibility pull-back
    Vec lo = Vec::Constant(n, -radius), hi = Vec::Constant(n, radius);
    double best = kInf;
    Vec bestx = center;
    for (int level = 0; level < 9; ++level) {
      const int nper = 61;
      Vec x(n);
      auto consider = [&](Vec xx) {
        xx = region.project(xx);
        const Vec d = xx - center;
        if (d.norm() > radius) xx = center + (radius / d.norm()) * d;
        xx = region.project(xx);
        if ((xx - center).norm() > radius * (1 + 1e-9)) return;
        double v = -kInf;
        for (const Cut& c : cuts) v = std::max(v, c.support(xx));
        if (v < best) {
          best = v;
          bestx = xx;
        }
      };
      if (n == 1) {
        for (int i = 0; i < nper; ++i) {
          x[0] = lo[0] + (hi[0] - lo[0]) * i / (nper - 1.0);
          consider(x);
        }
      } else {
        for (int i = 0; i < nper; ++i)
          for (int j = 0; j < nper; ++j) {
            x[0] = lo[0] + (hi[0] - lo[0]) * i / (nper - 1.0);
            x[1] = lo[1] + (hi[1] - lo[1]) * j / (nper - 1.0);
            consider(x);
          }
      }
      const Vec span = 2.5 * (hi - lo) / (nper - 1.0);
      lo = bestx - span;
      hi = bestx + span;
    }
    worst_dev = std::max(worst_dev, std::abs(mm.midpoint() - best));
  }
  ok = ok && worst_dev <= 1e-6;

  r.passed = ok;
  r.detail = fmt("validation, monotonicity ok; worst grid deviation %.2e", worst_dev);
  return r;
}

// --- criterion 9 -----------------------------------------------------------

CriterionResult crit_cert_soundness() {
  CriterionResult r{9, "certificate gap/distance soundness", false, ""};
  bool ok = true;
  int finite = 0, unbounded = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int k = 2 + static_cast<int>(seed % 3);
    const ProblemInstance p = make_max_of_quadratics(k, 2 + seed % 2, 3.0, 1.0, 5000 + seed);
    const double mu = *p.truth().mu;
    const Vec xb = offset_start(p, seed, 1.0);
    const double gap = p.value(xb) - *p.truth().fstar;
    if (gap <= 1e-10) continue;
    WcertOptions wo;
    wo.seed = seed;
    // alternate strong and weak models: small m keeps the level set
    // nonempty longer, exercising the finite-radius exit
    const int m = (seed % 2 == 0) ? k + 2 : 1 + static_cast<int>(seed % 2);
    const WcertOutcome out = wcert_search(objective_of(p), xb, gap, m, kInf, wo);
    if (out.returned_false()) {
      ok = false;
      continue;
    }
    const WCertificate& c = *out.cert;
    const double bound = certificate_gap_bound(c, mu);
    ok = ok && bound >= gap - 1e-12;
    if (c.iota_unbounded) {
      ++unbounded;
      ok = ok && bound <= 2.0 * gap + 1e-8;
    } else {
      ++finite;
      const double Lt = c.Ltilde.value_or(*p.truth().L);
      ok = ok && bound <= std::max(2.0, 32.0 * Lt / mu) * gap + 1e-8;
      ok = ok && certificate_distance_bound(c, mu) >=
                     (xb - *p.truth().xstar).norm() - 1e-12;
    }
  }
  r.passed = ok && finite + unbounded >= 15;
  r.detail = fmt("%d finite + %d unbounded certificates, all bounds sound", finite, unbounded);
  return r;
}

// --- criterion 10 ----------------------------------------------------------

CriterionResult crit_no_false_negative() {
  CriterionResult r{10, "no False with a valid gap estimate", false, ""};
  RngState rng = make_rng(1010, 0);
  int trials = 0, falses = 0;
  while (trials < 500) {
    const int k = 1 + static_cast<int>(uniform01(rng) * 4);
    const int n = 1 + static_cast<int>(uniform01(rng) * 3);
    const int m = 1 + static_cast<int>(uniform01(rng) * 5);
    const double L = 1.0 + 3.0 * uniform01(rng);
    const ProblemInstance p = make_max_of_quadratics(k, n, L, 1.0, 6000 + trials);
    const Vec xb = offset_start(p, 31 * trials + 7, 1.2);
    const double gap = p.value(xb) - *p.truth().fstar;
    const double Delta = std::max(gap, 1e-9) * (1.0 + uniform01(rng)) + 1e-9;
    WcertOptions wo;
    wo.seed = 90000 + trials;
    const WcertOutcome out = wcert_search(objective_of(p), xb, Delta, m, kInf, wo);
    ++trials;
    if (out.returned_false()) ++falses;
  }
  r.passed = falses == 0;
  r.detail = fmt("%d trials, %d False returns", trials, falses);
  return r;
}

// --- criterion 11 ----------------------------------------------------------

CriterionResult crit_moreau_chain() {
  CriterionResult r{11, "Moreau envelope chain", false, ""};
  bool ok = true;
  RngState rng = make_rng(1111, 0);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const int k = 1 + static_cast<int>(seed % 3);
    const double rho = 0.5 + 0.5 * (seed % 3);
    const ProblemInstance p = make_weakly_convex_max(k, 2, rho, 7000 + seed);
    Vec xb(2);
    xb << 1.6 * uniform01(rng) - 0.8, 1.6 * uniform01(rng) - 0.8;
    const MoreauSolve ms = moreau_solve(p, xb, rho, 1e-12);
    ok = ok && ms.residual * ms.residual <= 8.0 * rho * (p.value(xb) - ms.envelope) + 1e-8;

    // surrogate certificate -> f certificate -> Moreau bound
    const double Delta = std::max(p.value(xb) - ms.envelope, 1e-7) * 1.25;
    const ProxSurrogate P{objective_of(p), xb, rho};
    WcertOptions wo;
    wo.seed = seed;
    const WcertOutcome out =
        wcert_search(prox_objective(P), xb, Delta, k + 2, std::sqrt(Delta / rho), wo);
    if (out.returned_false() || out.cert->iota_unbounded) continue;
    const WCertificate f = transfer_cert_to_f(*out.cert, rho);
    ok = ok && moreau_bound_from_cert(f, rho) >= ms.residual - 1e-9;
  }
  r.passed = ok;
  r.detail = "gradient bound and certificate Moreau bounds hold";
  return r;
}

// --- criterion 12 ----------------------------------------------------------

CriterionResult crit_ippm() {
  CriterionResult r{12, "IPPM outer bound, descent, stationarity", false, ""};
  bool ok = true;
  long worst_outer = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const int k = 2 + static_cast<int>(seed % 2);
    const double rho = 1.0;
    const ProblemInstance p = make_weakly_convex_max(k, 2, rho, 7700 + seed);
    const double fmin = grid_fmin_2d(p);
    const Vec x0 = offset_start(p, seed, 1.5);
    const double eps = 0.08;
    IppmOptions o;
    o.seed = seed;
    const IppmOutcome res = ippm(p, x0, rho, k + 2, eps, o);
    if (res.status != RunStatus::kConverged) {
      ok = false;
      continue;
    }
    const double delta_f = p.value(x0) - fmin;
    const long cap = static_cast<long>(std::ceil(16.0 * rho * delta_f / (eps * eps))) + 1;
    worst_outer = std::max(worst_outer, res.outer);
    ok = ok && res.outer <= cap;
    for (std::size_t s = 0; s + 1 < res.centers.size(); ++s)
      ok = ok && p.value(res.centers[s]) - p.value(res.centers[s + 1]) >=
                     0.5 * res.delta_bars[s] - 1e-10;
    ok = ok && moreau_residual(p, res.xbar, rho, 1e-12) <= eps + 1e-6;
  }
  r.passed = ok;
  r.detail = fmt("6 runs, worst outer count %ld", worst_outer);
  return r;
}

// --- criterion 13 ----------------------------------------------------------

CriterionResult crit_pf_bl() {
  CriterionResult r{13, "pfBL-mu restart counts and accuracy", false, ""};
  bool ok = true;
  long worst_restarts = 0;
  const double eps = 1e-5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int k = 2 + static_cast<int>(seed % 2);
    const ProblemInstance p = make_max_of_quadratics(k, 2, 2.0, 1.0, 8800 + seed);
    const Vec x0 = offset_start(p, seed, 1.2);
    PfBlOptions o;
    o.target_eps = eps;
    o.seed = seed;
    const PfBlOutcome big = pf_bl_mu(p, x0, 64.0 * *p.truth().mu, k + 2, o);
    ok = ok && big.status == RunStatus::kConverged && big.restarts <= 7 &&
         p.value(big.x) - *p.truth().fstar <= eps;
    worst_restarts = std::max(worst_restarts, big.restarts);
    if (seed < 6) {
      const PfBlOutcome low = pf_bl_mu(p, x0, 0.7 * *p.truth().mu, k + 2, o);
      ok = ok && low.status == RunStatus::kConverged && low.restarts == 0 &&
           p.value(low.x) - *p.truth().fstar <= eps;
    }
  }
  r.passed = ok;
  r.detail = fmt("20 seeds at 64x mu: max restarts %ld (<=7); small guesses: 0 restarts",
                 worst_restarts);
  return r;
}

// --- criterion 14 ----------------------------------------------------------

CriterionResult crit_pf_ippm() {
  CriterionResult r{14, "pf-IPPM guess count and certificate", false, ""};
  bool ok = true;
  std::size_t worst_guesses = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const int k = 2 + static_cast<int>(seed % 2);
    const double rho = 1.0 + 0.5 * (seed % 2);
    const ProblemInstance p = make_weakly_convex_max(k, 2, rho, 9900 + seed);
    const Vec x0 = offset_start(p, seed, 1.4);
    const double eps = 0.1;
    PfIppmOptions o;
    o.seed = seed;
    const PfIppmOutcome res = pf_ippm(p, x0, rho / 8.0, k + 2, eps, o);
    if (res.status != RunStatus::kConverged || !res.cert_f) {
      ok = false;
      continue;
    }
    worst_guesses = std::max(worst_guesses, res.guesses.size());
    ok = ok && res.guesses.size() <= 4;
    ok = ok && res.cert_f->iota <= eps && res.cert_f->nu <= eps;
    const double v = validate_certificate(*res.cert_f, p.region(), 1e-10);
    ok = ok && v <= res.cert_f->nu + 1e-8;
  }
  r.passed = ok;
  r.detail = fmt("8 runs from rho/8: max guesses %zu (<=4), certificates validate",
                 worst_guesses);
  return r;
}

// --- criterion 15 ----------------------------------------------------------

CriterionResult crit_smoothness_transfer() {
  CriterionResult r{15, "perturbed-oracle smoothness transfer", false, ""};
  const ProblemInstance p = make_max_of_quadratics(3, 3, 3.0, 1.0, 12345);
  const double L = *p.truth().L;
  const double M = *p.truth().M;
  const double radius = 0.05;
  RngState rng = make_rng(1515, 0);
  long checked = 0;
  double worst = -kInf;
  long draw = 0;
  while (checked < 10000 && draw < 200000) {
    Vec x(3), y(3);
    for (int j = 0; j < 3; ++j) {
      x[j] = 2.0 * (2.0 * uniform01(rng) - 1.0);
      y[j] = 2.0 * (2.0 * uniform01(rng) - 1.0);
    }
    const OracleSample sx = p.evaluate(x, radius, make_rng(15, 2 * draw));
    const OracleSample sy = p.evaluate(y, radius, make_rng(15, 2 * draw + 1));
    ++draw;
    if (sx.piece != sy.piece) continue;
    ++checked;
    const double lhs = sx.fx - sy.cut.support(x);
    const double rhs =
        L * (x - y).squaredNorm() + 2.0 * M * radius + 4.0 * L * radius * radius + 1e-10;
    worst = std::max(worst, lhs - rhs);
  }
  r.passed = checked >= 10000 && worst <= 0.0;
  r.detail = fmt("%ld same-piece pairs, worst slack %.2e", checked, worst);
  return r;
}

// --- criterion 16 ----------------------------------------------------------

CriterionResult crit_initial_bounds() {
  CriterionResult r{16, "initial lower bounds", false, ""};
  bool ok = true;
  double worst_qg = -kInf, worst_sc = -kInf;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int k = 1 + static_cast<int>(seed % 4);
    const double mu = 0.5 + 0.1 * (seed % 5);
    const double L = mu * (1.0 + (seed % 3));
    const ProblemInstance p = make_max_of_quadratics(k, 2 + seed % 3, L, mu, 10000 + seed);
    for (int s = 0; s < 5; ++s) {
      const Vec x0 = offset_start(p, 37 * seed + s, 1.6);
      const double f0 = p.value(x0);
      const double g2 = p.subgradient(x0).squaredNorm();
      // QG bound with modulus mu, and the strong-convexity bound (every
      // piece has curvature >= mu, so f is mu-strongly convex here)
      worst_qg = std::max(worst_qg, (f0 - 2.0 * g2 / mu) - *p.truth().fstar);
      worst_sc = std::max(worst_sc, (f0 - g2 / (2.0 * mu)) - *p.truth().fstar);
    }
  }
  ok = worst_qg <= 1e-10 && worst_sc <= 1e-10;
  r.passed = ok;
  r.detail = fmt("worst QG-bound slack %.2e, worst strong-convexity slack %.2e", worst_qg,
                 worst_sc);
  return r;
}

}  // namespace

std::vector<CriterionResult> run_all(const SuiteOptions& opts) {
  using Fn = std::function<CriterionResult()>;
  const std::vector<Fn> crits = {
      crit_demo,        crit_bridged,       crit_contraction, crit_linear_rate,
      crit_apx_floor,   crit_gr_contract,   crit_bl_mu,       crit_wgap_props,
      crit_cert_soundness, crit_no_false_negative, crit_moreau_chain, crit_ippm,
      crit_pf_bl,       crit_pf_ippm,       crit_smoothness_transfer, crit_initial_bounds};

  std::vector<CriterionResult> out;
  for (std::size_t i = 0; i < crits.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!opts.only.empty() &&
        std::find(opts.only.begin(), opts.only.end(), id) == opts.only.end())
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = crits[i]();
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion " + std::to_string(id);
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opts.on_result) opts.on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace pwsbl::acceptance
