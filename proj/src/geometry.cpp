#include "pwsbl/geometry.hpp"

#include <Eigen/Dense>

#include <cassert>
#include <cmath>
#include <numeric>

namespace pwsbl {

// ---------------------------------------------------------------------------
// FeasibleRegion

FeasibleRegion FeasibleRegion::whole_space(int dim) {
  if (dim < 1) throw std::invalid_argument("whole_space: dim must be >= 1");
  FeasibleRegion r;
  r.kind_ = Kind::kWholeSpace;
  r.dim_ = dim;
  return r;
}

FeasibleRegion FeasibleRegion::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.size() == 0)
    throw std::invalid_argument("box: lo/hi dimension mismatch");
  if ((lo.array() > hi.array()).any())
    throw std::invalid_argument("box: requires lo <= hi componentwise");
  FeasibleRegion r;
  r.kind_ = Kind::kBox;
  r.dim_ = static_cast<int>(lo.size());
  r.lo_ = std::move(lo);
  r.hi_ = std::move(hi);
  return r;
}

FeasibleRegion FeasibleRegion::ball(Vec center, double radius) {
  if (center.size() == 0) throw std::invalid_argument("ball: empty center");
  if (!(radius > 0)) throw std::invalid_argument("ball: radius must be > 0");
  FeasibleRegion r;
  r.kind_ = Kind::kBall;
  r.dim_ = static_cast<int>(center.size());
  r.center_ = std::move(center);
  r.radius_ = radius;
  return r;
}

bool FeasibleRegion::contains(const Vec& x, double tol) const {
  if (x.size() != dim_) return false;
  switch (kind_) {
    case Kind::kWholeSpace:
      return true;
    case Kind::kBox:
      return (x.array() >= lo_.array() - tol).all() && (x.array() <= hi_.array() + tol).all();
    case Kind::kBall:
      return (x - center_).norm() <= radius_ + tol;
  }
  return false;
}

Vec FeasibleRegion::project(const Vec& y) const {
  switch (kind_) {
    case Kind::kWholeSpace:
      return y;
    case Kind::kBox:
      return y.cwiseMax(lo_).cwiseMin(hi_);
    case Kind::kBall: {
      const Vec d = y - center_;
      const double nrm = d.norm();
      if (nrm <= radius_) return y;
      return center_ + (radius_ / nrm) * d;
    }
  }
  return y;
}

Vec project_region(const FeasibleRegion& region, const Vec& y) { return region.project(y); }

// ---------------------------------------------------------------------------
// Cut matrix helpers.  Constraints are written support_i(x) = a_i + <g_i, x>.

namespace {

struct AffineCuts {
  Eigen::MatrixXd G;  // m x n, rows are gradients
  Vec a;              // absolute offsets: a_i = value_i - <g_i, center_i>
  double gscale = 1.0;
  double ascale = 1.0;
};

AffineCuts make_affine(std::span<const Cut> cuts) {
  if (cuts.empty()) throw std::invalid_argument("cuts must be nonempty");
  const int m = static_cast<int>(cuts.size());
  const int n = static_cast<int>(cuts[0].center.size());
  AffineCuts ac;
  ac.G.resize(m, n);
  ac.a.resize(m);
  for (int i = 0; i < m; ++i) {
    if (cuts[i].gradient.size() != n || cuts[i].center.size() != n)
      throw std::invalid_argument("cuts have inconsistent dimensions");
    ac.G.row(i) = cuts[i].gradient.transpose();
    ac.a[i] = cuts[i].value - cuts[i].gradient.dot(cuts[i].center);
    ac.gscale = std::max(ac.gscale, cuts[i].gradient.norm());
    ac.ascale = std::max(ac.ascale, std::abs(cuts[i].value));
  }
  return ac;
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear minimization over region (optionally intersected with a ball).

namespace detail {

namespace {

// Solution of min <g,x> + w||x - c||^2 over a simple region, as a function
// of the penalty w; distance of the solution to c is nonincreasing in w.
Vec penalized_point(const Vec& g, const FeasibleRegion& region, const Vec& c, double w) {
  return region.project(c - g / (2.0 * w));
}

}  // namespace

LinMin linear_min(const Vec& g, const FeasibleRegion& region, const std::optional<Ball>& cap) {
  LinMin out;
  const double gn = g.norm();

  if (!cap.has_value()) {
    switch (region.kind()) {
      case FeasibleRegion::Kind::kWholeSpace:
        if (gn == 0.0) {
          out.x = Vec::Zero(region.dim());
          out.value = 0.0;
          return out;
        }
        out.bounded = false;
        out.value = -kInf;
        out.x = Vec::Zero(region.dim());
        return out;
      case FeasibleRegion::Kind::kBox: {
        Vec x(region.dim());
        for (int j = 0; j < region.dim(); ++j) {
          if (g[j] > 0)
            x[j] = region.lo()[j];
          else if (g[j] < 0)
            x[j] = region.hi()[j];
          else
            x[j] = 0.5 * (region.lo()[j] + region.hi()[j]);
        }
        out.x = std::move(x);
        out.value = g.dot(out.x);
        return out;
      }
      case FeasibleRegion::Kind::kBall: {
        if (gn == 0.0) {
          out.x = region.center();
          out.value = 0.0;
          return out;
        }
        out.x = region.center() - (region.radius() / gn) * g;
        out.value = g.dot(out.x);
        return out;
      }
    }
  }

  const Vec& c = cap->center;
  const double r = cap->radius;

  if (gn == 0.0) {
    out.x = region.project(c);
    out.value = 0.0;
    return out;
  }

  if (region.kind() == FeasibleRegion::Kind::kWholeSpace) {
    out.x = c - (r / gn) * g;
    out.value = g.dot(out.x);
    return out;
  }

  // Region with closed-form projection, intersected with B(c; r): the
  // penalized solution path x(w) = proj(c - g/2w) has ||x(w)-c|| monotone
  // nonincreasing, so the active-cap multiplier is found by bisection.
  const Vec x0 = penalized_point(g, region, c, 1e-14 * std::max(1.0, gn) / std::max(1.0, r));
  if ((x0 - c).norm() <= r) {
    out.x = x0;
    out.value = g.dot(x0) - gn * r * 1e-12;
    return out;
  }
  double wlo = 1e-14 * std::max(1.0, gn) / std::max(1.0, r);
  double whi = wlo;
  Vec xhi;
  for (int it = 0; it < 200; ++it) {
    whi *= 4.0;
    xhi = penalized_point(g, region, c, whi);
    if ((xhi - c).norm() <= r) break;
  }
  Vec xfeas = xhi;
  for (int it = 0; it < 120; ++it) {
    const double w = std::sqrt(wlo * whi);
    const Vec x = penalized_point(g, region, c, w);
    if ((x - c).norm() <= r) {
      whi = w;
      xfeas = x;
    } else {
      wlo = w;
    }
  }
  out.x = xfeas;
  out.value = g.dot(xfeas) - gn * r * 1e-12;  // safety margin keeps the bound one-sided
  return out;
}

// min ||G^T lambda|| over the simplex via pairwise Frank-Wolfe with exact
// steps, plus an equality-KKT polish on the active support.
double min_convex_combination_norm(const Eigen::MatrixXd& G, Vec* lambda_out) {
  const int m = static_cast<int>(G.rows());
  Vec lam = Vec::Constant(m, 1.0 / m);
  Vec gl = G.transpose() * lam;
  const double gscale = std::max(1.0, G.rowwise().norm().maxCoeff());

  auto polish = [&](Vec& cand) -> bool {
    std::vector<int> act;
    for (int i = 0; i < m; ++i)
      if (cand[i] > 1e-12) act.push_back(i);
    if (act.empty()) return false;
    const int k = static_cast<int>(act.size());
    Eigen::MatrixXd K(k + 1, k + 1);
    Vec rhs = Vec::Zero(k + 1);
    for (int p = 0; p < k; ++p)
      for (int q = 0; q < k; ++q) K(p, q) = G.row(act[p]).dot(G.row(act[q]));
    K.block(0, k, k, 1).setOnes();
    K.block(k, 0, 1, k).setOnes();
    K(k, k) = 0.0;
    rhs[k] = 1.0;
    Vec sol = K.colPivHouseholderQr().solve(rhs);
    Vec lam2 = Vec::Zero(m);
    double mn = 0.0;
    for (int p = 0; p < k; ++p) mn = std::min(mn, sol[p]);
    if (mn < -1e-10) return false;
    for (int p = 0; p < k; ++p) lam2[act[p]] = std::max(0.0, sol[p]);
    const double tot = lam2.sum();
    if (tot <= 0) return false;
    lam2 /= tot;
    if ((G.transpose() * lam2).squaredNorm() <= gl.squaredNorm()) {
      cand = lam2;
      return true;
    }
    return false;
  };

  for (int it = 0; it < 4000; ++it) {
    const Vec w = G * gl;  // w_i = <g_i, G^T lam>
    int j = 0, aidx = -1;
    double wmin = kInf, wmax = -kInf;
    for (int i = 0; i < m; ++i) {
      if (w[i] < wmin) {
        wmin = w[i];
        j = i;
      }
      if (lam[i] > 1e-15 && w[i] > wmax) {
        wmax = w[i];
        aidx = i;
      }
    }
    const double fwgap = gl.squaredNorm() - wmin;  // <gl,gl> - min_i <g_i,gl>
    if (fwgap <= 1e-24 * gscale * gscale || aidx < 0) break;
    const Vec dir = (G.row(j) - G.row(aidx)).transpose();
    const double dd = dir.squaredNorm();
    if (dd <= 0) break;
    double gamma = -gl.dot(dir) / dd;
    gamma = std::clamp(gamma, 0.0, lam[aidx]);
    if (gamma <= 0) break;
    lam[j] += gamma;
    lam[aidx] -= gamma;
    gl += gamma * dir;
    if ((it + 1) % 16 == 0 && polish(lam)) gl = G.transpose() * lam;
  }
  polish(lam);
  gl = G.transpose() * lam;
  if (lambda_out) *lambda_out = lam;
  return gl.norm();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Certified minimax over a bounded region (region itself bounded, or capped).

namespace {

struct DualEval {
  double dual = -kInf;
  double primal = kInf;
  Vec x;
  Vec s;  // support values at x
};

DualEval eval_dual(const AffineCuts& ac, const Vec& lam, const FeasibleRegion& region,
                   const std::optional<Ball>& cap) {
  DualEval ev;
  const Vec g = ac.G.transpose() * lam;
  const detail::LinMin lm = detail::linear_min(g, region, cap);
  ev.x = lm.x;
  ev.s = ac.a + ac.G * lm.x;
  ev.dual = ac.a.dot(lam) + lm.value;
  ev.primal = ev.s.maxCoeff();
  return ev;
}

// Attempts to solve the minimax KKT system exactly on a guessed active set.
// Returns proposed (lambda, x); the caller re-certifies both sides.
struct MinimaxPolish {
  bool ok = false;
  Vec lam;
  Vec x;
};

MinimaxPolish polish_minimax(const AffineCuts& ac, const FeasibleRegion& region,
                             const std::optional<Ball>& cap, std::vector<int> act,
                             const Vec& x_guess, bool interior_only = false) {
  MinimaxPolish out;
  const int m = static_cast<int>(ac.G.rows());
  const int n = static_cast<int>(ac.G.cols());
  if (act.empty()) return out;
  const int k = static_cast<int>(act.size());

  // Box faces believed active.
  std::vector<int> freeIdx, fixIdx;
  Vec xfix;
  if (region.kind() == FeasibleRegion::Kind::kBox) {
    std::vector<double> fv;
    for (int j = 0; j < n; ++j) {
      const double span = 1.0 + std::abs(region.hi()[j]) + std::abs(region.lo()[j]);
      if (x_guess[j] <= region.lo()[j] + 1e-9 * span)
        fixIdx.push_back(j), fv.push_back(region.lo()[j]);
      else if (x_guess[j] >= region.hi()[j] - 1e-9 * span)
        fixIdx.push_back(j), fv.push_back(region.hi()[j]);
      else
        freeIdx.push_back(j);
    }
    xfix = Eigen::Map<Vec>(fv.data(), static_cast<long>(fv.size()));
  } else {
    for (int j = 0; j < n; ++j) freeIdx.push_back(j);
  }
  const int nf = static_cast<int>(freeIdx.size());

  // At most one active sphere (the cap, or a ball region) is handled.
  const Vec* sc = nullptr;
  double sr = 0.0;
  bool sphere_active = false;
  if (cap.has_value() && (x_guess - cap->center).norm() >= cap->radius * (1.0 - 1e-7)) {
    sc = &cap->center;
    sr = cap->radius;
    sphere_active = true;
  }
  if (region.kind() == FeasibleRegion::Kind::kBall &&
      (x_guess - region.center()).norm() >= region.radius() * (1.0 - 1e-7)) {
    if (sphere_active) return out;  // two active spheres: leave to the iterative path
    sc = &region.center();
    sr = region.radius();
    sphere_active = true;
  }
  if (interior_only && sphere_active) return out;

  // Linear system in (x_free, s, lambda_act) for a fixed sphere multiplier.
  auto solve_beta = [&](double beta, Vec* lam_o, Vec* x_o) -> bool {
    const int dim = nf + 1 + k;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
    Vec rhs = Vec::Zero(dim);
    for (int p = 0; p < k; ++p) {
      const int i = act[p];
      for (int jf = 0; jf < nf; ++jf) M(p, jf) = ac.G(i, freeIdx[jf]);
      M(p, nf) = -1.0;
      double r = -ac.a[i];
      for (size_t q = 0; q < fixIdx.size(); ++q) r -= ac.G(i, fixIdx[q]) * xfix[q];
      rhs[p] = r;
    }
    for (int jf = 0; jf < nf; ++jf) {
      const int row = k + jf;
      M(row, jf) = beta;
      for (int p = 0; p < k; ++p) M(row, nf + 1 + p) = ac.G(act[p], freeIdx[jf]);
      rhs[row] = sphere_active ? beta * (*sc)[freeIdx[jf]] : 0.0;
    }
    M.row(k + nf).segment(nf + 1, k).setOnes();
    rhs[k + nf] = 1.0;
    const Vec sol = M.colPivHouseholderQr().solve(rhs);
    if (!sol.allFinite()) return false;
    if ((M * sol - rhs).norm() > 1e-7 * (1.0 + rhs.norm())) return false;
    Vec x = x_guess;
    for (int jf = 0; jf < nf; ++jf) x[freeIdx[jf]] = sol[jf];
    for (size_t q = 0; q < fixIdx.size(); ++q) x[fixIdx[q]] = xfix[q];
    Vec lam = Vec::Zero(m);
    for (int p = 0; p < k; ++p) lam[act[p]] = sol[nf + 1 + p];
    if (lam.minCoeff() < -1e-7) return false;
    *lam_o = lam.cwiseMax(0.0);
    const double tot = lam_o->sum();
    if (tot <= 0) return false;
    *lam_o /= tot;
    *x_o = x;
    return true;
  };

  Vec lam, x;
  if (!sphere_active) {
    if (!solve_beta(0.0, &lam, &x)) return out;
  } else {
    double blo = 1e-12 * ac.gscale / std::max(sr, 1e-12), bhi = blo;
    Vec lam_hi, x_hi;
    bool found = false;
    for (int it = 0; it < 60; ++it) {
      if (solve_beta(bhi, &lam_hi, &x_hi) && (x_hi - *sc).norm() <= sr) {
        found = true;
        break;
      }
      bhi *= 8.0;
    }
    if (!found) return out;
    lam = lam_hi;
    x = x_hi;
    for (int it = 0; it < 70; ++it) {
      const double b = std::sqrt(blo * bhi);
      Vec lam_b, x_b;
      if (solve_beta(b, &lam_b, &x_b) && (x_b - *sc).norm() <= sr) {
        bhi = b;
        lam = lam_b;
        x = x_b;
      } else {
        blo = b;
      }
    }
  }

  out.ok = true;
  out.lam = lam;
  out.x = x;
  return out;
}

// Euclidean projection onto the probability simplex.
Vec project_simplex(const Vec& v) {
  const int m = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + m);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cssv = 0.0, theta = 0.0;
  for (int i = 0; i < m; ++i) {
    cssv += u[i];
    const double t = (cssv - 1.0) / (i + 1);
    if (u[i] - t > 0) theta = t;
  }
  Vec out(m);
  for (int i = 0; i < m; ++i) out[i] = std::max(0.0, v[i] - theta);
  return out;
}

MinMaxResult solve_capped_minimax(const AffineCuts& ac, const FeasibleRegion& region,
                                  const std::optional<Ball>& cap, double tol,
                                  const MinMaxBudget& budget) {
  assert(region.bounded() || cap.has_value());
  const int m = static_cast<int>(ac.G.rows());
  const int n = static_cast<int>(ac.G.cols());

  MinMaxResult best;
  best.lambda = Vec::Constant(m, 1.0 / m);

  auto record = [&](const Vec& l, const DualEval& ev) {
    if (ev.dual > best.value) {
      best.value = ev.dual;
      best.lambda = l;
    }
    if (ev.primal < best.primal_value) {
      best.primal_value = ev.primal;
      best.minimizer = ev.x;
    }
    best.gap = best.primal_value - best.value;
  };

  record(best.lambda, eval_dual(ac, best.lambda, region, cap));

  auto certified = [&]() {
    const double scale = 1.0 + std::abs(best.primal_value) + ac.ascale;
    return best.gap <= tol * scale;
  };

  // Proposes (lambda, x) from an explicit active set and re-certifies both
  // sides through exact evaluations; wrong guesses are harmless.
  auto try_polish = [&](const std::vector<int>& act, const Vec& x_guess,
                        bool interior_only = false) {
    const MinimaxPolish pol = polish_minimax(ac, region, cap, act, x_guess, interior_only);
    if (!pol.ok) return;
    record(pol.lam, eval_dual(ac, pol.lam, region, cap));
    Vec xp = region.project(pol.x);
    if (cap.has_value()) {
      const Vec d = xp - cap->center;
      const double nd = d.norm();
      if (nd > cap->radius) xp = cap->center + (cap->radius / nd) * d;
      xp = region.project(xp);
      if ((xp - cap->center).norm() > cap->radius * (1 + 1e-9)) return;
    }
    DualEval pe;
    pe.dual = -kInf;
    pe.primal = (ac.a + ac.G * xp).maxCoeff();
    pe.x = xp;
    record(pol.lam, pe);
  };

  // Active-set candidates around a point: the near-max supports plus the
  // top-k support sets for growing k.
  auto polish_candidates = [&](const Vec& lam, const Vec& x) {
    if (certified()) return;
    const Vec s = ac.a + ac.G * x;
    const double sscale = 1.0 + s.cwiseAbs().maxCoeff();
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) { return s[i] > s[j]; });

    std::vector<int> act;
    for (int i = 0; i < m; ++i)
      if (lam[i] > 1e-8 || s[i] >= s[order[0]] - 1e-7 * sscale) act.push_back(i);
    try_polish(act, x);

    const int kmax = std::min({m, n + 2, 8});
    for (int k = 1; k <= kmax && !certified(); ++k)
      try_polish(std::vector<int>(order.begin(), order.begin() + k), x);
  };

  if (m == 1) {
    if (!certified()) polish_candidates(best.lambda, best.minimizer);
    return best;
  }

  // Smoothed dual ascent: adding tau/2 ||x - anchor||^2 to the inner
  // minimization makes the dual differentiable, and the cap ball enters
  // through one extra multiplier beta so the inner solution keeps a closed
  // form x = proj_region((tau anchor + 2 beta c - G^T lambda)/(tau + 2 beta)).
  const Vec anchor = cap.has_value()
                         ? region.project(cap->center)
                         : (region.kind() == FeasibleRegion::Kind::kBall
                                ? region.center()
                                : Vec(0.5 * (region.lo() + region.hi())));
  const double span = cap.has_value()
                          ? cap->radius
                          : (region.kind() == FeasibleRegion::Kind::kBall
                                 ? region.radius()
                                 : 0.5 * (region.hi() - region.lo()).norm());
  const double tau0 = std::max(1e-12, ac.gscale / std::max(span, 1e-12));

  Vec lam = best.lambda;
  double beta = 0.0;

  double tau_floor = tau0;
  for (int r = 1; r < budget.stage_rungs; ++r) tau_floor *= 1e-2;
  for (double tau = tau0; tau >= tau_floor * (1 - 1e-9) && !certified(); tau *= 1e-2) {
    auto smooth_eval = [&](const Vec& l, double b, Vec* xout) {
      const Vec g = ac.G.transpose() * l;
      Vec target;
      double denom;
      if (cap.has_value()) {
        denom = tau + 2.0 * b;
        target = (tau * anchor + 2.0 * b * cap->center - g) / denom;
      } else {
        denom = tau;
        target = (tau * anchor - g) / denom;
      }
      const Vec x = region.project(target);
      double val = ac.a.dot(l) + g.dot(x) + 0.5 * tau * (x - anchor).squaredNorm();
      if (cap.has_value())
        val += b * ((x - cap->center).squaredNorm() - cap->radius * cap->radius);
      if (xout) *xout = x;
      return val;
    };

    // The smooth inner points pass close to the true minimizer while tau is
    // moderate; track the best of them as a primal candidate (and polish
    // seed), since the dual-certificate evaluations alone never produce one.
    auto record_primal = [&](const Vec& xs) {
      Vec xf = region.project(xs);
      if (cap.has_value()) {
        const Vec d = xf - cap->center;
        const double nd = d.norm();
        if (nd > cap->radius) xf = cap->center + (cap->radius / nd) * d;
        xf = region.project(xf);
        if ((xf - cap->center).norm() > cap->radius * (1 + 1e-9)) return;
      }
      DualEval pe;
      pe.dual = -kInf;
      pe.primal = (ac.a + ac.G * xf).maxCoeff();
      pe.x = xf;
      record(lam, pe);
    };

    double step = 1.0 / (1.0 + ac.gscale * ac.gscale / tau);
    Vec x;
    double D = smooth_eval(lam, beta, &x);
    for (int it = 0; it < budget.stage_iters; ++it) {
      const Vec grad_l = ac.a + ac.G * x;
      const double grad_b =
          cap.has_value() ? (x - cap->center).squaredNorm() - cap->radius * cap->radius : 0.0;
      bool advanced = false;
      for (int bt = 0; bt < 60; ++bt) {
        Vec lam_t = project_simplex(lam + step * grad_l);
        double beta_t = cap.has_value() ? std::max(0.0, beta + step * grad_b) : 0.0;
        Vec x_t;
        const double D_t = smooth_eval(lam_t, beta_t, &x_t);
        if (D_t > D + 1e-18 * std::abs(D)) {
          lam = std::move(lam_t);
          beta = beta_t;
          x = std::move(x_t);
          D = D_t;
          step *= 1.6;
          advanced = true;
          break;
        }
        step *= 0.5;
      }
      if (!advanced) break;
      if ((it + 1) % 10 == 0) record_primal(x);
      if ((it + 1) % 50 == 0) {
        record(lam, eval_dual(ac, lam, region, cap));
        if (certified()) break;
      }
    }
    record_primal(x);
    record(lam, eval_dual(ac, lam, region, cap));
    polish_candidates(lam, x);
    polish_candidates(best.lambda, best.minimizer);
  }

  // Exhaustive active-set sweep for small bundles: decisive on degenerate
  // (near-parallel cut) geometries where first-order ascent crawls.
  if (!certified() && m <= 10) {
    for (int mask = 1; mask < (1 << m) && !certified(); ++mask) {
      std::vector<int> act;
      for (int i = 0; i < m; ++i)
        if (mask & (1 << i)) act.push_back(i);
      try_polish(act, best.minimizer, /*interior_only=*/true);
    }
  }

  // Fallback: Polyak-step supergradient ascent on the exact dual; it cannot
  // jam on the kinks, and the polish snaps the endgame.
  if (!certified()) {
    DualEval ev = eval_dual(ac, lam, region, cap);
    record(lam, ev);
    for (int it = 0; it < budget.polyak_iters && !certified(); ++it) {
      const Vec sg = ev.s;  // supergradient of the dual at lam
      const Vec dir = sg - Vec::Constant(m, sg.dot(lam));
      const double dn2 = dir.squaredNorm();
      if (dn2 <= 0) break;
      const double step = (best.primal_value - ev.dual + 1e-16) / dn2;
      lam = project_simplex(lam + step * dir);
      ev = eval_dual(ac, lam, region, cap);
      record(lam, ev);
      if ((it + 1) % 25 == 0) polish_candidates(best.lambda, best.minimizer);
    }
    polish_candidates(best.lambda, best.minimizer);
  }
  return best;
}

}  // namespace

MinMaxResult min_max_affine(std::span<const Cut> cuts, const FeasibleRegion& region,
                            const std::optional<Ball>& cap, double tol,
                            const MinMaxBudget& budget) {
  const AffineCuts ac = make_affine(cuts);

  if (cap.has_value()) {
    if ((region.project(cap->center) - cap->center).norm() > cap->radius * (1 + 1e-9) + 1e-300)
      throw std::invalid_argument("min_max_affine: cap ball does not meet the region");
    MinMaxResult res = solve_capped_minimax(ac, region, cap, tol, budget);
    const double scale = 1.0 + std::abs(res.primal_value) + ac.ascale;
    if (res.gap > 1e4 * tol * scale)
      throw SolverError("min_max_affine: no certificate within budget", res.gap);
    return res;
  }

  if (region.bounded()) {
    MinMaxResult res = solve_capped_minimax(ac, region, std::nullopt, tol, budget);
    const double scale = 1.0 + std::abs(res.primal_value) + ac.ascale;
    if (res.gap > 1e4 * tol * scale)
      throw SolverError("min_max_affine: no certificate within budget", res.gap);
    return res;
  }

  // Whole space.  Unbounded below iff 0 is not in conv{gradients}.
  Vec lam_norm;
  const double w = detail::min_convex_combination_norm(ac.G, &lam_norm);
  if (w > std::max(tol, 1e-10) * std::max(1.0, ac.gscale)) {
    MinMaxResult res;
    res.bounded = false;
    res.lambda = lam_norm;
    return res;
  }

  // Bounded below: solve over a growing anchor ball until the aggregated
  // gradient of the dual certificate is dust.  A multiplier with
  // ||G^T lambda|| = eta bounds the model from below by lambda^T a - eta
  // ||x|| at every x, so lambda^T a minus a coverage margin is a sound
  // lower bound for minimizers within the stated coverage radius; a value
  // is only returned once that margin is negligible at the value scale.
  Vec anchor = Vec::Zero(region.dim());
  double spread = 1.0;
  for (const Cut& c : cuts) anchor += c.center;
  anchor /= static_cast<double>(cuts.size());
  for (const Cut& c : cuts) spread = std::max(spread, (c.center - anchor).norm());
  double radius = 8.0 * spread;
  const double radius_cap = 1e12 * spread;

  for (int round = 0; round < budget.max_rounds; ++round) {
    MinMaxResult res = solve_capped_minimax(ac, region, Ball{anchor, radius}, tol, budget);
    const double eta = (ac.G.transpose() * res.lambda).norm();
    const double coverage = 10.0 * (1.0 + anchor.norm() + radius);
    const double margin = eta * coverage;
    const double scale = 1.0 + std::abs(res.primal_value) + ac.ascale;
    if (margin <= std::max(1e-9, 10.0 * tol) * scale) {
      res.value = ac.a.dot(res.lambda) - margin;
      res.gap = res.primal_value - res.value;
      return res;
    }
    radius *= 8.0;
    if (radius > radius_cap) break;
  }
  MinMaxResult ub;
  ub.bounded = false;
  ub.lambda = lam_norm;
  return ub;
}

// ---------------------------------------------------------------------------
// Level-set projection.

namespace {

struct ProjectionPolish {
  bool ok = false;
  Vec x;
  Vec lam;
  double residual = kInf;
};

double projection_residual(const Vec& x, const Vec& lam, const Eigen::MatrixXd& G, const Vec& b,
                           double scale, const Vec& y) {
  const Vec r = G * x - b;
  double viol = 0.0, comp = 0.0;
  for (int i = 0; i < r.size(); ++i) {
    viol = std::max(viol, r[i]);
    // complementarity in min form: robust when active multipliers are huge
    comp = std::max(comp, std::min(lam[i], std::abs(r[i])));
  }
  // scale includes the step length: far projections along near-degenerate
  // directions are judged by relative feasibility
  return (std::max(viol, 0.0) + comp) / (scale + (x - y).norm());
}

// Equality-KKT solve on a guessed active set, with sign-driven updates.
ProjectionPolish polish_projection(const Vec& y, const Eigen::MatrixXd& G, const Vec& b,
                                   const FeasibleRegion& region, const Vec& lam_guess,
                                   const Vec& x_guess, double scale) {
  ProjectionPolish out;
  const int m = static_cast<int>(G.rows());
  const int n = static_cast<int>(G.cols());

  std::vector<int> act;
  for (int i = 0; i < m; ++i) {
    const double ri = G.row(i).dot(x_guess) - b[i];
    if (lam_guess[i] > 1e-11 || ri > -1e-7 * scale) act.push_back(i);
  }

  std::vector<int> freeIdx, fixIdx;
  Vec xfix;
  if (region.kind() == FeasibleRegion::Kind::kBox) {
    std::vector<double> fv;
    for (int j = 0; j < n; ++j) {
      const double span = 1.0 + std::abs(region.hi()[j]) + std::abs(region.lo()[j]);
      if (x_guess[j] <= region.lo()[j] + 1e-9 * span)
        fixIdx.push_back(j), fv.push_back(region.lo()[j]);
      else if (x_guess[j] >= region.hi()[j] - 1e-9 * span)
        fixIdx.push_back(j), fv.push_back(region.hi()[j]);
      else
        freeIdx.push_back(j);
    }
    xfix = Eigen::Map<Vec>(fv.data(), static_cast<long>(fv.size()));
  } else {
    for (int j = 0; j < n; ++j) freeIdx.push_back(j);
  }
  const int nf = static_cast<int>(freeIdx.size());

  const bool ball_region = region.kind() == FeasibleRegion::Kind::kBall;
  const bool sphere_active =
      ball_region && (x_guess - region.center()).norm() >= region.radius() * (1.0 - 1e-7);

  // x(beta) = (y_free + beta*c - G_A^T lam)/(1+beta) on the free coordinates.
  auto solve_active = [&](const std::vector<int>& A, double beta, Vec* x_o, Vec* lam_o) -> bool {
    const int k = static_cast<int>(A.size());
    Vec x = x_guess;
    for (size_t q = 0; q < fixIdx.size(); ++q) x[fixIdx[q]] = xfix[q];
    Vec lam = Vec::Zero(m);
    if (k > 0) {
      Eigen::MatrixXd Gf(k, nf);
      for (int p = 0; p < k; ++p)
        for (int jf = 0; jf < nf; ++jf) Gf(p, jf) = G(A[p], freeIdx[jf]);
      Vec rhs(k);
      for (int p = 0; p < k; ++p) {
        double r = -(1.0 + beta) * b[A[p]];
        for (int jf = 0; jf < nf; ++jf) {
          double base = y[freeIdx[jf]];
          if (sphere_active) base += beta * region.center()[freeIdx[jf]];
          r += G(A[p], freeIdx[jf]) * base;
        }
        for (size_t q = 0; q < fixIdx.size(); ++q)
          r += (1.0 + beta) * G(A[p], fixIdx[q]) * xfix[q];
        rhs[p] = r;
      }
      Eigen::MatrixXd K = Gf * Gf.transpose();
      const auto kd = K.ldlt();
      Vec lamA = kd.solve(rhs);
      if (!lamA.allFinite()) return false;
      for (int ref = 0; ref < 2; ++ref) lamA += kd.solve(rhs - K * lamA);
      if ((K * lamA - rhs).norm() > 1e-6 * (1.0 + rhs.norm())) return false;
      for (int p = 0; p < k; ++p) lam[A[p]] = lamA[p];
      Vec shift = Vec::Zero(nf);
      for (int p = 0; p < k; ++p) shift += lamA[p] * Gf.row(p).transpose();
      for (int jf = 0; jf < nf; ++jf) {
        double base = y[freeIdx[jf]];
        if (sphere_active) base += beta * region.center()[freeIdx[jf]];
        x[freeIdx[jf]] = (base - shift[jf]) / (1.0 + beta);
      }
    } else {
      for (int jf = 0; jf < nf; ++jf) {
        double base = y[freeIdx[jf]];
        if (sphere_active) base += beta * region.center()[freeIdx[jf]];
        x[freeIdx[jf]] = base / (1.0 + beta);
      }
    }
    *x_o = x;
    *lam_o = lam;
    return true;
  };

  auto attempt = [&](double beta) -> bool {
    std::vector<int> A = act;
    for (int pass = 0; pass < 3 * m + 3; ++pass) {
      Vec x, lam;
      if (!solve_active(A, beta, &x, &lam)) return false;
      // Drop the most negative multiplier, if any.
      int worst = -1;
      double wv = -1e-9;
      for (int i : A)
        if (lam[i] < wv) {
          wv = lam[i];
          worst = i;
        }
      if (worst >= 0) {
        A.erase(std::find(A.begin(), A.end(), worst));
        continue;
      }
      // Add the most violated constraint, if any.
      const Vec r = G * x - b;
      int vi = -1;
      double vv = 1e-11 * scale;
      for (int i = 0; i < m; ++i) {
        if (std::find(A.begin(), A.end(), i) == A.end() && r[i] > vv) {
          vv = r[i];
          vi = i;
        }
      }
      if (vi >= 0) {
        A.push_back(vi);
        continue;
      }
      if (!region.contains(x, 1e-8 * scale)) return false;
      const double res = projection_residual(x, lam, G, b, scale, y);
      if (res < out.residual) {
        out.ok = true;
        out.x = x;
        out.lam = lam;
        out.residual = res;
      }
      return out.ok;
    }
    return false;
  };

  if (!sphere_active) return attempt(0.0) ? out : ProjectionPolish{};

  // Ball region with active boundary: bisect the sphere multiplier.
  double blo = 0.0, bhi = 1e-9;
  auto dist_at = [&](double beta, bool* okflag) {
    Vec x, lam;
    *okflag = solve_active(act, beta, &x, &lam);
    if (!*okflag) return kInf;
    return (x - region.center()).norm();
  };
  bool okf = false;
  double d0 = dist_at(0.0, &okf);
  if (okf && d0 <= region.radius() * (1 + 1e-12)) return attempt(0.0) ? out : ProjectionPolish{};
  for (int it = 0; it < 200; ++it) {
    const double d = dist_at(bhi, &okf);
    if (okf && d <= region.radius()) break;
    bhi *= 4.0;
    if (bhi > 1e18) return {};
  }
  for (int it = 0; it < 120; ++it) {
    const double bmid = 0.5 * (blo + bhi);
    const double d = dist_at(bmid, &okf);
    if (!okf) return {};
    if (d <= region.radius())
      bhi = bmid;
    else
      blo = bmid;
  }
  return attempt(bhi) ? out : ProjectionPolish{};
}

// Exhaustive active-set search for the projection onto an intersection of
// halfspaces (whole-space region): the closest KKT-consistent candidate
// over all subsets.  Decisive on near-degenerate systems where the
// first-order dual ascent crawls; only called with small m.
ProjectionPolish enumerate_projection(const Vec& y, const Eigen::MatrixXd& G, const Vec& b,
                                      double scale) {
  ProjectionPolish out;
  const int m = static_cast<int>(G.rows());
  double best_dist = kInf;
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> A;
    for (int i = 0; i < m; ++i)
      if (mask & (1 << i)) A.push_back(i);
    const int k = static_cast<int>(A.size());
    Vec x = y;
    Vec lam = Vec::Zero(m);
    if (k > 0) {
      Eigen::MatrixXd GA(k, G.cols());
      Vec bA(k);
      for (int p = 0; p < k; ++p) {
        GA.row(p) = G.row(A[p]);
        bA[p] = b[A[p]];
      }
      const Eigen::MatrixXd K = GA * GA.transpose();
      const Vec rhs = GA * y - bA;
      const auto lu = K.fullPivLu();
      Vec lamA = lu.solve(rhs);
      if (!lamA.allFinite()) continue;
      for (int ref = 0; ref < 2; ++ref) lamA += lu.solve(rhs - K * lamA);
      // no Gram-residual gate: on rank-deficient systems the projection
      // residual below is the meaningful filter
      bool nonneg = true;
      for (int p = 0; p < k; ++p) nonneg = nonneg && lamA[p] >= -1e-10;
      if (!nonneg) continue;
      for (int p = 0; p < k; ++p) {
        lam[A[p]] = std::max(0.0, lamA[p]);
        x -= lamA[p] * GA.row(p).transpose();
      }
    }
    const double res = projection_residual(x, lam, G, b, scale, y);
    const double dist = (x - y).norm();
    if (res <= 1e-8 && dist < best_dist) {
      best_dist = dist;
      out.ok = true;
      out.x = x;
      out.lam = lam;
      out.residual = res;
    }
  }
  return out;
}

}  // namespace

LevelProjectionResult project_onto_level_set(const Vec& y, std::span<const Cut> cuts,
                                             double level, const FeasibleRegion& region,
                                             double tol) {
  if (!(tol > 0)) throw std::invalid_argument("project_onto_level_set: tol must be > 0");
  const AffineCuts full = make_affine(cuts);
  const int m_full = static_cast<int>(full.G.rows());
  const int n = static_cast<int>(full.G.cols());

  LevelProjectionResult out;
  out.multipliers = Vec::Zero(m_full);

  // Cuts whose gradient is dust at this value scale behave as constants:
  // their floating-point halfspace would project garbage distances (a
  // residual of 1e-17 against a 1e-16 gradient moves order 0.1).  They
  // decide feasibility by value and leave the system.
  std::vector<int> keep;
  for (int i = 0; i < m_full; ++i) {
    const double vs = 1.0 + std::abs(full.a[i]) + std::abs(level);
    const double travel = 1.0 + (y - cuts[i].center).norm();
    if (full.G.row(i).norm() * travel <= 1e-13 * vs) {
      const double cvalue = full.a[i] + full.G.row(i).dot(y);
      if (cvalue > level + 1e-9 * vs) {
        out.status = LevelProjectionResult::Status::kInfeasible;
        out.multipliers[i] = 1.0;
        return out;
      }
      continue;  // numerically constant and satisfied
    }
    keep.push_back(i);
  }

  Vec x = region.project(y);
  if (keep.empty()) {
    out.point = x;
    return out;
  }

  // Row-normalized halfspace system g_i^T x <= b_i with unit gradients; a
  // box region contributes its faces as additional rows so that one
  // whole-space path (dual ascent + KKT polish + enumeration) covers it.
  const bool fold_box = region.kind() == FeasibleRegion::Kind::kBox;
  const int m_cuts = static_cast<int>(keep.size());
  std::vector<Vec> rows;
  std::vector<double> rhs, row_norm;
  for (int i = 0; i < m_cuts; ++i) {
    const double nm = full.G.row(keep[i]).norm();
    rows.push_back(full.G.row(keep[i]).transpose() / nm);
    rhs.push_back((level - full.a[keep[i]]) / nm);
    row_norm.push_back(nm);
  }
  if (fold_box) {
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(region.hi()[j])) {
        rows.push_back(Vec::Unit(n, j));
        rhs.push_back(region.hi()[j]);
      }
      if (std::isfinite(region.lo()[j])) {
        rows.push_back(-Vec::Unit(n, j));
        rhs.push_back(-region.lo()[j]);
      }
    }
  }
  const int m = static_cast<int>(rows.size());
  AffineCuts ac;
  ac.G.resize(m, n);
  ac.a.resize(m);
  Vec b(m);
  for (int i = 0; i < m; ++i) {
    ac.G.row(i) = rows[i].transpose();
    ac.a[i] = 0.0;
    b[i] = rhs[i];
    ac.ascale = std::max(ac.ascale, std::abs(b[i]));
  }
  const FeasibleRegion whole = FeasibleRegion::whole_space(n);
  const FeasibleRegion& solve_region = fold_box ? whole : region;

  auto expand = [&](const Vec& lam_sys) {
    Vec lam = Vec::Zero(m_full);
    for (int i = 0; i < m_cuts; ++i) lam[keep[i]] = lam_sys[i] / row_norm[i];
    return lam;
  };

  const double scale = 1.0 + b.cwiseAbs().maxCoeff() + y.norm();

  if (((ac.G * x - b).array() <= 0.0).all()) {
    out.point = x;
    out.kkt_residual = 0.0;
    return out;
  }

  // Residual cuts r_i(x) = g_i^T x - b_i; the level set is empty iff
  // min_x max_i r_i(x) > 0, which min_max_affine certifies by a dual
  // simplex vector (per-row scaling cannot change the sign of the max).
  auto certify_infeasible = [&]() -> bool {
    std::vector<Cut> resid(m);
    for (int i = 0; i < m; ++i) {
      resid[i].center = Vec::Zero(n);
      resid[i].value = -b[i];
      resid[i].gradient = ac.G.row(i).transpose();
      resid[i].birth = i;
    }
    try {
      const MinMaxResult mm = min_max_affine(resid, solve_region, std::nullopt, 1e-12);
      if (mm.bounded && mm.value > 0.0) {
        Vec lam = Vec::Zero(m_full);
        for (int i = 0; i < m_cuts; ++i) lam[keep[i]] = mm.lambda[i] / row_norm[i];
        out.status = LevelProjectionResult::Status::kInfeasible;
        out.multipliers = lam;
        return true;
      }
    } catch (const SolverError&) {
    }
    return false;
  };

  const Eigen::MatrixXd GGt = ac.G * ac.G.transpose();
  double Lg = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(GGt).eigenvalues().maxCoeff();
  Lg = std::max(Lg, 1e-300);

  Vec lam = Vec::Zero(m), mom = lam;
  double tk = 1.0;
  double best_res = kInf;
  Vec best_x = x, best_lam = lam;
  bool feasibility_checked = false;

  const int max_sweeps = std::max(600, 50 * m * m);
  for (int k = 0; k < max_sweeps; ++k) {
    // Accelerated projected ascent on the dual of the constraints.
    const Vec xm = solve_region.project(y - ac.G.transpose() * mom);
    const Vec grad = ac.G * xm - b;
    Vec lam_next = (mom + grad / Lg).cwiseMax(0.0);
    const double tnext = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    mom = lam_next + ((tk - 1.0) / tnext) * (lam_next - lam);
    if ((lam_next - lam).dot(grad) < 0) mom = lam_next;  // restart
    lam = lam_next;
    tk = tnext;

    x = solve_region.project(y - ac.G.transpose() * lam);
    const double res = projection_residual(x, lam, ac.G, b, scale, y);
    if (res < best_res) {
      best_res = res;
      best_x = x;
      best_lam = lam;
    }

    const bool try_now = res <= tol || (k + 1) % 10 == 0;
    if (try_now) {
      const ProjectionPolish pol = polish_projection(y, ac.G, b, solve_region, lam, x, scale);
      if (pol.ok && pol.residual < best_res) {
        best_res = pol.residual;
        best_x = pol.x;
        best_lam = pol.lam;
      }
      if (best_res > tol && (k + 1) % 100 == 0 && m <= 12 &&
          solve_region.kind() == FeasibleRegion::Kind::kWholeSpace) {
        const ProjectionPolish en = enumerate_projection(y, ac.G, b, scale);
        if (en.ok && en.residual < best_res) {
          best_res = en.residual;
          best_x = en.x;
          best_lam = en.lam;
        }
      }
      if (best_res <= tol) {
        out.point = best_x;
        out.multipliers = expand(best_lam);
        out.kkt_residual = best_res;
        return out;
      }
    }

    // A stalled primal violation suggests an empty level set; certify it.
    if (!feasibility_checked && k >= 40 && ((ac.G * x - b).maxCoeff() > 1e-7 * scale)) {
      feasibility_checked = true;
      if (certify_infeasible()) return out;
    }
  }

  // Last chances: an infeasibility certificate, the exhaustive active-set
  // search, or an honest error with the best residual achieved.
  if (certify_infeasible()) return out;
  if (m <= 14 && solve_region.kind() == FeasibleRegion::Kind::kWholeSpace) {
    const ProjectionPolish en = enumerate_projection(y, ac.G, b, scale);
    if (en.ok && en.residual < best_res) {
      best_res = en.residual;
      best_x = en.x;
      best_lam = en.lam;
    }
  }
  if (best_res <= 1e3 * tol) {
    out.point = best_x;
    out.multipliers = expand(best_lam);
    out.kkt_residual = best_res;
    return out;
  }
  throw SolverError("project_onto_level_set: no KKT certificate within the iteration cap",
                    best_res);
}

// ---------------------------------------------------------------------------
// W-gap.

WGapResult eval_wgap_full(const Vec& center, std::span<const Cut> cuts, double iota,
                          const FeasibleRegion& region, double tol) {
  if (!(iota > 0)) throw std::invalid_argument("eval_wgap: iota must be > 0");
  WGapResult out;
  double psi = -kInf;
  for (const Cut& c : cuts) psi = std::max(psi, c.support(center));
  out.psi_center = psi;

  const double mm_tol = std::max(1e-14, tol * iota / (1.0 + std::abs(psi)));
  const MinMaxResult mm = min_max_affine(cuts, region, Ball{center, iota}, mm_tol);
  out.value = (psi - mm.midpoint()) / iota;
  out.lambda = mm.lambda;
  out.minimizer = mm.minimizer;
  out.solver_gap = mm.gap / iota;
  return out;
}

double eval_wgap(const Vec& center, std::span<const Cut> cuts, double iota,
                 const FeasibleRegion& region, double tol) {
  return eval_wgap_full(center, cuts, iota, region, tol).value;
}

}  // namespace pwsbl
