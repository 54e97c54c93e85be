// Shared test helpers: brute-force oracles (grid minimax with refinement,
// finite differences) and small random generators.  These stay independent
// of the solver paths they are used to check.

#pragma once

#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "pwsbl/core.hpp"
#include "pwsbl/geometry.hpp"
#include "pwsbl/problems.hpp"

namespace testsup {

using pwsbl::Cut;
using pwsbl::Vec;

inline Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline Cut make_cut(Vec center, double value, Vec gradient, long birth = 0) {
  Cut c;
  c.center = std::move(center);
  c.value = value;
  c.gradient = std::move(gradient);
  c.birth = birth;
  return c;
}

// Minimize an arbitrary function over region ∩ ball by nested grid
// refinement (1-d and 2-d only).  Accuracy ~ (span / per_axis)^levels.
inline double grid_min(const std::function<double(const Vec&)>& f,
                       const pwsbl::FeasibleRegion& region, const Vec& center, double radius,
                       int per_axis = 41, int levels = 9) {
  const int n = region.dim();
  REQUIRE(n <= 2);
  Vec lo = center.array() - radius;
  Vec hi = center.array() + radius;
  if (region.kind() == pwsbl::FeasibleRegion::Kind::kBox) {
    lo = lo.cwiseMax(region.lo());
    hi = hi.cwiseMin(region.hi());
  }
  double best = pwsbl::kInf;
  Vec bestx = center;
  // Out-of-set grid points are pulled back into region ∩ ball, so the
  // resolution survives along the ball boundary.
  auto consider = [&](Vec x) {
    for (int pass = 0; pass < 3; ++pass) {
      x = region.project(x);
      const Vec d = x - center;
      const double nd = d.norm();
      if (nd > radius) x = center + (radius / nd) * d;
    }
    if (!region.contains(x, 1e-9)) return;
    if ((x - center).norm() > radius * (1 + 1e-9)) return;
    const double v = f(x);
    if (v < best) {
      best = v;
      bestx = x;
    }
  };
  for (int level = 0; level < levels; ++level) {
    Vec x(n);
    if (n == 1) {
      for (int i = 0; i < per_axis; ++i) {
        x[0] = lo[0] + (hi[0] - lo[0]) * i / (per_axis - 1.0);
        consider(x);
      }
    } else {
      for (int i = 0; i < per_axis; ++i) {
        for (int j = 0; j < per_axis; ++j) {
          x[0] = lo[0] + (hi[0] - lo[0]) * i / (per_axis - 1.0);
          x[1] = lo[1] + (hi[1] - lo[1]) * j / (per_axis - 1.0);
          consider(x);
        }
      }
    }
    const Vec span = 2.5 * (hi - lo) / (per_axis - 1.0);
    lo = bestx - span;
    hi = bestx + span;
  }
  return best;
}

inline double grid_minimax(std::span<const Cut> cuts, const pwsbl::FeasibleRegion& region,
                           const Vec& center, double radius) {
  return grid_min(
      [&](const Vec& x) {
        double v = -pwsbl::kInf;
        for (const Cut& c : cuts) v = std::max(v, c.support(x));
        return v;
      },
      region, center, radius);
}

// f(x) = |x| on R as max(-x, x); piece 0 covers x <= 0, so the exact
// oracle at the kink returns gradient -1.
inline pwsbl::ProblemInstance make_abs_1d() {
  std::vector<pwsbl::QuadPiece> pieces(2);
  pieces[0] = {0.0, vec1(0), vec1(-1), 0.0};
  pieces[1] = {0.0, vec1(0), vec1(1), 0.0};
  pwsbl::GroundTruth t;
  t.fstar = 0.0;
  t.xstar = vec1(0);
  t.xstar_unique = true;
  t.k = 2;
  t.L = 0.0;
  t.M = 1.0;
  t.reference_box_halfwidth = 2.0;
  return pwsbl::ProblemInstance(std::move(pieces), pwsbl::FeasibleRegion::whole_space(1),
                                std::move(t), /*convex=*/true,
                                pwsbl::Provenance{"abs_1d", 2, 1, 0.0, 0.0, 0.0, 0});
}

// f(x) = x^2 on R (single 2-smooth piece).
inline pwsbl::ProblemInstance make_square_1d() {
  std::vector<pwsbl::QuadPiece> pieces(1);
  pieces[0] = {2.0, vec1(0), vec1(0), 0.0};
  pwsbl::GroundTruth t;
  t.fstar = 0.0;
  t.xstar = vec1(0);
  t.xstar_unique = true;
  t.k = 1;
  t.L = 2.0;
  t.mu = 2.0;
  t.reference_box_halfwidth = 2.0;
  t.M = 4.0;
  return pwsbl::ProblemInstance(std::move(pieces), pwsbl::FeasibleRegion::whole_space(1),
                                std::move(t), /*convex=*/true,
                                pwsbl::Provenance{"square_1d", 1, 1, 2.0, 2.0, 0.0, 0});
}

inline Vec random_unit(pwsbl::RngState& rng, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = pwsbl::normal01(rng);
  const double nm = v.norm();
  return nm > 0 ? Vec(v / nm) : Vec(Vec::Unit(n, 0));
}

inline Vec random_in_box(pwsbl::RngState& rng, int n, double halfwidth) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = halfwidth * (2.0 * pwsbl::uniform01(rng) - 1.0);
  return v;
}

}  // namespace testsup
