// bundle.hpp
//
// The baseline bundle-level loop with known optimal value (exact oracle or
// perturbation oracle, selected by the radius), plus matching-pair
// diagnostics over a finished trace.
//
// Piece labels are 0-based throughout.

#pragma once

#include "pwsbl/core.hpp"
#include "pwsbl/geometry.hpp"
#include "pwsbl/problems.hpp"

namespace pwsbl {

struct MatchingStats {
  std::vector<std::pair<long, long>> pairs;  // (l_i, r_i), non-overlapping
  long p = 0;                                // number of pairs
  double kappa_bar = kInf;                   // N / p
  double sigma_bar = kInf;                   // p / sum 1/(r-l)
  double L_bar = kInf;                       // harmonic-weighted empirical smoothness
};

struct BlOptions {
  long max_iters = 1000;
  double stop_tol = 0.0;              // stop when f(x^t) - fstar <= stop_tol
  double perturbation_radius = 0.0;   // 0: exact oracle
  std::uint64_t seed = 0;
  double projection_tol = 1e-10;
};

// BL(m, fstar, x0): x^{t+1} = proj of x^t onto {support_i <= fstar} over the
// region, bundling the m most recent cuts.  The trace keeps every sample.
Trace run_bl(const ProblemInstance& instance, int m, double fstar, const Vec& x0,
             const BlOptions& opts = {});

// Greedy earliest-close extraction of a non-overlapping l-matching pair
// sequence from iterate piece labels; labels < 0 never match.
MatchingStats detect_matching_pairs(std::span<const int> labels, int l);

// Same, over a trace, additionally computing the harmonic-weighted average
// empirical smoothness L_bar with the supplied inexactness slack.
MatchingStats detect_matching_pairs(const Trace& trace, int l, double slack);

// max over t, j <= j_max of ||x^{t+j}-x*||^2 + (1/j)||x^{t+j}-x^t||^2
//                           - ||x^t-x*||^2   (<= 0 up to roundoff).
double bridged_three_point_check(const Trace& trace, const Vec& xstar, long j_max);

}  // namespace pwsbl
