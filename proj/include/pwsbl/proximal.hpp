// proximal.hpp
//
// Weakly convex machinery: the proximal surrogate P(x) = f(x) + rho
// ||x - center||^2 with its exact cut transform, the inexact proximal
// point loop driven by Gap Reduction, and the high-accuracy Moreau
// residual used as the stationarity test oracle.

#pragma once

#include "pwsbl/core.hpp"
#include "pwsbl/gapred.hpp"
#include "pwsbl/problems.hpp"

namespace pwsbl {

struct ProxSurrogate {
  Objective base;
  Vec center;
  double rho = 0.0;
};

// Affine support of P built from a base cut: the quadratic is linearized
// at the cut's own center, which is exact for P convex.
Cut to_surrogate_cut(const Cut& base_cut, const Vec& center, double rho);
Cut to_base_cut(const Cut& surrogate_cut, const Vec& center, double rho);  // exact inverse

OracleSample prox_oracle(const ProxSurrogate& surrogate, const Vec& x, double radius,
                         RngState rng);

// Objective view of the surrogate (regions coincide with the base).
Objective prox_objective(const ProxSurrogate& surrogate);

inline ProxSurrogate make_surrogate(const ProblemInstance& base, const Vec& center, double rho) {
  if (!(rho > 0)) throw std::invalid_argument("make_surrogate: rho must be > 0");
  return ProxSurrogate{objective_of(base), center, rho};
}

struct IppmOptions {
  double perturbation_radius = 0.0;
  std::uint64_t seed = 0;
  double projection_tol = 1e-10;
  double minmax_tol = 1e-12;
  long max_inner_gr = 400;  // Gap Reduction calls per subproblem (guard)
  long outer_cap_slack = 10;
};

struct IppmOutcome {
  RunStatus status = RunStatus::kConverged;
  Vec xbar;                        // the returned prox center
  long outer = 0;                  // completed outer iterations
  std::vector<double> delta_bars;  // stored gaps, one per outer iteration
  std::vector<Vec> centers;        // x^0, x^1, ..., values of the prox center
  Trace trace;
};

// Inexact proximal point: each outer step solves P_s to half of its
// maximal descent via Gap Reduction with mu = rho, and the loop stops once
// the stored gap satisfies delta_bar <= eps^2 / (8 rho).
IppmOutcome ippm(const ProblemInstance& instance, const Vec& xbar0, double rho, int m,
                 double eps, const IppmOptions& opts = {});

// Test oracle: solves argmin F_{2 rho}(.; xbar) to value accuracy
// high_acc_tol with BL-mu and returns rho * ||xbar - xhat||.
double moreau_residual(const ProblemInstance& instance, const Vec& xbar, double rho,
                       double high_acc_tol = 1e-13, int m = 12, std::uint64_t seed = 0);

// Companion value: min F_{2 rho}(.; xbar), from the same solve.
struct MoreauSolve {
  double residual = 0.0;  // rho * ||xbar - xhat||
  Vec xhat;
  double envelope = 0.0;  // f_{2 rho}(xbar), up to the solve tolerance
};
MoreauSolve moreau_solve(const ProblemInstance& instance, const Vec& xbar, double rho,
                         double high_acc_tol = 1e-13, int m = 12, std::uint64_t seed = 0);

}  // namespace pwsbl
