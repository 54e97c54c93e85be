// gapred.hpp
//
// The Gap Reduction subroutine and the BL method driven by a known
// quadratic growth modulus.  Each Gap Reduction call shrinks the bound gap
// fbar - funder by a factor of at least 2/3, either by direct bound
// improvement or through the contrapositive empirical-smoothness trigger
// that raises the lower bound to the smallest level used.

#pragma once

#include "pwsbl/core.hpp"
#include "pwsbl/geometry.hpp"
#include "pwsbl/problems.hpp"

namespace pwsbl {

// max{ 2 (f(x_r) - support_l(x_r) - slack) / ||x_r - x_l||^2 , 0 }.
double empirical_smoothness(const OracleSample& sample_r, const OracleSample& sample_l,
                            double slack);

struct GapState {
  double fbar = 0.0;
  Vec xbar;
  double funder = 0.0;
  std::vector<double> S_r{0.0};  // S_r[t]: best progress of a chain ending at t
  std::vector<double> S_l{0.0};  // S_l[t]: running max of S_r up to t
  std::vector<long> dp_from;     // dp_from[t]: left index of the pair ending at t (-1 none)
  std::vector<long> sl_arg;      // sl_arg[t]: index attaining S_l[t]
  std::vector<OracleSample> samples;  // inner iterates x^0..x^t
  std::vector<double> levels;         // levels[i] = f^{i+1}
  std::vector<double> slacks;         // slack used by the DP at step i+1

  double delta() const { return fbar - funder; }
};

// One step of the empirical-progress dynamic program: fills S_r[t+1] and
// S_l[t+1] from the window q in [max(0, t+1-m), t] with slack delta_t / 6.
// Pairs with zero empirical smoothness contribute +inf (immediate trigger);
// coincident points carry no information and are skipped.
void dp_update(GapState& state, long t, int m, double delta_t);

struct GRPairStats {
  std::vector<std::pair<long, long>> pairs;  // DP-optimal chain at termination
  double kappa_bar = 0.0, sigma_bar = 0.0, L_bar = 0.0;
  double S_final = 0.0;
  // ceil(3 kappa sigma L / mu), the iteration bound implied by the chain.
  double iteration_bound = 0.0;
};

struct GROptions {
  double projection_tol = 1e-10;
  double minmax_tol = 1e-12;
  double perturbation_radius = 0.0;
  std::uint64_t seed = 0;
  long max_inner = 200000;  // misuse guard; hitting it is an error
  bool trust_ball = false;  // optional B(x0, sqrt(2 Delta0 / mu)) for the lower bound
  std::optional<OracleSample> initial_sample;  // reuse of the caller's sample at x0
};

struct GRResult {
  RunStatus status = RunStatus::kConverged;
  enum class Stop { kGapTrigger, kSrTrigger, kNone } stop = Stop::kNone;
  Vec x_plus;
  double fbar_plus = 0.0;
  double funder_plus = 0.0;
  OracleSample incumbent;  // sample at x_plus (for chaining)
  Trace inner;
  long iterations = 0;  // number of level projections performed
  GRPairStats dp;
  GapState state;  // final DP state, exposed for the property tests
};

GRResult gap_reduction(double mu, const Vec& x0, double fbar, double funder, int m,
                       const Objective& obj, const GROptions& opts = {});

struct BlMuOptions {
  double perturbation_radius = 0.0;
  std::uint64_t seed = 0;
  double projection_tol = 1e-10;
  double minmax_tol = 1e-12;
  long max_outer_slack = 8;  // allowance beyond ceil(log_{3/2}(Delta0/eps))
};

struct BlMuResult {
  RunStatus status = RunStatus::kConverged;
  Vec xhat;
  double fbar = 0.0;
  double funder = 0.0;
  long outer = 0;  // number of Gap Reduction calls
  double delta0 = 0.0;
  Trace trace;
  std::vector<GRResult> calls;
};

// BL-mu: seeds funder with f(x0) - 2||f'(x0)||^2 / mu and loops Gap
// Reduction until fbar - funder <= eps.
BlMuResult bl_mu(const ProblemInstance& instance, const Vec& x0, double mu, int m, double eps,
                 const BlMuOptions& opts = {});

// Same driver against an arbitrary objective (used by the proximal loop).
BlMuResult bl_mu_objective(const Objective& obj, const Vec& x0, double mu, int m, double eps,
                           const BlMuOptions& opts = {});

}  // namespace pwsbl
