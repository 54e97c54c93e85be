// geometry.hpp
//
// Feasible regions with closed-form projections, the level-set projection
// QP used by every bundle-level step, and the certified simplex-dual
// minimax solver behind lower bounds and W-gap evaluation.
//
// All solvers are self-certifying: min_max_affine returns a dual value
// that never exceeds the true minimax (weak duality), together with the
// achieved primal-dual gap; project_onto_level_set reports its KKT
// residual and declares infeasibility only with a Farkas-type certificate.

#pragma once

#include <optional>

#include "pwsbl/core.hpp"

namespace pwsbl {

class FeasibleRegion {
 public:
  enum class Kind { kWholeSpace, kBox, kBall };

  static FeasibleRegion whole_space(int dim);
  static FeasibleRegion box(Vec lo, Vec hi);
  static FeasibleRegion ball(Vec center, double radius);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool bounded() const { return kind_ != Kind::kWholeSpace; }

  bool contains(const Vec& x, double tol = 1e-9) const;
  Vec project(const Vec& y) const;

  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }

 private:
  FeasibleRegion() = default;
  Kind kind_ = Kind::kWholeSpace;
  int dim_ = 0;
  Vec lo_, hi_;      // box
  Vec center_;       // ball
  double radius_ = 0.0;
};

// Optional ball intersected with the region (trust ball, W-gap ball).
struct Ball {
  Vec center;
  double radius = 0.0;
};

Vec project_region(const FeasibleRegion& region, const Vec& y);

struct LevelProjectionResult {
  enum class Status { kFeasible, kInfeasible };
  Status status = Status::kFeasible;
  Vec point;         // projection, valid when feasible
  Vec multipliers;   // per-cut; Farkas certificate when infeasible
  double kkt_residual = 0.0;

  bool feasible() const { return status == Status::kFeasible; }
};

// Solves min 1/2||x - y||^2 s.t. support_i(x) <= level for all cuts, x in
// region.  Infeasibility is declared only when a simplex certificate
// lambda >= 0 proves min_x max_i support_i(x) > level over the region.
LevelProjectionResult project_onto_level_set(const Vec& y, std::span<const Cut> cuts,
                                             double level, const FeasibleRegion& region,
                                             double tol = 1e-10);

struct MinMaxResult {
  bool bounded = true;        // false: unbounded below over the region (-inf)
  double value = -kInf;       // certified dual lower bound on min max
  double primal_value = kInf; // model value at `minimizer` (upper bound)
  Vec lambda;                 // simplex multipliers certifying `value`
  Vec minimizer;
  double gap = kInf;          // primal_value - value

  double midpoint() const { return 0.5 * (value + primal_value); }
};

// Iteration budget for the minimax engine.  The default is sized for
// certificate-grade accuracy; callers that merely probe for an optional
// bound (and can absorb the unbounded indicator) pass a light budget.
struct MinMaxBudget {
  int max_rounds = 12;     // anchor-ball growth rounds on unbounded regions
  int stage_rungs = 7;     // smoothing ladder length (tau shrinks 100x per rung)
  int stage_iters = 700;   // ascent iterations per smoothing stage
  int polyak_iters = 4000; // supergradient fallback iterations
  static MinMaxBudget light() { return {3, 4, 220, 400}; }
};

// Computes min over region (optionally intersected with `cap`) of
// max_i support_i(x), via the dual max over the simplex.
MinMaxResult min_max_affine(std::span<const Cut> cuts, const FeasibleRegion& region,
                            const std::optional<Ball>& cap = std::nullopt,
                            double tol = 1e-11, const MinMaxBudget& budget = {});

struct WGapResult {
  double value = 0.0;   // V_iota
  double psi_center = 0.0;
  Vec lambda;           // dual multipliers of the inner minimax
  Vec minimizer;
  double solver_gap = 0.0;
};

// Normalized model descent V_iota = (psi(center) - min psi) / iota over
// region intersected with B(center; iota); the cut list must include the
// support generated at the center itself.
WGapResult eval_wgap_full(const Vec& center, std::span<const Cut> cuts, double iota,
                          const FeasibleRegion& region, double tol = 1e-10);

double eval_wgap(const Vec& center, std::span<const Cut> cuts, double iota,
                 const FeasibleRegion& region, double tol = 1e-10);

namespace detail {
// min <g, x> over region (optionally cap); used by the minimax dual.
struct LinMin {
  Vec x;             // attaining point (feasible)
  double value = 0;  // certified value <= true min + tiny margin
  bool bounded = true;
};
LinMin linear_min(const Vec& g, const FeasibleRegion& region,
                  const std::optional<Ball>& cap);

// min ||sum_i lambda_i g_i|| over the simplex (Wolfe-style, polished).
double min_convex_combination_norm(const Eigen::MatrixXd& G, Vec* lambda_out = nullptr);
}  // namespace detail

}  // namespace pwsbl
