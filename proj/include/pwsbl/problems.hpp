// problems.hpp
//
// First-order oracle contract plus the generated test-problem families.
// Every generated instance is a max of isotropic quadratic components, so
// exact values, subgradients, argmax piece labels, and (where stated)
// ground truth are available in closed form.

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pwsbl/core.hpp"
#include "pwsbl/geometry.hpp"

namespace pwsbl {

// One smooth component: q(x) = curv/2 * ||x - center||^2 + <lin, x> + off.
struct QuadPiece {
  double curv = 0.0;
  Vec center;
  Vec lin;
  double off = 0.0;

  double value(const Vec& x) const {
    return 0.5 * curv * (x - center).squaredNorm() + lin.dot(x) + off;
  }
  Vec gradient(const Vec& x) const { return curv * (x - center) + lin; }
};

struct GroundTruth {
  std::optional<double> fstar;
  std::optional<Vec> xstar;  // a known minimizer
  bool xstar_unique = false;
  std::optional<double> mu;   // quadratic growth modulus
  std::optional<double> L;    // per-piece smoothness constant
  std::optional<int> k;       // number of pieces
  std::optional<double> rho;  // weak convexity modulus
  std::optional<double> M;    // Lipschitz bound over reference_box
  double reference_box_halfwidth = 0.0;
};

// Construction record, kept for serialization.
struct Provenance {
  std::string generator = "custom";
  int k = 0, n = 0;
  double L = 0.0, mu = 0.0, rho = 0.0;
  std::uint64_t seed = 0;
};

class ProblemInstance {
 public:
  ProblemInstance(std::vector<QuadPiece> pieces, FeasibleRegion region, GroundTruth truth,
                  bool convex, Provenance prov = {});

  int dim() const { return region_.dim(); }
  const FeasibleRegion& region() const { return region_; }
  const GroundTruth& truth() const { return truth_; }
  const std::vector<QuadPiece>& pieces() const { return pieces_; }
  const Provenance& provenance() const { return prov_; }
  bool convex() const { return convex_; }

  double value(const Vec& x) const;
  Vec subgradient(const Vec& x) const;  // gradient of the lowest-index maximal piece
  int piece_label(const Vec& x) const;  // lowest-index argmax

  // First-order oracle.  radius == 0 returns the exact piece-consistent
  // cut at x; radius > 0 samples the cut center uniformly in B(x; radius).
  // fx is always the exact value at x.
  OracleSample evaluate(const Vec& x, double perturbation_radius, RngState rng) const;

  long oracle_calls() const { return calls_->load(); }
  void reset_oracle_calls() const { calls_->store(0); }
  void add_oracle_calls(long c) const { calls_->fetch_add(c); }

 private:
  std::vector<QuadPiece> pieces_;
  FeasibleRegion region_;
  GroundTruth truth_;
  bool convex_ = true;
  Provenance prov_;
  std::shared_ptr<std::atomic<long>> calls_;
};

// Oracle view consumed by the algorithm drivers; carries its own region
// copy and forwards evaluations (and call accounting) to the instance.
struct Objective {
  std::function<OracleSample(const Vec&, double, RngState)> eval;
  FeasibleRegion region;
};

Objective objective_of(const ProblemInstance& instance);

// f(x) = max_i quadratic_i(x) with curvatures in [mu, L]; piece 1 is the
// mu-quadratic centered at the (stored, unique) minimizer, so fstar, xstar
// and a valid QG modulus are known by construction.
ProblemInstance make_max_of_quadratics(int k, int n, double L, double mu, std::uint64_t seed);

// f(x) = max_i [c_i + <g_i, x> - rho/2 ||x - a_i||^2] over a box; each
// piece is a concave quadratic, so f is rho-weakly convex.
ProblemInstance make_weakly_convex_max(int k, int n, double rho, std::uint64_t seed);

// The 2-d running example f(x) = ||x||^2 + |x_1| with pieces split at the
// x_2-axis (boundary assigned to piece 1).
ProblemInstance demo_pws();

inline OracleSample evaluate(const ProblemInstance& instance, const Vec& x,
                             double perturbation_radius, RngState rng) {
  return instance.evaluate(x, perturbation_radius, rng);
}

inline int piece_label(const ProblemInstance& instance, const Vec& x) {
  return instance.piece_label(x);
}

// Perturbation radius inducing inexactness <= delta on an L-smooth piece.
inline double perturbation_radius_for_delta(double delta, double L) {
  if (!(delta > 0) || !(L > 0))
    throw std::invalid_argument("perturbation_radius_for_delta: delta, L must be > 0");
  return std::min(std::sqrt(delta / (8.0 * L)), delta / (4.0 * L));
}

}  // namespace pwsbl
