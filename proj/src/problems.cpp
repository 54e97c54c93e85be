#include "pwsbl/problems.hpp"

#include <cmath>

namespace pwsbl {

ProblemInstance::ProblemInstance(std::vector<QuadPiece> pieces, FeasibleRegion region,
                                 GroundTruth truth, bool convex, Provenance prov)
    : pieces_(std::move(pieces)),
      region_(std::move(region)),
      truth_(std::move(truth)),
      convex_(convex),
      prov_(std::move(prov)),
      calls_(std::make_shared<std::atomic<long>>(0)) {
  if (pieces_.empty()) throw std::invalid_argument("ProblemInstance: no pieces");
  for (const QuadPiece& p : pieces_)
    if (p.center.size() != region_.dim() || p.lin.size() != region_.dim())
      throw std::invalid_argument("ProblemInstance: piece dimension mismatch");
}

double ProblemInstance::value(const Vec& x) const {
  double v = -kInf;
  for (const QuadPiece& p : pieces_) v = std::max(v, p.value(x));
  return v;
}

int ProblemInstance::piece_label(const Vec& x) const {
  int best = 0;
  double v = pieces_[0].value(x);
  for (int i = 1; i < static_cast<int>(pieces_.size()); ++i) {
    const double vi = pieces_[i].value(x);
    if (vi > v) {  // strict: ties keep the lowest index
      v = vi;
      best = i;
    }
  }
  return best;
}

Vec ProblemInstance::subgradient(const Vec& x) const {
  return pieces_[piece_label(x)].gradient(x);
}

OracleSample ProblemInstance::evaluate(const Vec& x, double perturbation_radius,
                                       RngState rng) const {
  if (x.size() != dim()) throw std::invalid_argument("evaluate: dimension mismatch");
  if (perturbation_radius < 0) throw std::invalid_argument("evaluate: radius must be >= 0");
  if (!region_.contains(x, 1e-7 * (1.0 + x.norm())))
    throw std::invalid_argument("evaluate: query point outside the feasible region");

  OracleSample s;
  s.x = x;
  s.fx = value(x);
  s.perturbation_radius = perturbation_radius;

  Vec c = x;
  if (perturbation_radius > 0) c = ball_sample(rng, x, perturbation_radius);
  const int label = piece_label(c);
  s.piece = label;
  s.cut.center = c;
  s.cut.value = value(c);
  s.cut.gradient = pieces_[label].gradient(c);
  s.cut.piece = label;

  calls_->fetch_add(1);
  return s;
}

Objective objective_of(const ProblemInstance& instance) {
  return Objective{[&instance](const Vec& x, double radius, RngState rng) {
                     return instance.evaluate(x, radius, rng);
                   },
                   instance.region()};
}

namespace {

Vec random_vec(RngState& rng, int n, double scale) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * (2.0 * uniform01(rng) - 1.0);
  return v;
}

// Lipschitz bound of max_i ||grad q_i|| over the box [-h, h]^n.
double lipschitz_on_box(const std::vector<QuadPiece>& pieces, double h) {
  double M = 0.0;
  const int n = static_cast<int>(pieces[0].center.size());
  for (const QuadPiece& p : pieces) {
    double corner = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = std::max(std::abs(h - p.center[j]), std::abs(-h - p.center[j]));
      corner += d * d;
    }
    M = std::max(M, std::abs(p.curv) * std::sqrt(corner) + p.lin.norm());
  }
  return M;
}

}  // namespace

ProblemInstance make_max_of_quadratics(int k, int n, double L, double mu, std::uint64_t seed) {
  if (k < 1 || n < 1) throw std::invalid_argument("make_max_of_quadratics: k, n must be >= 1");
  if (!(L >= mu) || !(mu > 0))
    throw std::invalid_argument("make_max_of_quadratics: requires L >= mu > 0");

  RngState rng = make_rng(seed, 0x6d61786f66717561ULL);
  const Vec xstar = random_vec(rng, n, 1.0);
  const double fstar = 2.0 * uniform01(rng) - 1.0;

  std::vector<QuadPiece> pieces;
  pieces.reserve(k);
  pieces.push_back({mu, xstar, Vec::Zero(n), fstar});
  for (int i = 1; i < k; ++i) {
    QuadPiece p;
    p.curv = (i == 1) ? L : mu + (L - mu) * uniform01(rng);
    Vec dir = random_vec(rng, n, 1.0);
    if (dir.norm() == 0) dir = Vec::Unit(n, 0);
    const double dist = 0.3 + 1.7 * uniform01(rng);
    p.center = xstar + (dist / dir.norm()) * dir;
    p.lin = Vec::Zero(n);
    // Half of the extra pieces tie with piece 1 at xstar so the optimum
    // sits on a piece boundary; the rest stay strictly below it there.
    const double slack = (uniform01(rng) < 0.5) ? 0.0 : 0.5 * uniform01(rng);
    p.off = fstar - slack - 0.5 * p.curv * (xstar - p.center).squaredNorm();
    pieces.push_back(std::move(p));
  }

  GroundTruth truth;
  truth.fstar = fstar;
  truth.xstar = xstar;
  truth.xstar_unique = true;
  truth.mu = mu;
  truth.L = L;
  truth.k = k;
  truth.reference_box_halfwidth = 4.0;
  truth.M = lipschitz_on_box(pieces, truth.reference_box_halfwidth);

  Provenance prov{"max_of_quadratics", k, n, L, mu, 0.0, seed};
  return ProblemInstance(std::move(pieces), FeasibleRegion::whole_space(n), std::move(truth),
                         /*convex=*/true, std::move(prov));
}

ProblemInstance make_weakly_convex_max(int k, int n, double rho, std::uint64_t seed) {
  if (k < 1 || n < 1) throw std::invalid_argument("make_weakly_convex_max: k, n must be >= 1");
  if (!(rho > 0)) throw std::invalid_argument("make_weakly_convex_max: rho must be > 0");

  RngState rng = make_rng(seed, 0x77636d6178ULL);
  std::vector<QuadPiece> pieces;
  pieces.reserve(k);
  for (int i = 0; i < k; ++i) {
    QuadPiece p;
    p.curv = -rho;
    p.center = random_vec(rng, n, 1.0);
    p.lin = random_vec(rng, n, rho);
    p.off = 2.0 * uniform01(rng) - 1.0;
    pieces.push_back(std::move(p));
  }

  // Concave pieces are unbounded below, so the instance lives on a box.
  const double h = 2.0;
  GroundTruth truth;
  truth.rho = rho;
  truth.L = rho;  // per-piece smoothness of a -rho/2 quadratic
  truth.k = k;
  truth.reference_box_halfwidth = h;
  truth.M = lipschitz_on_box(pieces, h);

  Provenance prov{"weakly_convex_max", k, n, 0.0, 0.0, rho, seed};
  return ProblemInstance(std::move(pieces),
                         FeasibleRegion::box(Vec::Constant(n, -h), Vec::Constant(n, h)),
                         std::move(truth), /*convex=*/false, std::move(prov));
}

ProblemInstance demo_pws() {
  // ||x||^2 + |x_1| = max(||x||^2 - x_1, ||x||^2 + x_1); the argmax regions
  // are X_1 = (-inf, 0] x R and X_2 = (0, inf) x R.
  std::vector<QuadPiece> pieces(2);
  Vec zero = Vec::Zero(2);
  pieces[0] = {2.0, zero, -Vec::Unit(2, 0), 0.0};
  pieces[1] = {2.0, zero, Vec::Unit(2, 0), 0.0};

  GroundTruth truth;
  truth.fstar = 0.0;
  truth.xstar = zero;
  truth.xstar_unique = true;
  truth.mu = 2.0;
  truth.L = 2.0;
  truth.k = 2;
  truth.reference_box_halfwidth = 1.0;
  truth.M = lipschitz_on_box(pieces, 1.0);

  Provenance prov{"demo_pws", 2, 2, 2.0, 2.0, 0.0, 0};
  return ProblemInstance(std::move(pieces), FeasibleRegion::whole_space(2), std::move(truth),
                         /*convex=*/true, std::move(prov));
}

}  // namespace pwsbl
