#include "pwsbl/proximal.hpp"

#include <cmath>

namespace pwsbl {

Cut to_surrogate_cut(const Cut& base_cut, const Vec& center, double rho) {
  Cut c = base_cut;
  const Vec d = base_cut.center - center;
  c.value = base_cut.value + rho * d.squaredNorm();
  c.gradient = base_cut.gradient + 2.0 * rho * d;
  return c;
}

Cut to_base_cut(const Cut& surrogate_cut, const Vec& center, double rho) {
  Cut c = surrogate_cut;
  const Vec d = surrogate_cut.center - center;
  c.value = surrogate_cut.value - rho * d.squaredNorm();
  c.gradient = surrogate_cut.gradient - 2.0 * rho * d;
  return c;
}

OracleSample prox_oracle(const ProxSurrogate& surrogate, const Vec& x, double radius,
                         RngState rng) {
  OracleSample s = surrogate.base.eval(x, radius, rng);
  s.fx += surrogate.rho * (x - surrogate.center).squaredNorm();
  s.cut = to_surrogate_cut(s.cut, surrogate.center, surrogate.rho);
  return s;
}

Objective prox_objective(const ProxSurrogate& surrogate) {
  return Objective{[surrogate](const Vec& x, double radius, RngState rng) {
                     return prox_oracle(surrogate, x, radius, rng);
                   },
                   surrogate.base.region};
}

IppmOutcome ippm(const ProblemInstance& instance, const Vec& xbar0, double rho, int m,
                 double eps, const IppmOptions& opts) {
  if (!(rho > 0) || !(eps > 0)) throw std::invalid_argument("ippm: rho, eps must be > 0");
  if (m < 1) throw std::invalid_argument("ippm: m must be >= 1");

  IppmOutcome out;
  Vec xbar = xbar0;
  out.centers.push_back(xbar);
  const double stop_gap = eps * eps / (8.0 * rho);

  double f_x0 = kInf;
  double best_funder_f = kInf;  // crude scale for the outer-loop misuse guard
  long iter_base = 0;

  for (long s = 0;; ++s) {
    const ProxSurrogate P{objective_of(instance), xbar, rho};
    const Objective pobj = prox_objective(P);

    OracleSample s0 = pobj.eval(xbar, opts.perturbation_radius,
                                make_rng(derive_seed(opts.seed, s), 0));
    if (s == 0) f_x0 = s0.fx;
    const double Pbar0 = s0.fx;  // = f(xbar)
    double Pbar = Pbar0;
    double Punder = Pbar0 - s0.cut.gradient.squaredNorm() / (2.0 * rho);
    best_funder_f = std::min(best_funder_f, Punder);
    Vec xhat = xbar;
    OracleSample inc = s0;

    bool triggered = false;
    double delta_bar = 0.0;
    for (long i = 1; i <= opts.max_inner_gr; ++i) {
      GROptions go;
      go.perturbation_radius = opts.perturbation_radius;
      go.seed = derive_seed(derive_seed(opts.seed, s), static_cast<std::uint64_t>(i));
      go.projection_tol = opts.projection_tol;
      go.minmax_tol = opts.minmax_tol;
      go.initial_sample = inc;
      GRResult gr = gap_reduction(rho, xhat, Pbar, Punder, m, pobj, go);

      for (std::size_t q = 1; q < gr.inner.samples.size(); ++q)
        out.trace.samples.push_back(gr.inner.samples[q]);
      for (TraceRecord r : gr.inner.records) {
        r.iter += iter_base;
        out.trace.records.push_back(r);
      }
      iter_base += gr.iterations;

      if (gr.status != RunStatus::kConverged) {
        out.status = gr.status;
        out.xbar = xbar;
        out.trace.status = out.status;
        out.trace.message = gr.inner.message;
        return out;
      }
      xhat = gr.x_plus;
      Pbar = gr.fbar_plus;
      Punder = gr.funder_plus;
      inc = gr.incumbent;
      best_funder_f = std::min(best_funder_f, Punder);

      if (Pbar0 - Pbar >= Pbar - Punder) {  // half of the maximal descent achieved
        delta_bar = Pbar0 - Punder;
        triggered = true;
        break;
      }
    }
    if (!triggered) {
      out.status = RunStatus::kIterLimit;
      out.xbar = xbar;
      out.trace.status = out.status;
      out.trace.message = "ippm: half-descent trigger never fired within the guard";
      return out;
    }

    out.delta_bars.push_back(delta_bar);
    {
      TraceRecord r;
      r.iter = iter_base;
      r.x = xhat;
      r.fx = Pbar;
      r.level = delta_bar;
      r.event = TraceEvent::kRestart;  // outer boundary marker
      r.fbar = Pbar;
      r.funder = Punder;
      out.trace.records.push_back(r);
    }

    if (delta_bar <= stop_gap) {
      // The certified gap at the current center meets the Moreau threshold.
      out.status = RunStatus::kConverged;
      out.xbar = xbar;
      out.outer = s + 1;
      out.trace.status = out.status;
      return out;
    }

    xbar = xhat;
    out.centers.push_back(xbar);
    out.outer = s + 1;

    const double delta_f_hat = std::max(f_x0 - best_funder_f, eps * eps / rho);
    const long cap =
        static_cast<long>(std::ceil(16.0 * rho * delta_f_hat / (eps * eps))) + opts.outer_cap_slack;
    if (s + 1 >= cap) {
      out.status = RunStatus::kBudgetExhausted;
      out.xbar = xbar;
      out.trace.status = out.status;
      out.trace.message = "ippm: outer-loop budget guard tripped";
      return out;
    }
  }
}

MoreauSolve moreau_solve(const ProblemInstance& instance, const Vec& xbar, double rho,
                         double high_acc_tol, int m, std::uint64_t seed) {
  if (!(rho > 0)) throw std::invalid_argument("moreau_solve: rho must be > 0");
  const ProxSurrogate P{objective_of(instance), xbar, rho};
  BlMuOptions opts;
  opts.seed = seed;
  BlMuResult r = bl_mu_objective(prox_objective(P), xbar, rho, m, high_acc_tol, opts);
  if (r.status != RunStatus::kConverged)
    throw SolverError("moreau_solve: inner BL-mu did not certify the prox subproblem",
                      r.fbar - r.funder);
  MoreauSolve out;
  out.xhat = r.xhat;
  out.residual = rho * (xbar - r.xhat).norm();
  out.envelope = r.fbar;
  return out;
}

double moreau_residual(const ProblemInstance& instance, const Vec& xbar, double rho,
                       double high_acc_tol, int m, std::uint64_t seed) {
  return moreau_solve(instance, xbar, rho, high_acc_tol, m, seed).residual;
}

}  // namespace pwsbl
