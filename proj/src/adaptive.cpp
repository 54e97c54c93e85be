#include "pwsbl/adaptive.hpp"

#include <cmath>

#include "pwsbl/proximal.hpp"

namespace pwsbl {

PfBlOutcome pf_bl_mu(const ProblemInstance& instance, const Vec& x0, double mu_tilde, int m,
                     const PfBlOptions& opts) {
  if (!(mu_tilde > 0)) throw std::invalid_argument("pf_bl_mu: mu_tilde must be > 0");
  if (m < 1) throw std::invalid_argument("pf_bl_mu: m must be >= 1");

  PfBlOutcome out;
  const Objective obj = objective_of(instance);
  const long calls0 = instance.oracle_calls();
  auto spent = [&] { return instance.oracle_calls() - calls0; };

  Vec x = x0;
  double guess = mu_tilde;

  for (long q = 0; q <= opts.max_restarts; ++q) {
    out.guesses.push_back(guess);
    const std::uint64_t qseed = derive_seed(opts.seed, static_cast<std::uint64_t>(q) + 17);

    OracleSample inc = obj.eval(x, opts.perturbation_radius, make_rng(qseed, 0));
    double fbar = inc.fx;
    double funder = fbar - 2.0 * inc.cut.gradient.squaredNorm() / guess;
    double delta_tau = fbar - funder;
    bool restart_requested = false;

    for (long s = 0; s < opts.max_outer_per_guess; ++s) {
      out.x = x;
      out.fbar = fbar;
      out.funder = funder;
      if (spent() >= opts.max_oracle_calls) {
        out.status = RunStatus::kBudgetExhausted;
        out.oracle_calls = spent();
        return out;
      }
      const double fscale = 1.0 + std::abs(fbar);
      if (fbar - funder <= 1e-14 * fscale) {
        out.status = RunStatus::kConverged;  // gap at floating-point floor
        out.oracle_calls = spent();
        return out;
      }

      GROptions go;
      go.perturbation_radius = opts.perturbation_radius;
      go.seed = derive_seed(qseed, static_cast<std::uint64_t>(s) + 1);
      go.projection_tol = opts.projection_tol;
      go.minmax_tol = opts.minmax_tol;
      go.initial_sample = inc;
      GRResult gr = gap_reduction(guess, x, fbar, funder, m, obj, go);
      if (gr.status != RunStatus::kConverged) {
        out.status = gr.status;
        out.oracle_calls = spent();
        return out;
      }
      x = gr.x_plus;
      fbar = gr.fbar_plus;
      funder = gr.funder_plus;
      inc = gr.incumbent;
      const double delta = fbar - funder;

      PfBlStep step;
      step.restart = q;
      step.guess = guess;
      step.x = x;
      step.fbar = fbar;
      step.funder = funder;

      if (delta <= 0.5 * delta_tau) {
        delta_tau = delta;
        step.certificate_checked = true;
        WcertOptions wo;
        wo.projection_tol = opts.projection_tol;
        wo.perturbation_radius = opts.perturbation_radius;
        wo.seed = derive_seed(qseed, 1000 + static_cast<std::uint64_t>(s));
        const WcertOutcome wc = wcert_search(obj, x, delta_tau, m, kInf, wo);
        if (wc.returned_false()) {
          step.certificate_false = true;
          out.history.push_back(step);
          restart_requested = true;
          break;
        }
        out.certificates.push_back(*wc.cert);
        out.history.push_back(step);
        if (opts.target_eps.has_value()) {
          const double bound = certificate_gap_bound(*wc.cert, guess);
          if (bound <= *opts.target_eps || delta <= *opts.target_eps) {
            out.x = x;
            out.fbar = fbar;
            out.funder = funder;
            out.status = RunStatus::kConverged;
            out.oracle_calls = spent();
            return out;
          }
        }
      } else {
        out.history.push_back(step);
      }
    }

    if (!restart_requested) {
      // Outer-loop guard tripped without a restart signal.
      out.status = RunStatus::kIterLimit;
      out.oracle_calls = spent();
      return out;
    }
    out.restarts++;
    guess *= 0.5;
  }

  out.status = RunStatus::kBudgetExhausted;
  out.oracle_calls = spent();
  return out;
}

PfIppmOutcome pf_ippm(const ProblemInstance& instance, const Vec& xbar0, double rho_tilde,
                      int m, double eps, const PfIppmOptions& opts) {
  if (!(rho_tilde > 0) || !(eps > 0))
    throw std::invalid_argument("pf_ippm: rho_tilde and eps must be > 0");
  if (m < 1) throw std::invalid_argument("pf_ippm: m must be >= 1");

  PfIppmOutcome out;
  const long calls0 = instance.oracle_calls();
  auto spent = [&] { return instance.oracle_calls() - calls0; };

  Vec xbar = xbar0;
  double rho = rho_tilde;

  for (long q = 0; q <= opts.max_restarts; ++q) {
    out.guesses.push_back(rho);
    const std::uint64_t qseed = derive_seed(opts.seed, 7919 + static_cast<std::uint64_t>(q));
    bool restart_requested = false;

    for (long s = 0; s < opts.max_outer_per_guess; ++s) {
      out.xbar = xbar;
      if (spent() >= opts.max_oracle_calls) {
        out.status = RunStatus::kBudgetExhausted;
        out.oracle_calls = spent();
        return out;
      }

      const ProxSurrogate P{objective_of(instance), xbar, rho};
      const Objective pobj = prox_objective(P);
      OracleSample s0 =
          pobj.eval(xbar, opts.perturbation_radius, make_rng(derive_seed(qseed, s), 0));
      const double Pbar0 = s0.fx;
      double Pbar = Pbar0;
      double Punder = Pbar0 - s0.cut.gradient.squaredNorm() / (2.0 * rho);
      Vec xhat = xbar;
      OracleSample inc = s0;

      bool triggered = false;
      double delta_s = 0.0;
      for (long i = 1; i <= opts.max_inner_gr; ++i) {
        GROptions go;
        go.perturbation_radius = opts.perturbation_radius;
        go.seed = derive_seed(derive_seed(qseed, s), static_cast<std::uint64_t>(i));
        go.projection_tol = opts.projection_tol;
        go.minmax_tol = opts.minmax_tol;
        go.initial_sample = inc;
        GRResult gr = gap_reduction(rho, xhat, Pbar, Punder, m, pobj, go);
        if (gr.status != RunStatus::kConverged) {
          out.status = gr.status;
          out.oracle_calls = spent();
          return out;
        }
        xhat = gr.x_plus;
        Pbar = gr.fbar_plus;
        Punder = gr.funder_plus;
        inc = gr.incumbent;
        if (Pbar0 - Pbar >= Pbar - Punder) {
          delta_s = Pbar0 - Punder;
          triggered = true;
          break;
        }
      }
      if (!triggered) {
        out.status = RunStatus::kIterLimit;
        out.oracle_calls = spent();
        return out;
      }
      out.delta_bars.push_back(delta_s);
      const Vec xbar_next = xhat;

      if (!(delta_s > 1e-12 * (1.0 + std::abs(Pbar0)))) {
        // A vanishing stored gap is legitimate only at a first-order
        // stationary point; otherwise the surrogate bounds were invalid
        // (rho guessed too small), which is a restart signal.
        const Cut base = to_base_cut(s0.cut, xbar, rho);
        const double gnorm = base.gradient.norm();
        if (gnorm <= eps) {
          WCertificate cert;
          cert.center = xbar;
          cert.delta_used = std::max(delta_s, 0.0);
          cert.iota = eps;
          cert.nu = gnorm;  // single-cut model: V_iota is the gradient norm
          OracleSample sp = s0;
          sp.fx -= rho * (sp.x - xbar).squaredNorm();
          sp.cut = base;
          cert.points.push_back(std::move(sp));
          cert.model.push_back(base);
          out.cert_f = std::move(cert);
          out.xbar = xbar;
          out.status = RunStatus::kConverged;
          out.oracle_calls = spent();
          return out;
        }
        restart_requested = true;
        xbar = xbar_next;
        break;
      }

      WcertOptions wo;
      wo.projection_tol = opts.projection_tol;
      wo.perturbation_radius = opts.perturbation_radius;
      wo.seed = derive_seed(qseed, 100000 + static_cast<std::uint64_t>(s));
      const double iota_max = std::sqrt(delta_s / rho);
      const WcertOutcome wc = wcert_search(pobj, xbar, delta_s, m, iota_max, wo);

      if (wc.returned_false()) {
        restart_requested = true;
        xbar = xbar_next;
        break;
      }

      const WCertificate& cp = *wc.cert;
      std::vector<Cut> f_model;
      f_model.reserve(cp.model.size());
      for (const Cut& c : cp.model) f_model.push_back(to_base_cut(c, xbar, rho));
      const WGapResult wg =
          eval_wgap_full(xbar, f_model, cp.iota, instance.region(), opts.projection_tol);
      const double nu_plus = wg.value;

      if (nu_plus > 2.0 * cp.nu * (1.0 + 1e-9) + 1e-12 * (1.0 + cp.nu)) {
        restart_requested = true;
        xbar = xbar_next;
        break;
      }
      if (nu_plus <= eps && cp.iota <= eps) {
        WCertificate cert;
        cert.center = xbar;
        cert.points = cp.points;
        for (OracleSample& smp : cert.points) {
          smp.fx -= rho * (smp.x - xbar).squaredNorm();
          smp.cut = to_base_cut(smp.cut, xbar, rho);
        }
        cert.iota = cp.iota;
        cert.nu = nu_plus;
        cert.model = std::move(f_model);
        cert.delta_used = delta_s;
        cert.Ltilde = cp.Ltilde;
        out.cert_f = std::move(cert);
        out.xbar = xbar;
        out.status = RunStatus::kConverged;
        out.oracle_calls = spent();
        return out;
      }
      xbar = xbar_next;
    }

    if (!restart_requested) {
      out.status = RunStatus::kIterLimit;
      out.oracle_calls = spent();
      return out;
    }
    out.restarts++;
    rho *= 2.0;
  }

  out.status = RunStatus::kBudgetExhausted;
  out.oracle_calls = spent();
  return out;
}

}  // namespace pwsbl
