#include "pwsbl/certify.hpp"

#include <cmath>

#include "pwsbl/proximal.hpp"

namespace pwsbl {

WcertOutcome wcert_search(const Objective& obj, const Vec& xbar, double Delta, int m,
                          double iota_max, const WcertOptions& opts) {
  if (!(Delta > 0))
    throw std::invalid_argument("wcert_search: Delta must be > 0 (search is meaningless at optimality)");
  if (m < 1) throw std::invalid_argument("wcert_search: m must be >= 1");
  if (!(iota_max > 0)) throw std::invalid_argument("wcert_search: iota_max must be > 0");

  WcertOutcome out;
  WCertificate cert;
  cert.center = xbar;
  cert.delta_used = Delta;

  // The center cut is the exact linearization at xbar (radius 0).
  OracleSample s0 = obj.eval(xbar, 0.0, make_rng(opts.seed, 0));
  s0.cut.birth = 0;
  cert.points.push_back(s0);
  cert.model.push_back(s0.cut);

  const double level = s0.fx - 2.0 * Delta;
  const double tiny = 1e-14 * (1.0 + xbar.norm());

  std::vector<OracleSample> all = cert.points;  // grows to x^0..x^{m+1}
  Vec x_last;

  for (int t = 0; t <= m; ++t) {
    LevelProjectionResult proj =
        project_onto_level_set(xbar, cert.model, level, obj.region, opts.projection_tol);
    const double dist = proj.feasible() ? (proj.point - xbar).norm() : kInf;

    if (std::isfinite(iota_max) && dist > iota_max) {
      cert.iota = iota_max;
      cert.nu = 2.0 * Delta / iota_max;
      out.exit = WcertOutcome::Exit::kIotaMax;
      out.cert = std::move(cert);
      return out;
    }
    if (!proj.feasible()) {
      // min psi > level over the whole region: descent is bounded by
      // 2 Delta on every ball, i.e. the (M, 2 Delta / M) limit.
      cert.iota_unbounded = true;
      cert.nu = 0.0;
      out.exit = WcertOutcome::Exit::kInfeasible;
      out.cert = std::move(cert);
      return out;
    }

    if (t == m) {
      x_last = proj.point;
      break;
    }
    OracleSample s =
        obj.eval(proj.point, opts.perturbation_radius, make_rng(opts.seed, t + 1));
    s.cut.birth = t + 1;
    cert.points.push_back(s);
    cert.model.push_back(s.cut);
    all.push_back(s);
  }

  // Final evaluation at x^{m+1}: its value feeds the empirical smoothness,
  // its cut is not part of the model.
  OracleSample s_last = obj.eval(x_last, opts.perturbation_radius, make_rng(opts.seed, m + 1));
  all.push_back(s_last);

  // Empirical smoothness over pairs 0 <= l < r <= m+1, each ratio clamped
  // at zero, with slack Delta / 6.
  double Lt = kInf;
  bool any_pair = false;
  for (std::size_t l = 0; l < all.size(); ++l) {
    for (std::size_t r = l + 1; r < all.size(); ++r) {
      const double d2 = (all[r].x - all[l].x).squaredNorm();
      if (d2 <= tiny * tiny) continue;
      any_pair = true;
      Lt = std::min(Lt, empirical_smoothness(all[r], all[l], Delta / 6.0));
    }
  }

  const double iota = (x_last - xbar).norm();
  double threshold = 0.0;
  if (any_pair) threshold = (Lt > 0.0) ? 0.5 * std::sqrt(Delta / Lt) : kInf;
  if (iota <= tiny || iota < threshold) {
    out.exit = WcertOutcome::Exit::kFalse;
    return out;
  }

  cert.iota = iota;
  cert.nu = 2.0 * Delta / iota;
  if (any_pair) cert.Ltilde = Lt;
  out.exit = WcertOutcome::Exit::kFinal;
  out.cert = std::move(cert);
  return out;
}

double validate_certificate(const WCertificate& cert, const FeasibleRegion& region, double tol,
                            std::optional<double> unbounded_radius) {
  double iota = cert.iota;
  if (cert.iota_unbounded) {
    if (!unbounded_radius.has_value() || !(*unbounded_radius > 0))
      throw std::invalid_argument(
          "validate_certificate: unbounded certificate needs a validation ball radius");
    iota = *unbounded_radius;
  }
  return eval_wgap(cert.center, cert.model, iota, region, tol);
}

double certificate_gap_bound(const WCertificate& cert, double mu) {
  if (!(mu > 0)) throw std::invalid_argument("certificate_gap_bound: mu must be > 0");
  if (cert.iota_unbounded) return 2.0 * cert.delta_used;
  return std::max(cert.iota * cert.nu, 2.0 * cert.nu * cert.nu / mu);
}

double certificate_distance_bound(const WCertificate& cert, double mu) {
  if (!(mu > 0)) throw std::invalid_argument("certificate_distance_bound: mu must be > 0");
  if (cert.iota_unbounded)
    throw std::invalid_argument(
        "certificate_distance_bound: undefined for unbounded certificates");
  return std::max(cert.iota, cert.nu / mu);
}

double moreau_bound_from_cert(const WCertificate& cert, double rho) {
  if (!(rho > 0)) throw std::invalid_argument("moreau_bound_from_cert: rho must be > 0");
  if (cert.iota_unbounded)
    throw std::invalid_argument("moreau_bound_from_cert: undefined for unbounded certificates");
  return 2.0 * cert.nu + 4.0 * cert.iota * rho;
}

double goldstein_norm_from_cert(const WCertificate& cert, const FeasibleRegion& region,
                                double tol) {
  if (region.kind() != FeasibleRegion::Kind::kWholeSpace)
    throw std::invalid_argument("goldstein_norm_from_cert: unconstrained regions only");
  if (cert.iota_unbounded)
    throw std::invalid_argument("goldstein_norm_from_cert: finite certificates only");
  const WGapResult wg = eval_wgap_full(cert.center, cert.model, cert.iota, region, tol);
  Vec g = Vec::Zero(cert.center.size());
  for (int i = 0; i < wg.lambda.size(); ++i) g += wg.lambda[i] * cert.model[i].gradient;
  return g.norm();
}

WCertificate transfer_cert_to_f(const WCertificate& cert, double rho) {
  if (!(rho >= 0)) throw std::invalid_argument("transfer_cert_to_f: rho must be >= 0");
  if (cert.iota_unbounded)
    throw std::invalid_argument("transfer_cert_to_f: finite certificates only");
  if (cert.nu < 2.0 * cert.iota * rho - 1e-12 * (1.0 + cert.nu))
    throw std::invalid_argument(
        "transfer_cert_to_f: nu < 2 iota rho, the surrogate certificate does not transfer "
        "(misspecified rho?)");

  WCertificate f = cert;
  f.nu = 2.0 * cert.nu;
  for (Cut& c : f.model) c = to_base_cut(c, cert.center, rho);
  for (OracleSample& s : f.points) {
    s.fx -= rho * (s.x - cert.center).squaredNorm();
    s.cut = to_base_cut(s.cut, cert.center, rho);
  }
  return f;
}

}  // namespace pwsbl
