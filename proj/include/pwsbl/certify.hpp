// certify.hpp
//
// The W-stationarity certificate: the level-set search that produces one,
// revalidation of the normalized model descent V_iota, and the optimality,
// distance, Moreau, and Goldstein bounds it implies.
//
// An unbounded radius is a dedicated marker (the search proved the model
// is bounded below by the level everywhere), never a sentinel float;
// downstream formulas take the limit explicitly.

#pragma once

#include "pwsbl/core.hpp"
#include "pwsbl/gapred.hpp"
#include "pwsbl/geometry.hpp"
#include "pwsbl/problems.hpp"

namespace pwsbl {

struct WCertificate {
  Vec center;
  std::vector<OracleSample> points;  // search points, center sample first
  bool iota_unbounded = false;
  double iota = 0.0;  // finite radius, meaningful when !iota_unbounded
  double nu = 0.0;    // 0 for unbounded certificates (limit of 2 Delta / M)
  std::vector<Cut> model;  // cuts defining psi, center cut first
  double delta_used = 0.0;
  std::optional<double> Ltilde;
};

struct WcertOptions {
  double projection_tol = 1e-10;
  double perturbation_radius = 0.0;  // radius for the search-point cuts; center cut is exact
  std::uint64_t seed = 0;
};

struct WcertOutcome {
  enum class Exit { kIotaMax, kInfeasible, kFinal, kFalse };
  Exit exit = Exit::kFalse;
  std::optional<WCertificate> cert;  // empty iff exit == kFalse

  bool returned_false() const { return exit == Exit::kFalse; }
};

// The certificate search: projects the center onto level sets at
// l = f(center) - 2 Delta, growing the model one cut per step.  Pass
// iota_max = kInf for the unconstrained-radius variant.
WcertOutcome wcert_search(const Objective& obj, const Vec& xbar, double Delta, int m,
                          double iota_max, const WcertOptions& opts = {});

// Recomputes V_iota on the certificate's model; a valid certificate has
// V_iota <= nu + tol.  Unbounded certificates are validated on a
// caller-supplied ball radius.
double validate_certificate(const WCertificate& cert, const FeasibleRegion& region,
                            double tol = 1e-10,
                            std::optional<double> unbounded_radius = std::nullopt);

// max{iota nu, 2 nu^2 / mu}; 2 Delta for unbounded certificates.
double certificate_gap_bound(const WCertificate& cert, double mu);

// max{iota, nu / mu}; finite certificates only.
double certificate_distance_bound(const WCertificate& cert, double mu);

// 2 nu + 4 iota rho; finite certificates only.
double moreau_bound_from_cert(const WCertificate& cert, double rho);

// Norm of the dual-averaged model gradient; unconstrained regions only,
// and bounded by nu for a valid certificate.
double goldstein_norm_from_cert(const WCertificate& cert, const FeasibleRegion& region,
                                double tol = 1e-10);

// Lifts a certificate computed on the surrogate P = f + rho||.-center||^2
// back to f: same points and radius, nu doubled, cuts inverse-transformed.
// Requires nu >= 2 iota rho (signals a misspecified rho otherwise).
WCertificate transfer_cert_to_f(const WCertificate& cert, double rho);

}  // namespace pwsbl
