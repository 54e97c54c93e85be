// adaptive.hpp
//
// Almost parameter-free drivers.  pf_bl_mu runs BL with a guessed QG
// modulus, checks each gap halving with a W-certificate search, and halves
// the guess whenever the search returns False.  pf_ippm runs the proximal
// loop with a guessed weak-convexity modulus and doubles it whenever the
// certificate is inconsistent with the observed descent.

#pragma once

#include "pwsbl/certify.hpp"
#include "pwsbl/core.hpp"
#include "pwsbl/gapred.hpp"
#include "pwsbl/problems.hpp"

namespace pwsbl {

struct PfBlOptions {
  std::optional<double> target_eps;  // extension: certificate-based stop (off by default)
  long max_restarts = 60;
  long max_oracle_calls = 2000000;
  double perturbation_radius = 0.0;
  std::uint64_t seed = 0;
  double projection_tol = 1e-10;
  double minmax_tol = 1e-12;
  long max_outer_per_guess = 4000;
};

struct PfBlStep {
  long restart = 0;    // restart phase index
  double guess = 0.0;  // mu guess in force
  Vec x;
  double fbar = 0.0, funder = 0.0;
  bool certificate_checked = false;
  bool certificate_false = false;
};

struct PfBlOutcome {
  RunStatus status = RunStatus::kBudgetExhausted;
  Vec x;
  double fbar = 0.0, funder = 0.0;
  long restarts = 0;
  std::vector<double> guesses;  // guesses tried, halving
  std::vector<PfBlStep> history;
  std::vector<WCertificate> certificates;
  long oracle_calls = 0;
};

PfBlOutcome pf_bl_mu(const ProblemInstance& instance, const Vec& x0, double mu_tilde, int m,
                     const PfBlOptions& opts = {});

struct PfIppmOptions {
  long max_restarts = 60;
  long max_oracle_calls = 4000000;
  double perturbation_radius = 0.0;
  std::uint64_t seed = 0;
  double projection_tol = 1e-10;
  double minmax_tol = 1e-12;
  long max_inner_gr = 400;
  long max_outer_per_guess = 100000;
};

struct PfIppmOutcome {
  RunStatus status = RunStatus::kBudgetExhausted;
  Vec xbar;
  std::optional<WCertificate> cert_f;  // (iota, nu_plus) certificate for f
  long restarts = 0;
  std::vector<double> guesses;  // guesses tried, doubling
  long oracle_calls = 0;
  std::vector<double> delta_bars;
};

PfIppmOutcome pf_ippm(const ProblemInstance& instance, const Vec& xbar0, double rho_tilde,
                      int m, double eps, const PfIppmOptions& opts = {});

}  // namespace pwsbl
