// harness.hpp
//
// Experiment plumbing: the Polyak-step subgradient baseline, JSON
// experiment configs (schema pwsbl-config/1), JSONL trace persistence, CSV
// export for plotting, and per-run summary reports.  Traces are pure
// functions of the config.

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pwsbl/adaptive.hpp"
#include "pwsbl/bundle.hpp"
#include "pwsbl/certify.hpp"
#include "pwsbl/core.hpp"
#include "pwsbl/gapred.hpp"
#include "pwsbl/problems.hpp"
#include "pwsbl/proximal.hpp"

namespace pwsbl::harness {

using nlohmann::json;

struct PolyakOptions {
  long max_iters = 1000;
  double stop_tol = 0.0;  // on f(x) - fstar
  std::uint64_t seed = 0;
};

// x^{t+1} = proj(x^t - ((f(x^t) - fstar) / ||g||^2) g); terminates early at
// a zero subgradient (the point is optimal).
Trace polyak_subgradient(const ProblemInstance& instance, const Vec& x0,
                         const PolyakOptions& opts = {});

struct ExperimentConfig {
  // problem
  std::string generator = "max_of_quadratics";
  int k = 3, n = 2;
  double L = 2.0, mu = 1.0, rho = 1.0;
  std::uint64_t problem_seed = 0;

  // algorithm
  std::string algorithm = "bl";  // bl|apx_bl|bl_mu|ippm|pf_bl_mu|pf_ippm|polyak_sgd
  int m = 5;
  std::optional<double> fstar;      // default: ground truth
  double mu_alg = 1.0;              // bl_mu
  double rho_alg = 1.0;             // ippm
  double mu_tilde = 1.0;            // pf_bl_mu
  double rho_tilde = 1.0;           // pf_ippm
  double eps = 1e-6;
  double perturbation_radius = 0.0;
  std::optional<std::vector<double>> x0;
  long max_iters = 500;
  double stop_tol = 0.0;

  // budget and outputs
  long max_oracle_calls = 1000000;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string prefix = "run";
  bool write_csv = true;
  double tol_projection = 1e-10;
  double tol_minmax = 1e-12;

  // --assert contract
  std::optional<double> assert_max_final_gap;
  std::optional<double> assert_max_final_dist;
  std::optional<long> assert_max_oracle_calls;
};

ExperimentConfig config_from_json(const json& j);
ExperimentConfig load_config(const std::string& path);
json config_to_json(const ExperimentConfig& cfg);
std::uint64_t config_hash(const json& j);

ProblemInstance build_instance(const ExperimentConfig& cfg);

struct RunArtifacts {
  std::filesystem::path trace_path;
  std::filesystem::path summary_path;
  std::filesystem::path csv_path;
  json summary;
  bool assertions_passed = true;
  std::vector<std::string> assertion_failures;
};

RunArtifacts run_experiment(const ExperimentConfig& cfg);

// Serialization helpers (also used by the CLI).
json instance_to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const json& j);
json certificate_to_json(const WCertificate& cert);
WCertificate certificate_from_json(const json& j);
json trace_record_to_json(const TraceRecord& r);
void write_trace_jsonl(const std::filesystem::path& path, const Trace& trace,
                       const json& header);
void write_trace_csv(const std::filesystem::path& path, const Trace& trace,
                     std::optional<double> fstar, const std::optional<Vec>& xstar);

// Summary fields shared by the CLI and the tests.
json summarize_trace(const ProblemInstance& instance, const Trace& trace);

}  // namespace pwsbl::harness
