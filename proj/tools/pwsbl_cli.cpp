// pwsbl command-line tool.
//
//   pwsbl run <config.json> [--assert] [--seed S] [--out-dir D] [--tol T]
//   pwsbl demo [--out-dir D]            bundle-level vs Polyak on the 2-d example
//   pwsbl certify <instance.json> <x,y,...> --delta D [--m M] [--iota-max R]
//   pwsbl suite [--only i ...]          the acceptance battery
//
// Exit status: 0 on success; 1 on failed assertions / criteria; 2 on bad input.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pwsbl/acceptance.hpp"
#include "pwsbl/harness.hpp"

using namespace pwsbl;
namespace hn = pwsbl::harness;

namespace {

Vec parse_point(const std::string& text, int dim) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  if (dim > 0 && static_cast<int>(vals.size()) != dim)
    throw std::invalid_argument("point has wrong dimension");
  return Eigen::Map<Vec>(vals.data(), static_cast<long>(vals.size()));
}

int cmd_run(const std::string& config_path, bool enforce_asserts,
            std::optional<std::uint64_t> seed, std::optional<std::string> out_dir,
            std::optional<double> tol) {
  hn::ExperimentConfig cfg = hn::load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (out_dir) cfg.out_dir = *out_dir;
  if (tol) {
    cfg.tol_projection = *tol;
    cfg.tol_minmax = std::min(cfg.tol_minmax, *tol);
  }
  const hn::RunArtifacts art = hn::run_experiment(cfg);
  std::printf("trace:   %s\n", art.trace_path.string().c_str());
  std::printf("summary: %s\n", art.summary_path.string().c_str());
  std::printf("%s\n", art.summary.dump(2).c_str());
  if (enforce_asserts && !art.assertions_passed) {
    for (const std::string& msg : art.assertion_failures)
      std::fprintf(stderr, "assertion failed: %s\n", msg.c_str());
    return 1;
  }
  return 0;
}

int cmd_demo(const std::string& out_dir) {
  // The 2-d comparison: BL(m=3, fstar=0) against the Polyak-step
  // subgradient baseline, both from x0 = (1e-4, 1e-2).
  hn::ExperimentConfig cfg;
  cfg.generator = "demo_pws";
  cfg.algorithm = "bl";
  cfg.m = 3;
  cfg.fstar = 0.0;
  cfg.x0 = std::vector<double>{1e-4, 1e-2};
  cfg.max_iters = 100;
  cfg.stop_tol = 0.0;
  cfg.out_dir = out_dir;
  cfg.prefix = "demo_bl";
  const hn::RunArtifacts bl = hn::run_experiment(cfg);

  cfg.algorithm = "polyak_sgd";
  cfg.max_iters = 4000;
  cfg.prefix = "demo_polyak";
  const hn::RunArtifacts pk = hn::run_experiment(cfg);

  auto calls_to_dist = [](const std::filesystem::path& p, double target) -> long {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      if (j.contains("dist") && j["dist"].get<double>() <= target)
        return j["oracle_calls"].get<long>();
    }
    return -1;
  };
  const long bl_calls = calls_to_dist(bl.trace_path, 1e-8);
  const long pk_calls = calls_to_dist(pk.trace_path, 1e-8);
  std::printf("bundle-level: dist<=1e-8 after %ld oracle calls (trace %s)\n", bl_calls,
              bl.trace_path.string().c_str());
  if (pk_calls < 0)
    std::printf("polyak:       did not reach dist<=1e-8 within budget (trace %s)\n",
                pk.trace_path.string().c_str());
  else
    std::printf("polyak:       dist<=1e-8 after %ld oracle calls (trace %s)\n", pk_calls,
                pk.trace_path.string().c_str());
  return 0;
}

int cmd_certify(const std::string& instance_path, const std::string& point, double delta,
                int m, double iota_max, double tol, const std::string& out_dir) {
  std::ifstream in(instance_path);
  if (!in) {
    std::fprintf(stderr, "cannot open instance file %s\n", instance_path.c_str());
    return 2;
  }
  nlohmann::json j;
  in >> j;
  const ProblemInstance instance = hn::instance_from_json(j);
  const Vec xbar = parse_point(point, instance.dim());

  WcertOptions wo;
  wo.projection_tol = tol;
  const WcertOutcome out =
      wcert_search(objective_of(instance), xbar, delta, m, iota_max, wo);
  if (out.returned_false()) {
    std::printf("False (the gap estimate %g is smaller than the optimality gap?)\n", delta);
    return 1;
  }
  const WCertificate& c = *out.cert;
  const double validation_radius = 1e6;
  const double v = validate_certificate(c, instance.region(), tol,
                                        c.iota_unbounded
                                            ? std::optional<double>(validation_radius)
                                            : std::nullopt);
  // for an unbounded certificate, the bound at radius R is 2*Delta / R
  const double nu_eff =
      c.iota_unbounded ? 2.0 * c.delta_used / validation_radius : c.nu;
  if (c.iota_unbounded)
    std::printf("certificate: iota = unbounded, nu -> 0, gap bound 2*Delta = %.12g\n",
                2 * c.delta_used);
  else
    std::printf("certificate: iota = %.12g, nu = %.12g\n", c.iota, c.nu);
  std::printf("recomputed W-gap V_iota = %.12g (valid: %s)\n", v,
              v <= nu_eff + 1e-8 ? "yes" : "NO");
  std::filesystem::create_directories(out_dir);
  const auto path = std::filesystem::path(out_dir) / "certificate.json";
  std::ofstream co(path);
  co << hn::certificate_to_json(c).dump(2) << "\n";
  std::printf("written: %s\n", path.string().c_str());
  return 0;
}

int cmd_suite(const std::vector<int>& only) {
  acceptance::SuiteOptions opts;
  opts.only = only;
  opts.on_result = [](const acceptance::CriterionResult& r) {
    std::printf("[%s] %2d  %-38s %7.2fs  %s\n", r.passed ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds, r.detail.c_str());
    std::fflush(stdout);
  };
  const auto results = acceptance::run_all(opts);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bundle-level methods for piecewise-smooth optimization"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", instance_path, point;
  bool enforce_asserts = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir_opt;
  std::optional<double> tol_opt;
  double delta = 0.0, iota_max = kInf, tol = 1e-10;
  int m = 5;
  std::vector<int> only;

  auto* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("config", config_path, "JSON config (schema pwsbl-config/1)")->required();
  run->add_flag("--assert", enforce_asserts, "exit nonzero if config assertions fail");
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out-dir", out_dir_opt, "override the output directory");
  run->add_option("--tol", tol_opt, "override solver tolerances");

  auto* demo = app.add_subcommand("demo", "bundle-level vs Polyak on the 2-d example");
  demo->add_option("--out-dir", out_dir, "output directory");

  auto* certify = app.add_subcommand("certify", "standalone W-certificate search");
  certify->add_option("instance", instance_path, "instance JSON")->required();
  certify->add_option("point", point, "candidate point, comma-separated")->required();
  certify->add_option("--delta", delta, "optimality gap estimate")->required();
  certify->add_option("--m", m, "number of search points");
  certify->add_option("--iota-max", iota_max, "maximal search radius");
  certify->add_option("--tol", tol, "solver tolerance");
  certify->add_option("--out-dir", out_dir, "output directory");

  auto* suite = app.add_subcommand("suite", "run the acceptance battery");
  suite->add_option("--only", only, "criterion ids to run");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, enforce_asserts, seed, out_dir_opt, tol_opt);
    if (demo->parsed()) return cmd_demo(out_dir);
    if (certify->parsed())
      return cmd_certify(instance_path, point, delta, m, iota_max, tol, out_dir);
    if (suite->parsed()) return cmd_suite(only);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
