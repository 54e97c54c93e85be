#include "pwsbl/harness.hpp"

#include <fstream>

namespace pwsbl::harness {

Trace polyak_subgradient(const ProblemInstance& instance, const Vec& x0,
                         const PolyakOptions& opts) {
  if (!instance.truth().fstar.has_value())
    throw std::invalid_argument("polyak_subgradient: instance lacks ground-truth fstar");
  const double fstar = *instance.truth().fstar;
  const std::optional<Vec>& xstar = instance.truth().xstar;

  Trace trace;
  Vec x = instance.region().project(x0);
  for (long t = 0;; ++t) {
    const OracleSample s = instance.evaluate(x, 0.0, make_rng(opts.seed, t));
    trace.samples.push_back(s);
    TraceRecord rec;
    rec.iter = t;
    rec.x = x;
    rec.fx = s.fx;
    if (xstar) rec.dist_to_xstar = (x - *xstar).norm();
    rec.level = fstar;
    rec.piece = s.piece;
    rec.oracle_calls = instance.oracle_calls();
    trace.records.push_back(rec);

    const double gap = s.fx - fstar;
    const double g2 = s.cut.gradient.squaredNorm();
    if (gap <= opts.stop_tol || g2 == 0.0) {
      trace.status = RunStatus::kConverged;
      return trace;
    }
    if (t >= opts.max_iters) {
      trace.status = RunStatus::kIterLimit;
      return trace;
    }
    x = instance.region().project(x - (gap / g2) * s.cut.gradient);
  }
}

// ---------------------------------------------------------------------------
// Config.

namespace {

Vec vec_from_json(const json& j) {
  std::vector<double> v = j.get<std::vector<double>>();
  return Eigen::Map<Vec>(v.data(), static_cast<long>(v.size()));
}

json vec_to_json(const Vec& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw std::invalid_argument("config field '" + field + "': " + what);
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  if (j.value("schema", "pwsbl-config/1") != std::string("pwsbl-config/1"))
    config_error("schema", "expected pwsbl-config/1");

  const json problem = j.value("problem", json::object());
  c.generator = problem.value("generator", c.generator);
  static const std::vector<std::string> kGenerators = {"max_of_quadratics", "weakly_convex_max",
                                                       "demo_pws"};
  if (std::find(kGenerators.begin(), kGenerators.end(), c.generator) == kGenerators.end())
    config_error("problem.generator", "unknown generator '" + c.generator + "'");
  c.k = problem.value("k", c.k);
  c.n = problem.value("n", c.n);
  c.L = problem.value("L", c.L);
  c.mu = problem.value("mu", c.mu);
  c.rho = problem.value("rho", c.rho);
  c.problem_seed = problem.value("seed", c.problem_seed);

  const json alg = j.value("algorithm", json::object());
  c.algorithm = alg.value("name", c.algorithm);
  static const std::vector<std::string> kAlgorithms = {
      "bl", "apx_bl", "bl_mu", "ippm", "pf_bl_mu", "pf_ippm", "polyak_sgd"};
  if (std::find(kAlgorithms.begin(), kAlgorithms.end(), c.algorithm) == kAlgorithms.end())
    config_error("algorithm.name", "unknown algorithm '" + c.algorithm + "'");
  c.m = alg.value("m", c.m);
  if (c.m < 1) config_error("algorithm.m", "must be >= 1");
  if (alg.contains("fstar")) c.fstar = alg["fstar"].get<double>();
  c.mu_alg = alg.value("mu", c.mu);
  c.rho_alg = alg.value("rho", c.rho);
  c.mu_tilde = alg.value("mu_tilde", c.mu_alg);
  c.rho_tilde = alg.value("rho_tilde", c.rho_alg);
  c.eps = alg.value("eps", c.eps);
  c.perturbation_radius = alg.value("perturbation_radius", 0.0);
  if (c.perturbation_radius < 0) config_error("algorithm.perturbation_radius", "must be >= 0");
  if (alg.contains("x0")) c.x0 = alg["x0"].get<std::vector<double>>();
  c.max_iters = alg.value("max_iters", c.max_iters);
  c.stop_tol = alg.value("stop_tol", c.stop_tol);

  const json budget = j.value("budget", json::object());
  c.max_oracle_calls = budget.value("max_oracle_calls", c.max_oracle_calls);
  if (c.max_oracle_calls <= 0) config_error("budget.max_oracle_calls", "must be positive");

  const json output = j.value("output", json::object());
  c.out_dir = output.value("dir", c.out_dir);
  c.prefix = output.value("prefix", c.prefix);
  c.write_csv = output.value("csv", c.write_csv);

  const json tols = j.value("tolerances", json::object());
  c.tol_projection = tols.value("projection", c.tol_projection);
  c.tol_minmax = tols.value("minmax", c.tol_minmax);

  c.seed = j.value("seed", c.seed);

  const json asserts = j.value("assert", json::object());
  if (asserts.contains("max_final_gap")) c.assert_max_final_gap = asserts["max_final_gap"];
  if (asserts.contains("max_final_dist")) c.assert_max_final_dist = asserts["max_final_dist"];
  if (asserts.contains("max_oracle_calls")) c.assert_max_oracle_calls = asserts["max_oracle_calls"];
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["schema"] = "pwsbl-config/1";
  j["problem"] = {{"generator", c.generator}, {"k", c.k},   {"n", c.n},
                  {"L", c.L},                 {"mu", c.mu}, {"rho", c.rho},
                  {"seed", c.problem_seed}};
  json alg = {{"name", c.algorithm},
              {"m", c.m},
              {"mu", c.mu_alg},
              {"rho", c.rho_alg},
              {"mu_tilde", c.mu_tilde},
              {"rho_tilde", c.rho_tilde},
              {"eps", c.eps},
              {"perturbation_radius", c.perturbation_radius},
              {"max_iters", c.max_iters},
              {"stop_tol", c.stop_tol}};
  if (c.fstar) alg["fstar"] = *c.fstar;
  if (c.x0) alg["x0"] = *c.x0;
  j["algorithm"] = alg;
  j["budget"] = {{"max_oracle_calls", c.max_oracle_calls}};
  j["output"] = {{"dir", c.out_dir}, {"prefix", c.prefix}, {"csv", c.write_csv}};
  j["tolerances"] = {{"projection", c.tol_projection}, {"minmax", c.tol_minmax}};
  j["seed"] = c.seed;
  return j;
}

std::uint64_t config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

ProblemInstance build_instance(const ExperimentConfig& c) {
  if (c.generator == "max_of_quadratics")
    return make_max_of_quadratics(c.k, c.n, c.L, c.mu, c.problem_seed);
  if (c.generator == "weakly_convex_max")
    return make_weakly_convex_max(c.k, c.n, c.rho, c.problem_seed);
  if (c.generator == "demo_pws") return demo_pws();
  config_error("problem.generator", "unknown generator '" + c.generator + "'");
}

// ---------------------------------------------------------------------------
// Serialization.

json instance_to_json(const ProblemInstance& p) {
  json j;
  const Provenance& pr = p.provenance();
  j["generator"] = pr.generator;
  j["params"] = {{"k", pr.k}, {"n", pr.n}, {"L", pr.L},
                 {"mu", pr.mu}, {"rho", pr.rho}, {"seed", pr.seed}};
  json pieces = json::array();
  for (const QuadPiece& q : p.pieces())
    pieces.push_back({{"curv", q.curv},
                      {"center", vec_to_json(q.center)},
                      {"lin", vec_to_json(q.lin)},
                      {"off", q.off}});
  j["pieces"] = pieces;
  switch (p.region().kind()) {
    case FeasibleRegion::Kind::kWholeSpace:
      j["region"] = {{"type", "whole_space"}, {"dim", p.dim()}};
      break;
    case FeasibleRegion::Kind::kBox:
      j["region"] = {{"type", "box"},
                     {"lo", vec_to_json(p.region().lo())},
                     {"hi", vec_to_json(p.region().hi())}};
      break;
    case FeasibleRegion::Kind::kBall:
      j["region"] = {{"type", "ball"},
                     {"center", vec_to_json(p.region().center())},
                     {"radius", p.region().radius()}};
      break;
  }
  json truth;
  const GroundTruth& t = p.truth();
  if (t.fstar) truth["fstar"] = *t.fstar;
  if (t.xstar) truth["xstar"] = vec_to_json(*t.xstar);
  truth["xstar_unique"] = t.xstar_unique;
  if (t.mu) truth["mu"] = *t.mu;
  if (t.L) truth["L"] = *t.L;
  if (t.k) truth["k"] = *t.k;
  if (t.rho) truth["rho"] = *t.rho;
  if (t.M) truth["M"] = *t.M;
  truth["reference_box_halfwidth"] = t.reference_box_halfwidth;
  j["truth"] = truth;
  j["convex"] = p.convex();
  return j;
}

ProblemInstance instance_from_json(const json& j) {
  const std::string gen = j.value("generator", "custom");
  if (j.contains("params")) {
    const json& pr = j["params"];
    if (gen == "max_of_quadratics")
      return make_max_of_quadratics(pr["k"], pr["n"], pr["L"], pr["mu"], pr["seed"]);
    if (gen == "weakly_convex_max")
      return make_weakly_convex_max(pr["k"], pr["n"], pr["rho"], pr["seed"]);
    if (gen == "demo_pws") return demo_pws();
  }

  std::vector<QuadPiece> pieces;
  for (const json& q : j.at("pieces"))
    pieces.push_back({q.at("curv"), vec_from_json(q.at("center")), vec_from_json(q.at("lin")),
                      q.at("off")});
  const json& reg = j.at("region");
  FeasibleRegion region = FeasibleRegion::whole_space(1);
  const std::string type = reg.at("type");
  if (type == "whole_space")
    region = FeasibleRegion::whole_space(reg.at("dim"));
  else if (type == "box")
    region = FeasibleRegion::box(vec_from_json(reg.at("lo")), vec_from_json(reg.at("hi")));
  else if (type == "ball")
    region = FeasibleRegion::ball(vec_from_json(reg.at("center")), reg.at("radius"));
  else
    throw std::invalid_argument("instance region type unknown: " + type);

  GroundTruth t;
  if (j.contains("truth")) {
    const json& tr = j["truth"];
    if (tr.contains("fstar")) t.fstar = tr["fstar"].get<double>();
    if (tr.contains("xstar")) t.xstar = vec_from_json(tr["xstar"]);
    t.xstar_unique = tr.value("xstar_unique", false);
    if (tr.contains("mu")) t.mu = tr["mu"].get<double>();
    if (tr.contains("L")) t.L = tr["L"].get<double>();
    if (tr.contains("k")) t.k = tr["k"].get<int>();
    if (tr.contains("rho")) t.rho = tr["rho"].get<double>();
    if (tr.contains("M")) t.M = tr["M"].get<double>();
    t.reference_box_halfwidth = tr.value("reference_box_halfwidth", 0.0);
  }
  return ProblemInstance(std::move(pieces), std::move(region), std::move(t),
                         j.value("convex", true));
}

json certificate_to_json(const WCertificate& c) {
  json j;
  j["center"] = vec_to_json(c.center);
  j["iota_unbounded"] = c.iota_unbounded;
  j["iota"] = c.iota;
  j["nu"] = c.nu;
  j["delta_used"] = c.delta_used;
  if (c.Ltilde) j["Ltilde"] = *c.Ltilde;
  auto cut_json = [](const Cut& cut) {
    return json{{"center", vec_to_json(cut.center)},
                {"value", cut.value},
                {"gradient", vec_to_json(cut.gradient)},
                {"birth", cut.birth},
                {"piece", cut.piece}};
  };
  json pts = json::array();
  for (const OracleSample& s : c.points)
    pts.push_back({{"x", vec_to_json(s.x)},
                   {"fx", s.fx},
                   {"radius", s.perturbation_radius},
                   {"piece", s.piece},
                   {"cut", cut_json(s.cut)}});
  j["points"] = pts;
  json model = json::array();
  for (const Cut& cut : c.model) model.push_back(cut_json(cut));
  j["model"] = model;
  return j;
}

WCertificate certificate_from_json(const json& j) {
  WCertificate c;
  c.center = vec_from_json(j.at("center"));
  c.iota_unbounded = j.value("iota_unbounded", false);
  c.iota = j.value("iota", 0.0);
  c.nu = j.value("nu", 0.0);
  c.delta_used = j.value("delta_used", 0.0);
  if (j.contains("Ltilde")) c.Ltilde = j["Ltilde"].get<double>();
  auto cut_from = [](const json& cj) {
    Cut cut;
    cut.center = vec_from_json(cj.at("center"));
    cut.value = cj.at("value");
    cut.gradient = vec_from_json(cj.at("gradient"));
    cut.birth = cj.value("birth", 0L);
    cut.piece = cj.value("piece", -1);
    return cut;
  };
  for (const json& pj : j.value("points", json::array())) {
    OracleSample s;
    s.x = vec_from_json(pj.at("x"));
    s.fx = pj.at("fx");
    s.perturbation_radius = pj.value("radius", 0.0);
    s.piece = pj.value("piece", -1);
    s.cut = cut_from(pj.at("cut"));
    c.points.push_back(std::move(s));
  }
  for (const json& cj : j.at("model")) c.model.push_back(cut_from(cj));
  return c;
}

json trace_record_to_json(const TraceRecord& r) {
  json j;
  j["type"] = "record";
  j["iter"] = r.iter;
  j["x"] = vec_to_json(r.x);
  j["fx"] = r.fx;
  if (r.dist_to_xstar) j["dist"] = *r.dist_to_xstar;
  j["level"] = r.level;
  j["piece"] = r.piece;
  j["kkt"] = r.kkt_residual;
  j["event"] = to_string(r.event);
  if (r.event == TraceEvent::kMatchingPair) j["pair"] = {r.pair_l, r.pair_r};
  if (r.fbar) j["fbar"] = *r.fbar;
  if (r.funder) j["funder"] = *r.funder;
  j["oracle_calls"] = r.oracle_calls;
  return j;
}

void write_trace_jsonl(const std::filesystem::path& path, const Trace& trace,
                       const json& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path.string());
  json h = header;
  h["type"] = "header";
  h["schema"] = "pwsbl-trace/1";
  h["status"] = to_string(trace.status);
  out << h.dump() << "\n";
  for (const TraceRecord& r : trace.records) out << trace_record_to_json(r).dump() << "\n";
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace,
                     std::optional<double> fstar, const std::optional<Vec>& xstar) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv file: " + path.string());
  out << "iter,oracle_calls,f_gap,dist,event\n";
  char buf[64];
  for (const TraceRecord& r : trace.records) {
    out << r.iter << "," << r.oracle_calls << ",";
    if (fstar) {
      std::snprintf(buf, sizeof buf, "%.17g", r.fx - *fstar);
      out << buf;
    }
    out << ",";
    if (r.dist_to_xstar) {
      std::snprintf(buf, sizeof buf, "%.17g", *r.dist_to_xstar);
      out << buf;
    } else if (xstar) {
      std::snprintf(buf, sizeof buf, "%.17g", (r.x - *xstar).norm());
      out << buf;
    }
    out << "," << to_string(r.event) << "\n";
  }
}

json summarize_trace(const ProblemInstance& instance, const Trace& trace) {
  json s;
  s["status"] = to_string(trace.status);
  s["iterations"] = trace.iterations();
  s["oracle_calls"] = instance.oracle_calls();
  if (!trace.samples.empty()) {
    s["best_f"] = trace.best_fx();
    if (instance.truth().fstar) s["final_gap"] = trace.samples.back().fx - *instance.truth().fstar;
    if (instance.truth().xstar) {
      double best = kInf, last = kInf;
      for (const OracleSample& smp : trace.samples) {
        const double d = (smp.x - *instance.truth().xstar).norm();
        best = std::min(best, d);
        last = d;
      }
      s["final_dist"] = last;
      s["best_dist"] = best;
    }
    if (instance.truth().k) {
      bool labeled = true;
      for (const OracleSample& smp : trace.samples) labeled = labeled && smp.piece >= 0;
      if (labeled) {
        const MatchingStats st = detect_matching_pairs(trace, *instance.truth().k, 0.0);
        s["matching"] = {{"pairs", st.p},
                         {"kappa_bar", st.kappa_bar},
                         {"sigma_bar", st.sigma_bar},
                         {"L_bar", std::isfinite(st.L_bar) ? st.L_bar : -1.0}};
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// run_experiment.

namespace {

Vec default_start(const ProblemInstance& p, std::uint64_t seed) {
  RngState rng = make_rng(seed, 0x737461727479ULL);
  Vec x(p.dim());
  for (int i = 0; i < p.dim(); ++i) x[i] = 2.0 * uniform01(rng) - 1.0;
  return p.region().project(x);
}

Trace history_trace(const PfBlOutcome& out, const ProblemInstance& p) {
  Trace t;
  for (const PfBlStep& st : out.history) {
    TraceRecord r;
    r.iter = static_cast<long>(t.records.size());
    r.x = st.x;
    r.fx = st.fbar;
    if (p.truth().xstar) r.dist_to_xstar = (st.x - *p.truth().xstar).norm();
    r.fbar = st.fbar;
    r.funder = st.funder;
    r.event = st.certificate_false    ? TraceEvent::kRestart
              : st.certificate_checked ? TraceEvent::kCertificate
                                       : TraceEvent::kStep;
    t.records.push_back(r);
  }
  t.status = out.status;
  return t;
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
  const ProblemInstance instance = build_instance(cfg);
  instance.reset_oracle_calls();

  Vec x0 = cfg.x0 ? Eigen::Map<const Vec>(cfg.x0->data(), static_cast<long>(cfg.x0->size()))
                  : default_start(instance, cfg.seed);
  if (x0.size() != instance.dim())
    config_error("algorithm.x0", "dimension mismatch with the generated problem");
  x0 = instance.region().project(x0);

  Trace trace;
  json extra;

  if (cfg.algorithm == "bl" || cfg.algorithm == "apx_bl") {
    double fstar = cfg.fstar ? *cfg.fstar
                             : (instance.truth().fstar ? *instance.truth().fstar : 0.0);
    if (!cfg.fstar && !instance.truth().fstar)
      config_error("algorithm.fstar", "required when the instance has no ground truth");
    BlOptions o;
    o.max_iters = cfg.max_iters;
    o.stop_tol = cfg.stop_tol;
    o.perturbation_radius = cfg.perturbation_radius;
    o.seed = cfg.seed;
    o.projection_tol = cfg.tol_projection;
    trace = run_bl(instance, cfg.m, fstar, x0, o);
    // tag the steps that close a matching pair
    if (instance.truth().k) {
      bool labeled = true;
      for (const OracleSample& smp : trace.samples) labeled = labeled && smp.piece >= 0;
      if (labeled) {
        const MatchingStats st =
            detect_matching_pairs(trace.piece_labels(), *instance.truth().k);
        for (auto [l, rr] : st.pairs) {
          if (rr < static_cast<long>(trace.records.size())) {
            trace.records[rr].event = TraceEvent::kMatchingPair;
            trace.records[rr].pair_l = l;
            trace.records[rr].pair_r = rr;
          }
        }
      }
    }
  } else if (cfg.algorithm == "polyak_sgd") {
    PolyakOptions o;
    o.max_iters = cfg.max_iters;
    o.stop_tol = cfg.stop_tol;
    o.seed = cfg.seed;
    trace = polyak_subgradient(instance, x0, o);
  } else if (cfg.algorithm == "bl_mu") {
    BlMuOptions o;
    o.perturbation_radius = cfg.perturbation_radius;
    o.seed = cfg.seed;
    o.projection_tol = cfg.tol_projection;
    o.minmax_tol = cfg.tol_minmax;
    const BlMuResult r = bl_mu(instance, x0, cfg.mu_alg, cfg.m, cfg.eps, o);
    trace = r.trace;
    extra["outer_gr_calls"] = r.outer;
    extra["final_fbar"] = r.fbar;
    extra["final_funder"] = r.funder;
    extra["bound_gap"] = r.fbar - r.funder;
  } else if (cfg.algorithm == "ippm") {
    IppmOptions o;
    o.perturbation_radius = cfg.perturbation_radius;
    o.seed = cfg.seed;
    o.projection_tol = cfg.tol_projection;
    o.minmax_tol = cfg.tol_minmax;
    const IppmOutcome r = ippm(instance, x0, cfg.rho_alg, cfg.m, cfg.eps, o);
    trace = r.trace;
    extra["outer_iterations"] = r.outer;
    extra["delta_bars"] = r.delta_bars;
  } else if (cfg.algorithm == "pf_bl_mu") {
    PfBlOptions o;
    o.target_eps = cfg.eps;
    o.max_oracle_calls = cfg.max_oracle_calls;
    o.perturbation_radius = cfg.perturbation_radius;
    o.seed = cfg.seed;
    o.projection_tol = cfg.tol_projection;
    o.minmax_tol = cfg.tol_minmax;
    const PfBlOutcome r = pf_bl_mu(instance, x0, cfg.mu_tilde, cfg.m, o);
    trace = history_trace(r, instance);
    extra["restarts"] = r.restarts;
    extra["guesses"] = r.guesses;
    json certs = json::array();
    for (const WCertificate& c : r.certificates) certs.push_back(certificate_to_json(c));
    extra["certificates"] = certs;
  } else if (cfg.algorithm == "pf_ippm") {
    PfIppmOptions o;
    o.max_oracle_calls = cfg.max_oracle_calls;
    o.perturbation_radius = cfg.perturbation_radius;
    o.seed = cfg.seed;
    o.projection_tol = cfg.tol_projection;
    o.minmax_tol = cfg.tol_minmax;
    const PfIppmOutcome r = pf_ippm(instance, x0, cfg.rho_tilde, cfg.m, cfg.eps, o);
    TraceRecord rec;
    rec.iter = 0;
    rec.x = r.xbar;
    rec.fx = instance.value(r.xbar);
    rec.event = TraceEvent::kCertificate;
    trace.records.push_back(rec);
    trace.status = r.status;
    extra["restarts"] = r.restarts;
    extra["guesses"] = r.guesses;
    if (r.cert_f) extra["certificate"] = certificate_to_json(*r.cert_f);
  } else {
    config_error("algorithm.name", "unknown algorithm '" + cfg.algorithm + "'");
  }

  RunArtifacts art;
  std::filesystem::create_directories(cfg.out_dir);
  const json cfg_json = config_to_json(cfg);
  const std::uint64_t hash = config_hash(cfg_json);

  json header;
  header["config"] = cfg_json;
  header["config_hash"] = hash;
  header["instance"] = instance_to_json(instance);

  art.trace_path = std::filesystem::path(cfg.out_dir) / (cfg.prefix + ".trace.jsonl");
  write_trace_jsonl(art.trace_path, trace, header);

  json summary = summarize_trace(instance, trace);
  summary["config_hash"] = hash;
  summary["algorithm"] = cfg.algorithm;
  for (auto& [key, val] : extra.items()) summary[key] = val;
  art.summary = summary;
  art.summary_path = std::filesystem::path(cfg.out_dir) / (cfg.prefix + ".summary.json");
  {
    std::ofstream out(art.summary_path);
    out << summary.dump(2) << "\n";
  }

  if (cfg.write_csv) {
    art.csv_path = std::filesystem::path(cfg.out_dir) / (cfg.prefix + ".csv");
    write_trace_csv(art.csv_path, trace, instance.truth().fstar, instance.truth().xstar);
  }

  // --assert contract.
  auto fail = [&](const std::string& msg) {
    art.assertions_passed = false;
    art.assertion_failures.push_back(msg);
  };
  if (cfg.assert_max_final_gap && summary.contains("final_gap") &&
      summary["final_gap"].get<double>() > *cfg.assert_max_final_gap)
    fail("final_gap exceeds " + std::to_string(*cfg.assert_max_final_gap));
  if (cfg.assert_max_final_dist && summary.contains("final_dist") &&
      summary["final_dist"].get<double>() > *cfg.assert_max_final_dist)
    fail("final_dist exceeds " + std::to_string(*cfg.assert_max_final_dist));
  if (cfg.assert_max_oracle_calls &&
      summary["oracle_calls"].get<long>() > *cfg.assert_max_oracle_calls)
    fail("oracle_calls exceed " + std::to_string(*cfg.assert_max_oracle_calls));
  return art;
}

}  // namespace pwsbl::harness
