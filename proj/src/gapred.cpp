#include "pwsbl/gapred.hpp"

#include <algorithm>
#include <cmath>

namespace pwsbl {

double empirical_smoothness(const OracleSample& sample_r, const OracleSample& sample_l,
                            double slack) {
  if (slack < 0) throw std::invalid_argument("empirical_smoothness: slack must be >= 0");
  const double d2 = (sample_r.x - sample_l.x).squaredNorm();
  if (d2 == 0.0)
    throw std::invalid_argument("empirical_smoothness: coincident points");
  const double num = sample_r.fx - sample_l.cut.support(sample_r.x) - slack;
  return std::max(0.0, 2.0 * num / d2);
}

void dp_update(GapState& state, long t, int m, double delta_t) {
  if (static_cast<long>(state.samples.size()) < t + 2)
    throw std::invalid_argument("dp_update: sample x^{t+1} missing");
  if (static_cast<long>(state.S_r.size()) != t + 1 ||
      static_cast<long>(state.S_l.size()) != t + 1)
    throw std::invalid_argument("dp_update: state arrays out of step");

  const double slack = delta_t / 6.0;
  const long lo = std::max<long>(0, t + 1 - m);
  const OracleSample& xr = state.samples[t + 1];

  double best = state.S_l[t];  // no informative pair: carry the running progress
  long arg = -1;
  for (long q = lo; q <= t; ++q) {
    const OracleSample& xl = state.samples[q];
    const double d2 = (xr.x - xl.x).squaredNorm();
    if (d2 <= 1e-28 * (1.0 + xr.x.squaredNorm())) continue;  // coincident
    const double num = xr.fx - xl.cut.support(xr.x) - slack;
    const double Lt = std::max(0.0, 2.0 * num / d2);
    const double gain = (Lt > 0.0) ? 1.0 / (static_cast<double>(t + 1 - q) * Lt) : kInf;
    const double cand = state.S_l[q] + gain;
    if (cand > best) {
      best = cand;
      arg = q;
    }
  }
  state.S_r.push_back(best);
  if (state.dp_from.empty()) state.dp_from.push_back(-1);  // index 0
  state.dp_from.push_back(arg);
  if (state.sl_arg.empty()) state.sl_arg.push_back(0);
  if (best > state.S_l[t]) {
    state.S_l.push_back(best);
    state.sl_arg.push_back(t + 1);
  } else {
    state.S_l.push_back(state.S_l[t]);
    state.sl_arg.push_back(state.sl_arg[t]);
  }
  state.slacks.push_back(slack);
}

namespace {

// Projection with graceful degradation: when the full bundle's level set is
// numerically out of reach (near-dependent cuts with a feasible sliver at
// astronomic distance), retry on newest-suffix sub-bundles.  A superset
// level set keeps every soundness property of the step; a single recent
// halfspace is always solvable.
LevelProjectionResult projection_with_fallback(const Vec& y, std::vector<Cut> cuts,
                                               double level, const FeasibleRegion& region,
                                               double tol) {
  for (;;) {
    try {
      return project_onto_level_set(y, cuts, level, region, tol);
    } catch (const SolverError&) {
      if (cuts.size() <= 1) throw;
      const std::size_t keep = cuts.size() / 2;
      cuts.erase(cuts.begin(), cuts.end() - keep);
    }
  }
}

GRPairStats backtrack_dp(const GapState& st, long iterations, double mu) {
  GRPairStats out;
  if (iterations <= 0 || st.S_l.size() <= 1) return out;
  const long T = std::min<long>(iterations, static_cast<long>(st.S_l.size()) - 1);
  out.S_final = st.S_l[T];

  long r = st.sl_arg[T];
  while (r > 0 && st.dp_from[r] >= 0) {
    const long l = st.dp_from[r];
    out.pairs.emplace_back(l, r);
    if (l == 0) break;
    r = st.sl_arg[l];
  }
  std::reverse(out.pairs.begin(), out.pairs.end());
  if (out.pairs.empty()) return out;

  double inv = 0.0, winv = 0.0;
  bool free_pair = false;  // a pair with zero empirical smoothness
  for (auto [l, rr] : out.pairs) {
    const double len = static_cast<double>(rr - l);
    inv += 1.0 / len;
    const double Lt = empirical_smoothness(st.samples[rr], st.samples[l], st.slacks[rr - 1]);
    if (Lt > 0.0)
      winv += 1.0 / (len * Lt);
    else
      free_pair = true;
  }
  const double p = static_cast<double>(out.pairs.size());
  out.kappa_bar = static_cast<double>(T) / p;
  out.sigma_bar = p / inv;
  out.L_bar = free_pair ? 0.0 : inv / winv;
  out.iteration_bound =
      free_pair ? 0.0 : std::ceil(3.0 * out.kappa_bar * out.sigma_bar * out.L_bar / mu);
  return out;
}

}  // namespace

GRResult gap_reduction(double mu, const Vec& x0, double fbar, double funder, int m,
                       const Objective& obj, const GROptions& opts) {
  if (!(mu > 0)) throw std::invalid_argument("gap_reduction: mu must be > 0");
  if (m < 1) throw std::invalid_argument("gap_reduction: m must be >= 1");
  if (!(funder <= fbar) || !std::isfinite(funder) || !std::isfinite(fbar))
    throw std::invalid_argument("gap_reduction: requires finite funder <= fbar");

  GRResult res;
  GapState& st = res.state;
  Bundle bundle(m);

  OracleSample s0 = opts.initial_sample
                        ? *opts.initial_sample
                        : obj.eval(x0, opts.perturbation_radius, make_rng(opts.seed, 0));
  if ((s0.x - x0).norm() > 1e-7 * (1.0 + x0.norm()))
    throw std::invalid_argument("gap_reduction: initial sample does not match x0");

  st.fbar = fbar;
  st.xbar = x0;
  st.funder = funder;
  st.samples.push_back(s0);
  res.incumbent = s0;
  res.inner.samples.push_back(s0);
  st.dp_from.push_back(-1);
  st.sl_arg.push_back(0);

  Cut c0 = s0.cut;
  c0.birth = 0;
  bundle.push(c0);

  const double delta0 = fbar - funder;
  auto push_record = [&](long t, const Vec& x, double fx, int piece, double level, double kkt,
                         TraceEvent ev) {
    TraceRecord r;
    r.iter = t;
    r.x = x;
    r.fx = fx;
    r.level = level;
    r.piece = piece;
    r.kkt_residual = kkt;
    r.event = ev;
    r.fbar = st.fbar;
    r.funder = st.funder;
    res.inner.records.push_back(r);
  };

  auto finalize = [&](GRResult::Stop stop, RunStatus status) -> GRResult& {
    res.stop = stop;
    res.status = status;
    res.x_plus = st.xbar;
    res.fbar_plus = st.fbar;
    res.funder_plus = st.funder;
    res.dp = backtrack_dp(st, res.iterations, mu);
    res.inner.status = status;
    return res;
  };

  if (delta0 <= 0)
    return finalize(GRResult::Stop::kGapTrigger, RunStatus::kConverged);

  std::optional<Ball> trust;
  if (opts.trust_ball) trust = Ball{x0, std::sqrt(2.0 * delta0 / mu)};

  double delta_prev = delta0;
  for (long t = 0; t < opts.max_inner; ++t) {
    const double level = (2.0 / 3.0) * st.funder + (1.0 / 3.0) * st.fbar;
    st.levels.push_back(level);

    LevelProjectionResult proj;
    try {
      proj = projection_with_fallback(st.samples.back().x, bundle.snapshot(), level, obj.region,
                                      opts.projection_tol);
    } catch (const SolverError& e) {
      res.inner.message = e.what();
      res.iterations = t;
      return finalize(GRResult::Stop::kNone, RunStatus::kSolverFailure);
    }

    if (!proj.feasible()) {
      // Empty level set proves min psi > level: the level itself becomes a
      // valid lower bound and the gap drops to exactly (2/3) Delta_t.
      st.funder = std::max(st.funder, level);
      res.iterations = t;
      push_record(t, st.samples.back().x, st.samples.back().fx, st.samples.back().piece, level,
                  0.0, TraceEvent::kBoundUpdate);
      return finalize(GRResult::Stop::kGapTrigger, RunStatus::kConverged);
    }

    OracleSample s = obj.eval(proj.point, opts.perturbation_radius, make_rng(opts.seed, t + 1));
    st.samples.push_back(s);
    res.inner.samples.push_back(s);
    Cut c = s.cut;
    c.birth = t + 1;
    bundle.push(c);

    if (s.fx < st.fbar) {  // strict: exact ties keep the earlier incumbent
      st.fbar = s.fx;
      st.xbar = s.x;
      res.incumbent = s;
    }

    bool bound_event = false;
    try {
      // opportunistic probe: a light budget suffices, the unbounded
      // indicator just skips the update
      const MinMaxResult mm = min_max_affine(bundle.snapshot(), obj.region, trust,
                                             opts.minmax_tol, MinMaxBudget::light());
      if (mm.bounded && mm.value > st.funder) {
        st.funder = mm.value;
        bound_event = true;
      }
    } catch (const SolverError&) {
      // lower-bound refinement skipped this round
    }

    dp_update(st, t, m, delta_prev);
    res.iterations = t + 1;
    push_record(t, s.x, s.fx, s.piece, level, proj.kkt_residual,
                bound_event ? TraceEvent::kBoundUpdate : TraceEvent::kStep);

    const double delta_now = st.delta();
    if (delta_now <= (2.0 / 3.0) * delta0)
      return finalize(GRResult::Stop::kGapTrigger, RunStatus::kConverged);
    if (st.S_r[t + 1] >= 6.0 / mu) {
      st.funder = *std::min_element(st.levels.begin(), st.levels.end());
      push_record(t, s.x, s.fx, s.piece, level, proj.kkt_residual, TraceEvent::kBoundUpdate);
      return finalize(GRResult::Stop::kSrTrigger, RunStatus::kConverged);
    }
    delta_prev = delta_now;
  }

  res.inner.message = "gap_reduction: inner iteration cap reached";
  return finalize(GRResult::Stop::kNone, RunStatus::kIterLimit);
}

BlMuResult bl_mu_objective(const Objective& obj, const Vec& x0, double mu, int m, double eps,
                           const BlMuOptions& opts) {
  if (!(mu > 0) || !(eps > 0))
    throw std::invalid_argument("bl_mu: mu and eps must be > 0");

  BlMuResult out;
  OracleSample inc = obj.eval(x0, opts.perturbation_radius, make_rng(opts.seed, 0));
  double fbar = inc.fx;
  double funder = inc.fx - 2.0 * inc.cut.gradient.squaredNorm() / mu;
  out.delta0 = fbar - funder;
  Vec x = x0;

  const long cap =
      (out.delta0 <= eps)
          ? 0
          : static_cast<long>(std::ceil(std::log(out.delta0 / eps) / std::log(1.5))) +
                opts.max_outer_slack;

  out.trace.samples.push_back(inc);
  long iter_base = 0;
  for (long s = 0;; ++s) {
    if (fbar - funder <= eps) {
      out.status = RunStatus::kConverged;
      break;
    }
    if (s >= cap) {
      out.status = RunStatus::kIterLimit;
      out.trace.message = "bl_mu: outer iteration cap reached";
      break;
    }
    GROptions go;
    go.perturbation_radius = opts.perturbation_radius;
    go.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(s) + 1);
    go.projection_tol = opts.projection_tol;
    go.minmax_tol = opts.minmax_tol;
    go.initial_sample = inc;
    GRResult gr = gap_reduction(mu, x, fbar, funder, m, obj, go);

    for (std::size_t i = 1; i < gr.inner.samples.size(); ++i)
      out.trace.samples.push_back(gr.inner.samples[i]);
    for (TraceRecord r : gr.inner.records) {
      r.iter += iter_base;
      out.trace.records.push_back(r);
    }
    iter_base += gr.iterations;

    out.calls.push_back(std::move(gr));
    const GRResult& last = out.calls.back();
    out.outer++;
    if (last.status != RunStatus::kConverged) {
      out.status = last.status;
      out.trace.message = last.inner.message;
      x = last.x_plus;
      fbar = last.fbar_plus;
      funder = last.funder_plus;
      break;
    }
    x = last.x_plus;
    fbar = last.fbar_plus;
    funder = last.funder_plus;
    inc = last.incumbent;
  }

  out.xhat = x;
  out.fbar = fbar;
  out.funder = funder;
  out.trace.status = out.status;
  return out;
}

BlMuResult bl_mu(const ProblemInstance& instance, const Vec& x0, double mu, int m, double eps,
                 const BlMuOptions& opts) {
  return bl_mu_objective(objective_of(instance), x0, mu, m, eps, opts);
}

}  // namespace pwsbl
