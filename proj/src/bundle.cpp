#include "pwsbl/bundle.hpp"

#include "pwsbl/gapred.hpp"

namespace pwsbl {

Trace run_bl(const ProblemInstance& instance, int m, double fstar, const Vec& x0,
             const BlOptions& opts) {
  if (m < 1) throw std::invalid_argument("run_bl: m must be >= 1");
  if (!std::isfinite(fstar)) throw std::invalid_argument("run_bl: fstar must be finite");
  if (!instance.region().contains(x0, 1e-9 * (1.0 + x0.norm())))
    throw std::invalid_argument("run_bl: x0 outside the feasible region");

  Trace trace;
  Bundle bundle(m);
  const std::optional<Vec>& xstar = instance.truth().xstar;

  Vec x = x0;
  double last_kkt = 0.0;
  OracleSample s = instance.evaluate(x, opts.perturbation_radius, make_rng(opts.seed, 0));
  trace.samples.push_back(s);
  bundle.push(s.cut);

  for (long t = 0;; ++t) {
    TraceRecord rec;
    rec.iter = t;
    rec.x = x;
    rec.fx = s.fx;
    if (xstar) rec.dist_to_xstar = (x - *xstar).norm();
    rec.level = fstar;
    rec.piece = s.piece;
    rec.kkt_residual = last_kkt;
    rec.oracle_calls = instance.oracle_calls();
    trace.records.push_back(rec);

    if (s.fx - fstar <= opts.stop_tol) {
      trace.status = RunStatus::kConverged;
      return trace;
    }
    if (t >= opts.max_iters) {
      trace.status = RunStatus::kIterLimit;
      return trace;
    }

    LevelProjectionResult proj;
    try {
      std::vector<Cut> cuts = bundle.snapshot();
      for (;;) {
        try {
          proj = project_onto_level_set(x, cuts, fstar, instance.region(),
                                        opts.projection_tol);
          break;
        } catch (const SolverError&) {
          // retry on the newest-suffix sub-bundle; its (larger) level set
          // still contains the optimal set, so the step stays sound
          if (cuts.size() <= 1) throw;
          cuts.erase(cuts.begin(), cuts.end() - cuts.size() / 2);
        }
      }
    } catch (const SolverError& e) {
      trace.status = RunStatus::kSolverFailure;
      trace.message = e.what();
      return trace;
    }
    if (!proj.feasible()) {
      trace.status = RunStatus::kInfeasibleLevelSet;
      trace.message = "level set at fstar is empty (fstar below the model minimum?)";
      return trace;
    }
    x = proj.point;
    last_kkt = proj.kkt_residual;
    s = instance.evaluate(x, opts.perturbation_radius, make_rng(opts.seed, t + 1));
    Cut c = s.cut;
    c.birth = t + 1;
    trace.samples.push_back(s);
    bundle.push(c);
  }
}

MatchingStats detect_matching_pairs(std::span<const int> labels, int l) {
  if (l < 1) throw std::invalid_argument("detect_matching_pairs: l must be >= 1");
  MatchingStats st;
  const long N = static_cast<long>(labels.size()) - 1;
  long prev_r = 0;
  for (long r = 1; r <= N; ++r) {
    if (labels[r] < 0) continue;
    const long start = std::max(prev_r, r - l);
    long found = -1;
    for (long q = start; q < r; ++q) {
      if (labels[q] == labels[r]) {
        found = q;
        break;
      }
    }
    if (found >= 0) {
      st.pairs.emplace_back(found, r);
      prev_r = r;
    }
  }
  st.p = static_cast<long>(st.pairs.size());
  if (st.p > 0) {
    double inv = 0.0;
    for (auto [a, b] : st.pairs) inv += 1.0 / static_cast<double>(b - a);
    st.kappa_bar = static_cast<double>(N) / static_cast<double>(st.p);
    st.sigma_bar = static_cast<double>(st.p) / inv;
  }
  return st;
}

MatchingStats detect_matching_pairs(const Trace& trace, int l, double slack) {
  const std::vector<int> labels = trace.piece_labels();
  for (int lab : labels)
    if (lab < 0) throw std::invalid_argument("detect_matching_pairs: trace lacks piece labels");
  MatchingStats st = detect_matching_pairs(labels, l);
  if (st.p == 0) return st;
  double inv = 0.0, winv = 0.0;
  for (auto [a, b] : st.pairs) {
    const double len = static_cast<double>(b - a);
    const double d2 = (trace.samples[b].x - trace.samples[a].x).squaredNorm();
    if (d2 <= 1e-28 * (1.0 + trace.samples[b].x.squaredNorm())) continue;  // coincident
    const double Lt = empirical_smoothness(trace.samples[b], trace.samples[a], slack);
    inv += 1.0 / len;
    if (Lt > 0) winv += 1.0 / (len * Lt);
  }
  st.L_bar = (winv > 0) ? inv / winv : kInf;
  return st;
}

double bridged_three_point_check(const Trace& trace, const Vec& xstar, long j_max) {
  const long N = trace.iterations() - 1;
  double worst = -kInf;
  for (long t = 0; t <= N; ++t) {
    const double base = (trace.x(t) - xstar).squaredNorm();
    for (long j = 1; j <= j_max && t + j <= N; ++j) {
      const double lhs = (trace.x(t + j) - xstar).squaredNorm() +
                         (trace.x(t + j) - trace.x(t)).squaredNorm() / static_cast<double>(j);
      worst = std::max(worst, lhs - base);
    }
  }
  return worst;
}

}  // namespace pwsbl
