// core.hpp
//
// Shared value types for the bundle-level toolkit: dense points, linear
// cuts, oracle samples, the fixed-capacity cut bundle, run traces, and a
// counter-based splittable RNG so every oracle query is reproducible from
// (seed, query index) alone.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pwsbl {

using Vec = Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Thrown by the numeric subproblem solvers when they hit an iteration cap.
struct SolverError : std::runtime_error {
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), best_residual(residual) {}
  double best_residual = 0.0;
};

// ---------------------------------------------------------------------------
// RNG: counter-based, splittable.  A state is a pure function of
// (seed, stream, draw counter); identical keys give bitwise-identical draws.

struct RngState {
  std::uint64_t key = 0;
  std::uint64_t counter = 0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return detail::splitmix64(detail::splitmix64(seed) ^ (salt * 0x2545f4914f6cdd1dULL + 0x9e37ULL));
}

inline RngState make_rng(std::uint64_t seed, std::uint64_t stream) {
  RngState s;
  s.key = detail::splitmix64(detail::splitmix64(seed) ^ (stream * 0xd6e8feb86659fd93ULL + 1));
  s.counter = 0;
  return s;
}

inline std::uint64_t next_u64(RngState& s) {
  return detail::splitmix64(s.key + 0x9e3779b97f4a7c15ULL * ++s.counter);
}

// Uniform in (0, 1).
inline double uniform01(RngState& s) {
  return (static_cast<double>(next_u64(s) >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

inline double normal01(RngState& s) {
  const double u = uniform01(s);
  const double v = uniform01(s);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
}

// Uniform sample from the closed Euclidean ball B(center; radius).
inline Vec ball_sample(RngState& s, const Vec& center, double radius) {
  const int n = static_cast<int>(center.size());
  Vec dir(n);
  for (int i = 0; i < n; ++i) dir[i] = normal01(s);
  double nrm = dir.norm();
  if (nrm == 0.0) return center;
  const double r = radius * std::pow(uniform01(s), 1.0 / static_cast<double>(n));
  return center + (r / nrm) * dir;
}

// ---------------------------------------------------------------------------
// Cuts and oracle samples.

// One linear support function: support(x) = value + <gradient, x - center>.
struct Cut {
  Vec center;
  double value = 0.0;
  Vec gradient;
  long birth = 0;  // iteration index at which the cut was generated
  int piece = -1;  // diagnostic piece label, -1 when unknown

  double support(const Vec& x) const { return value + gradient.dot(x - center); }
};

struct OracleSample {
  Vec x;                             // query point
  double fx = 0.0;                   // exact objective value at x
  Cut cut;                           // support function (centered at x or its perturbation)
  double perturbation_radius = 0.0;  // 0 for the exact oracle
  int piece = -1;                    // label of cut.center, -1 when unknown
};

// Capacity-m ordered cut collection; oldest cut is evicted first.
class Bundle {
 public:
  explicit Bundle(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("Bundle: capacity must be >= 1");
  }

  void push(Cut c) {
    if (!cuts_.empty() && c.birth <= cuts_.back().birth)
      throw std::invalid_argument("Bundle: birth indices must be strictly increasing");
    cuts_.push_back(std::move(c));
    if (static_cast<int>(cuts_.size()) > capacity_) cuts_.pop_front();
  }

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(cuts_.size()); }
  const Cut& operator[](int i) const { return cuts_[i]; }
  auto begin() const { return cuts_.begin(); }
  auto end() const { return cuts_.end(); }

  std::vector<Cut> snapshot() const { return {cuts_.begin(), cuts_.end()}; }

  // Model value max_i support_i(x); -inf on an empty bundle.
  double model_max(const Vec& x) const {
    double v = -kInf;
    for (const Cut& c : cuts_) v = std::max(v, c.support(x));
    return v;
  }

 private:
  int capacity_;
  std::deque<Cut> cuts_;
};

// ---------------------------------------------------------------------------
// Traces.

enum class TraceEvent { kStep, kMatchingPair, kBoundUpdate, kRestart, kCertificate };

inline const char* to_string(TraceEvent e) {
  switch (e) {
    case TraceEvent::kStep: return "step";
    case TraceEvent::kMatchingPair: return "matching_pair";
    case TraceEvent::kBoundUpdate: return "bound_update";
    case TraceEvent::kRestart: return "restart";
    case TraceEvent::kCertificate: return "certificate";
  }
  return "?";
}

struct TraceRecord {
  long iter = 0;
  Vec x;
  double fx = 0.0;
  std::optional<double> dist_to_xstar;
  double level = 0.0;
  int piece = -1;
  double kkt_residual = 0.0;
  TraceEvent event = TraceEvent::kStep;
  long pair_l = -1, pair_r = -1;  // set for kMatchingPair
  std::optional<double> fbar;     // set for kBoundUpdate / kCertificate
  std::optional<double> funder;
  long oracle_calls = 0;  // cumulative count when the record was written
};

enum class RunStatus {
  kConverged,
  kIterLimit,
  kInfeasibleLevelSet,
  kSolverFailure,
  kBudgetExhausted,
};

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kConverged: return "converged";
    case RunStatus::kIterLimit: return "iter_limit";
    case RunStatus::kInfeasibleLevelSet: return "infeasible_level_set";
    case RunStatus::kSolverFailure: return "solver_failure";
    case RunStatus::kBudgetExhausted: return "budget_exhausted";
  }
  return "?";
}

struct Trace {
  std::vector<TraceRecord> records;
  std::vector<OracleSample> samples;  // samples[t] belongs to iterate x^t
  RunStatus status = RunStatus::kIterLimit;
  std::string message;

  long iterations() const { return static_cast<long>(samples.size()); }

  const Vec& x(long t) const { return samples.at(t).x; }
  double fx(long t) const { return samples.at(t).fx; }

  std::vector<int> piece_labels() const {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.piece);
    return out;
  }

  double best_fx() const {
    double v = kInf;
    for (const auto& s : samples) v = std::min(v, s.fx);
    return v;
  }
};

}  // namespace pwsbl
