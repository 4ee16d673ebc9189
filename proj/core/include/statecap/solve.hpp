#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "statecap/channel.hpp"

namespace statecap::solve {

enum class SolveStatus { kConverged, kIterationLimit, kRestartLimit, kBoundOnly };

const char* to_string(SolveStatus s);

/// Uniform result record for the optimizers. `value` is always in bits.
/// For bracketing solvers, [lower, upper] is a certified bracket; for ascent
/// solvers lower == value and upper is unset (infinity). `label` states what
/// the value is ("exact" vs an achievable lower bound under the strategy
/// parametrization).
struct SolveReport {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> argmax;
  std::vector<std::pair<std::string, double>> terms;
  int iterations = 0;
  int restarts_used = 0;
  std::optional<double> oracle_gap;
  SolveStatus status = SolveStatus::kConverged;
  std::string label;
};

struct RatePoint {
  double r1 = 0.0;
  double r2 = 0.0;
};

/// Convex, coordinate-monotone rate region stored as the vertices of its
/// northeast boundary, sorted by r1 ascending from (0, r2max) to (r1max, 0).
/// Every stored vertex carries a provenance tag (which lambda, which sample,
/// or "corner").
class RateRegion {
 public:
  RateRegion() = default;

  /// Upper concave envelope of `points` plus the axis projections
  /// (0, max r2) and (max r1, 0). Labels travel with their points.
  static RateRegion from_points(std::vector<RatePoint> points,
                                std::vector<std::string> labels);

  const std::vector<RatePoint>& vertices() const { return v_; }
  const std::vector<std::string>& provenance() const { return tags_; }

  double r1_max() const;
  double r2_max() const;

  /// Boundary value r2(r1) by linear interpolation between vertices.
  double boundary_r2(double r1) const;

  /// Signed containment margin: nonnegative inside, negative outside.
  /// Vertical distance to the boundary, with the overshoot past r1max added
  /// so that near-misses beyond the right end degrade gracefully.
  double margin(RatePoint p) const;

  bool contains(RatePoint p, double slack = 0.0) const { return margin(p) >= -slack; }

 private:
  std::vector<RatePoint> v_;
  std::vector<std::string> tags_;
};

struct BaOptions {
  double tol = 1e-9;
  int max_iter = 20000;
};

/// Capacity of an ordinary DMC by Blahut-Arimoto. The report carries the
/// certified bracket: lower = I(p) at the final input, upper = max_x D_x,
/// value = lower, converged when upper - lower <= tol.
SolveReport blahut_arimoto(const channel::Dmc& ch, const BaOptions& opt = {});

/// Single-user capacity with causal state at the encoder: Blahut-Arimoto on
/// the induced strategy channel. Exact up to the bracket tolerance.
SolveReport single_user_capacity(const channel::StateChannel& ch, const BaOptions& opt = {});

/// Exhaustive maximization of `objective` over the lattice of pmfs with
/// denominator `resolution` on the `dims`-simplex, in lexicographic order.
/// Ties keep the lexicographically smallest pmf. Throws CapExceededError if
/// the lattice exceeds `budget` evaluations.
struct OracleResult {
  double value = 0.0;
  std::vector<double> argmax;
  long long evaluations = 0;
};

OracleResult grid_oracle_maximize(const std::function<double(std::span<const double>)>& objective,
                                  int dims, int resolution, long long budget = 10'000'000);

struct BcRegionOptions {
  int lambda_points = 33;
  int restarts = 32;
  std::uint64_t seed = 1;
  int u2_size = 0;  // 0: use |T| + 1
  int max_iter = 2000;
  double tol = 1e-11;
  int workers = 1;
  double degraded_tol = channel::kDegradedTol;
};

struct BcRegionResult {
  RateRegion region;
  std::vector<SolveReport> per_lambda;  // lambda ascending
};

/// Inner bound region for a physically degraded broadcast channel with
/// causal state at the encoder. Superposition parametrization over a cloud
/// alphabet U2 (default |T|+1) and satellite p(t|u2); each lambda on the
/// grid is solved by alternating exponentiated-gradient ascent over p(u2)
/// and p(t|u2) with random restarts, and the region is the hull of all
/// restart endpoints plus the single-user corners. Requires the channel to
/// pass check_bc_degraded.
BcRegionResult bc_region(const channel::BroadcastStateChannel& ch,
                         const BcRegionOptions& opt = {});

struct RelayOptions {
  int restarts = 32;
  std::uint64_t seed = 1;
  double tol = 1e-9;
  int max_iter = 6000;
  int workers = 1;
  double degraded_tol = channel::kDegradedTol;
};

/// Achievable rate (a lower bound on capacity equal to it when the strategy
/// parametrization is sufficient) for a physically degraded relay channel:
/// max over joint strategy pmfs q(t,t1) of
///   min{ I(T,T1;Y), I(T;Y1|T1,S) },
/// by projected gradient ascent on an annealed soft-min with multiple
/// restarts. The report lists both information terms and which one binds.
SolveReport relay_capacity(const channel::RelayStateChannel& ch, const RelayOptions& opt = {});

struct MacRegionOptions {
  int samples = 512;
  std::uint64_t seed = 1;
};

struct MacRegionResult {
  RateRegion region;
  SolveReport report;
};

/// Sampled inner bound for the two-sender channel: hull of the pentagon
/// corners over product strategy pmfs p(t1)p(t2) (deterministic seed pmfs
/// plus Dirichlet samples).
MacRegionResult mac_inner_region(const channel::MacStateChannel& ch,
                                 const MacRegionOptions& opt = {});

/// Sampled outer bound over joint strategy pmfs p(t1,t2). The candidate set
/// is a superset of the inner-bound candidates, so the inner hull is
/// contained in the outer hull by construction. The hull is sampled from
/// below; containment tests against it should use a margin.
MacRegionResult mac_outer_region(const channel::MacStateChannel& ch,
                                 const MacRegionOptions& opt = {});

}  // namespace statecap::solve
