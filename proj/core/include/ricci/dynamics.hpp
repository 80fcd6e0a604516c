#pragma once

#include "ricci/critical_newton.hpp"
#include "ricci/curvature.hpp"
#include "ricci/invariants.hpp"
#include "ricci/space.hpp"

#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace ricci {

struct FlowParams {
  double dt0 = 1e-3;           // initial step
  double rel_tol = 1e-8;       // adaptive controller tolerance
  long max_steps = 500000;
  double grad_tol = 1e-10;     // convergence on |grad S|_g
  double boundary_eps = 1e-6;  // y_i below this declares divergence
  int stall_window = 2000;     // accepted steps without S progress
  bool newton_polish = true;   // refine converged points by Newton
};

enum class DivergenceKind { SubalgebraLimit, InfinityAnomaly };

struct Converged {
  MetricPoint point;
  double s_value = 0.0;
  Spectrum spectrum;
};

struct Diverged {
  Stratum stratum;
  DivergenceKind kind = DivergenceKind::SubalgebraLimit;
  double level = 0.0;          // extrapolated lim S
  Vector fiber_y;              // limit fiber coordinates, tr_{g_F} T|F = 1
  double ps_residual = 0.0;    // |Ric(g_F) - level * T|F|_{g_F}
  std::optional<std::pair<IndexSet, double>> matched_alpha;  // nearest alpha and gap
};

struct Stalled {
  MetricPoint last;
  std::string diagnostics;
};

struct FlowResult {
  std::variant<Converged, Diverged, Stalled> outcome;
  long steps = 0;

  bool converged() const { return std::holds_alternative<Converged>(outcome); }
  bool diverged() const { return std::holds_alternative<Diverged>(outcome); }
  bool stalled() const { return std::holds_alternative<Stalled>(outcome); }
};

/// Per-accepted-step telemetry: (step, t, y..., S, |grad|).
using TrajectorySink = std::function<void(long step, double t, const Vector& y, double S, double grad_norm)>;

/// Constrained gradient ascent of S on M_T: integrates x' = grad S|_{M_T}
/// (y' = -y^2 grad in the reciprocal chart) with an embedded Euler/Heun
/// pair, re-projecting onto the linear constraint after every accepted step.
FlowResult flow(const SpaceSpec& space, const Candidate& T, const MetricPoint& start,
                const FlowParams& params = {}, const TrajectorySink& sink = nullptr);

/// Classify a divergent tail: identify the stratum J = {i : y_i >= eps_bd},
/// extrapolate the level, renormalize the fiber limit and measure the
/// prescribed-Ricci residual on the fiber. Infinity strata with bounded S
/// are flagged as anomalies.
Diverged diagnose_divergence(const SpaceSpec& space, const Candidate& T,
                             const std::vector<Vector>& tail_y, const FlowParams& params = {});

/// Newton refinement of Ric(g) = c T with tr_g T = 1; empty on failure.
struct CriticalMetric {
  MetricPoint point;
  double c = 0.0;  // = S(g)
  Spectrum spectrum;
};
std::optional<CriticalMetric> newton_critical(const SpaceSpec& space, const Candidate& T,
                                              const MetricPoint& start,
                                              const NewtonOptions& opts = {});

/// Multistart root inventory: per-coordinate log-uniform starts over
/// [1e-2, 1e2], deduplicated within 1e-6 relative distance, sorted by S
/// descending. Deterministic for a fixed seed regardless of thread count.
std::vector<CriticalMetric> newton_inventory(const SpaceSpec& space, const Candidate& T,
                                             int n_starts = 128, std::uint64_t seed = 0,
                                             int threads = 0, const NewtonOptions& opts = {});

}  // namespace ricci
