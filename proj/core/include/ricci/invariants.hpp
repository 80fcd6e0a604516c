#pragma once

#include "ricci/curvature.hpp"
#include "ricci/space.hpp"

#include <optional>

namespace ricci {

struct SearchOptions {
  int multistarts = 64;       // low-discrepancy start points
  double ascent_tol = 1e-10;  // on the projected gradient
  int max_iter = 5000;
  double boundary_match_tol = 1e-7;  // window for "achieved only as a boundary limit"
  int threads = 0;
};

/// One critical level at infinity: the supremum value, whether a metric
/// realizes it, and the realizing point (y-chart over the fiber or base
/// variables) when one does.
struct LevelValue {
  double value = 0.0;
  bool attained = false;
  std::optional<Vector> witness_y;
};

struct LevelReport {
  Stratum stratum;
  LevelValue alpha;
  LevelValue beta;
  /// T2*(S_B/T2* - S_F/T1*) at normalized optimal witnesses; equals
  /// beta - alpha and is a sign indicator, not a literal derivative.
  double derivative_at_infinity = 0.0;
};

/// Supremum of S over M_T(K/H) for the fiber over the subalgebra stratum J.
/// Closed form for one-module fibers; otherwise multistart ascent plus
/// recursion over the fiber's own subalgebra strata.
LevelValue alpha(const SpaceSpec& space, const Candidate& T, IndexSet J,
                 const SearchOptions& opts = {});

/// Supremum of S over base metrics on G/K with coefficients constant on the
/// declared Ad_K-irreducible blocks, trace one. Closed form for one block;
/// low-dimensional maximization with boundary-limit comparison otherwise.
LevelValue beta(const SpaceSpec& space, const Candidate& T, IndexSet J,
                const SearchOptions& opts = {});

LevelReport level_report(const SpaceSpec& space, const Candidate& T, IndexSet J,
                         const SearchOptions& opts = {});

/// Reports for every subalgebra stratum, in enumeration order.
std::vector<LevelReport> all_levels(const SpaceSpec& space, const Candidate& T,
                                    const SearchOptions& opts = {});

/// Supremum of the constrained functional S|_{M_T} over a whole space
/// (interior critical points vs. suprema over subalgebra strata). alpha()
/// is this applied to the fiber.
LevelValue sup_constrained(const SpaceSpec& space, const Candidate& T,
                           const SearchOptions& opts = {});

/// One-parameter family g_t = (1/s) g_F + (1/t) g_B on the constraint slice,
/// affine in the y-chart: y_j = s(t) y^F_j on the fiber, y_i = t y^B_i on the
/// base, with s(t) = (1 - t T2*)/T1*.
struct CanonicalVariation {
  IndexSet J;
  std::vector<int> fiber_index, base_index;  // ascending module indices
  Vector fiber_y, base_y;
  double fiber_trace = 0.0;  // T1* = tr_{g_F} T|F
  double base_trace = 0.0;   // T2* = tr_{g_B} T|B
  double scal_fiber = 0.0;   // S_F
  double scal_base = 0.0;    // S_B
  double a_norm = 0.0;       // |A|_g = S_F + S_B - S(g_F + g_B)
  double t_max = 0.0;

  double s(double t) const { return (1.0 - t * base_trace) / fiber_trace; }
  /// Full-space point at parameter t in (0, t_max).
  MetricPoint point(double t) const;
};

/// Builds the variation; the base point must be constant on the declared
/// partition blocks. t_max defaults to 0.9 / T2*.
CanonicalVariation canonical_variation(const SpaceSpec& space, const Candidate& T, IndexSet J,
                                       const Vector& fiber_y, const Vector& base_y,
                                       double t_max = -1.0);

/// S(g_t) = S_F/T1* + T2* (S_B/T2* - S_F/T1*) t - t^2 T1* |A| / (1 - t T2*).
double scal_along_variation(const CanonicalVariation& cv, double t);

/// Scalar curvature of the base metric on G/K (structure sums over J^c).
double base_scalar_curvature(const SpaceSpec& space, IndexSet J, const Vector& base_y);

}  // namespace ricci
