#pragma once

#include "ricci/curvature.hpp"
#include "ricci/invariants.hpp"
#include "ricci/space.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ricci {

enum class Region { GlobalMax, SaddleByThmB, SaddleByThmC, MaxAndSaddle, NoPrediction };

const char* region_name(Region r);

/// Region decision with every evaluated inequality (named values; flags 0/1).
struct RegionLabel {
  Region region = Region::NoPrediction;
  std::vector<std::pair<std::string, double>> witness;
};

/// Existence predicates from alpha/beta signs: a global maximum when the
/// top level has positive derivative; a saddle via the composed-variation
/// argument (generalized Wallach shape, two negative derivatives) or the
/// lowest-level argument (minimal-alpha stratum with negative derivative
/// and at most two-summand fibers elsewhere).
RegionLabel region_label(const SpaceSpec& space, const Candidate& T,
                         const SearchOptions& opts = {});

struct SweepSpec {
  enum class Mode { WallachXY, TComponents };
  Mode mode = Mode::TComponents;
  int axis_i = 0, axis_j = 1;  // varied T components (TComponents mode)
  double lo_i = 0.0, hi_i = 1.0, lo_j = 0.0, hi_j = 1.0;
  int res_i = 100, res_j = 100;
  Vector fixed;  // fixed T components (TComponents mode), full length
};

struct SweepRecord {
  Vector T;
  bool definite = false;
  Region region = Region::NoPrediction;
  std::vector<std::pair<std::string, double>> witness;
};

/// Grid of cell centers over the requested plane; indefinite grid points
/// carry definite=false and skip the predicates.
std::vector<SweepRecord> sweep_plane(const SpaceSpec& space, const SweepSpec& spec,
                                     int threads = 0, const SearchOptions& opts = {});

struct ImagePoint {
  Vector x;          // sampled metric, x_r = 1 gauge
  Vector ricci;      // Q-coefficients
  Vector projected;  // Wallach (x,y) plane, else ratios to the last component
  bool definite = false;
};

/// Seeded log-uniform (default) or uniform sampling of metrics with the last
/// coordinate fixed to 1; reproducible for a fixed seed at any thread count.
std::vector<ImagePoint> ricci_image_sample(const SpaceSpec& space, int n, double lo, double hi,
                                           std::uint64_t seed, bool log_uniform = true,
                                           int threads = 0);

/// Projection used by the sampler for three-module Wallach-shaped spaces.
Eigen::Vector2d wallach_xy_projection(const Vector& ricci);

struct LocusSpec {
  enum class Mode { ClosedForm, Continuation };
  Mode mode = Mode::ClosedForm;
  int branch = 0;
  double param_lo = 0.2, param_hi = 5.0;
  int count = 50;
  Vector seed_x;                       // continuation seed, gauge x_r = 1
  double step = 1e-2;
  int max_steps = 400;
  double deficiency_threshold = 1e-8;  // on sigma_min / sigma_max
};

struct LocusPoint {
  Vector x;
  Vector projected_T;  // Ricci ratios to the last component
  double sigma_min = 0.0;
  double sigma_gap = 0.0;
};

/// Metrics where dRic drops rank below r-1 (beyond the radial direction).
/// Closed forms for the bundled Wallach and G2 spaces; pseudo-arclength
/// continuation of a bordered determinant otherwise. Every emitted point
/// carries the singular-value certificate.
std::vector<LocusPoint> degenerate_locus(const SpaceSpec& space, const LocusSpec& spec);

/// Degenerate-locus closed forms (exposed for tests): the Wallach quartic
/// at x3 = 1 and the G2 quintic.
double wallach_degenerate_quartic(double x1, double x2);
double g2_degenerate_quintic(double x1, double x2, double x3);

}  // namespace ricci
