#pragma once

#include "ricci/dynamics.hpp"
#include "ricci/invariants.hpp"
#include "ricci/space.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ricci {

/// Raised when the theorem hypotheses behind a path construction fail;
/// the message names the violated inequality.
class hypothesis_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Discretized curve in the y-chart with its running mountain-pass data.
struct PathState {
  std::vector<Vector> nodes;          // feasible y points, endpoints anchored
  double c_estimate = 0.0;            // sup over rounds of inf over nodes of S
  int min_index = 0;                  // argmin of S over nodes
  std::pair<double, double> bracket;  // PS-safe interval (no alpha inside)
  std::vector<std::string> warnings;  // clamped nodes etc.
};

struct PathOptions {
  int node_count = 201;
  double anchor_distance = 1e-4;  // y-boundary distance of the endpoints
  SearchOptions search;
};

struct RelaxOptions {
  int max_rounds = 3000;
  double flow_time = 0.05;       // per node per round
  double stabilize_delta = 1e-8; // c change considered converged
  int stabilize_rounds = 10;
  int threads = 0;
  FlowParams flow;
};

/// Telemetry per relaxation round: (round, inf_S, argmin_node, c_estimate).
using RelaxSink = std::function<void(int round, double inf_S, int argmin_node, double c_estimate)>;

/// Composed canonical variations through the simplex center for the
/// generalized Wallach shape. Requires an ordering with
/// alpha_1 >= alpha_2 > alpha_3 and beta - alpha < 0 at the top two strata.
PathState build_path_wallach(const SpaceSpec& space, const Candidate& T,
                             const PathOptions& opts = {});

/// Stratum-to-stratum segment for flag-type spaces: anchors near the
/// lowest-alpha vertex stratum and a second subalgebra stratum. Requires
/// beta - alpha < 0 at the low stratum.
PathState build_path_flag(const SpaceSpec& space, const Candidate& T, IndexSet k_low,
                          const PathOptions& opts = {});

/// Push every node by the gradient flow for a bounded time per round,
/// re-discretize by arc length, and track c = sup_rounds inf_nodes S.
PathState relax(const SpaceSpec& space, const Candidate& T, PathState path,
                const RelaxOptions& opts = {}, const RelaxSink& sink = nullptr);

struct SaddleResult {
  MetricPoint point;
  double s_value = 0.0;
  Spectrum spectrum;
  double c_estimate = 0.0;
};

/// Newton-refine from the minimizing node; accept critical points with
/// co-index 0 or 1 whose level matches c within 1e-3 relative. A zero
/// eigenvalue with acceptable signature is kept and flagged degenerate.
std::optional<SaddleResult> extract_saddle(const SpaceSpec& space, const Candidate& T,
                                           const PathState& path, const NewtonOptions& opts = {});

}  // namespace ricci
