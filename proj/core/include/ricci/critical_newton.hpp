#pragma once

#include "ricci/curvature.hpp"
#include "ricci/space.hpp"

#include <optional>

namespace ricci {

struct NewtonOptions {
  double tol = 1e-12;        // on the residual norm
  int max_iter = 200;
  int max_halvings = 40;     // backtracking, factor 0.5
};

/// Solution of Ric(g) = c T on the slice tr_g T = 1. Taking traces forces
/// c = S(g) there.
struct CriticalPoint {
  Vector x;       // eigenvalue chart, normalized to tr_g T = 1
  double c = 0;   // = S(g)
  double residual = 0;
};

/// Damped Gauss-Newton on the r+1 system {Ric_i(x) - c(x) T_i = 0, tr_g T = 1}
/// with c eliminated as <Ric,T>_g / <T,T>_g. Returns nothing when the
/// iteration fails to reach `tol` within budget.
std::optional<CriticalPoint> solve_critical(const SpaceSpec& space, const Candidate& T,
                                            const Vector& x_start, const NewtonOptions& opts = {});

}  // namespace ricci
