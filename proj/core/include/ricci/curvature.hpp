#pragma once

#include "ricci/space.hpp"

namespace ricci {

/// Diagonal symmetric tensor, componentwise against Q (no sign restriction).
using DiagTensor = Vector;

/// Eigenvalue data of the constrained Hessian at a (near-)critical point.
struct Spectrum {
  Vector eigenvalues;    // ascending
  int co_index = 0;      // strictly positive eigenvalues (beyond tolerance)
  bool degenerate = false;
  double tolerance = 0.0;
};

struct HessianOptions {
  /// |grad S|_g above this multiple of (1+|S|) rejects the point as non-critical.
  double critical_tol = 1e-5;
  /// Degeneracy threshold factor: tol = factor * (spectral radius + 1).
  double degeneracy_factor = 1e-7;
};

/// Scalar curvature S(g) = (1/2) sum d_i b_i / x_i - (1/4) sum [ijk] x_k/(x_i x_j),
/// evaluated natively in the point's chart.
double scalar_curvature(const SpaceSpec& space, const MetricPoint& p);
double scalar_curvature_x(const SpaceSpec& space, const Vector& x);
double scalar_curvature_y(const SpaceSpec& space, const Vector& y);

/// Diagonal Ricci coefficients against Q.
DiagTensor ricci_coefficients(const SpaceSpec& space, const MetricPoint& p);
DiagTensor ricci_x(const SpaceSpec& space, const Vector& x);
DiagTensor ricci_y(const SpaceSpec& space, const Vector& y);

/// tr_g T = sum d_i T_i / x_i.
double trace_T(const SpaceSpec& space, const MetricPoint& p, const Candidate& T);

/// <A,B>_g = sum d_i a_i b_i / x_i^2 (so that <g, Ric(g)>_g = S(g)).
double inner_g(const SpaceSpec& space, const DiagTensor& A, const DiagTensor& B,
               const MetricPoint& p);
double inner_g_y(const SpaceSpec& space, const DiagTensor& A, const DiagTensor& B, const Vector& y);

/// Projection coefficient c(g) = <Ric,T>_g / <T,T>_g.
double projection_coefficient(const SpaceSpec& space, const Vector& y, const Candidate& T);

/// grad S|_{M_T}(g) = -Ric(g) + c(g) T; requires |tr_g T - 1| <= 1e-9.
DiagTensor grad_constrained(const SpaceSpec& space, const MetricPoint& p, const Candidate& T);
/// Same, without the feasibility gate (y-chart coordinates).
DiagTensor grad_constrained_y(const SpaceSpec& space, const Vector& y, const Candidate& T);
double grad_norm_y(const SpaceSpec& space, const Vector& y, const Candidate& T);

/// Analytic Jacobian dRic: entry (i,m) = dR_i/dx_m. Annihilates the radial
/// direction: (dRic) x = 0.
Matrix jacobian_dric(const SpaceSpec& space, const MetricPoint& p);
Matrix jacobian_dric_x(const SpaceSpec& space, const Vector& x);

/// Central-difference Jacobian (test oracle), h = 1e-5 * max(1,|x_j|).
Matrix jacobian_dric_fd(const SpaceSpec& space, const Vector& x);

/// Eigenvalues of Hess(S|_{M_T})(X,Y) = -<dRic(X),Y>_g on the tangent space
/// {X : <X,T>_g = 0}. Throws when the point is not near-critical.
Spectrum hessian_constrained(const SpaceSpec& space, const MetricPoint& p, const Candidate& T,
                             const HessianOptions& opts = {});

/// Hessian spectrum without the criticality gate (used right after Newton).
Spectrum hessian_spectrum_unchecked(const SpaceSpec& space, const Vector& x, const Candidate& T,
                                    const HessianOptions& opts = {});

/// Rank certificate for dRic restricted orthogonally to the radial direction.
struct RankReport {
  Vector singular_values;  // descending, size r-1
  bool deficient = false;  // sigma_min < 1e-8 * sigma_max
  double gap = 0.0;        // sigma_{r-2} / sigma_{r-1}
};
RankReport rank_dric(const SpaceSpec& space, const MetricPoint& p, double threshold = 1e-8);

}  // namespace ricci
