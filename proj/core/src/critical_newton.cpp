#include "ricci/critical_newton.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace ricci {

namespace {

Vector residual(const SpaceSpec& space, const Candidate& T, const Vector& x) {
  const int r = space.rank();
  DiagTensor R = ricci_x(space, x);
  double num = 0.0, den = 0.0, tr = 0.0;
  for (int i = 0; i < r; ++i) {
    double y2 = 1.0 / (x[i] * x[i]);
    num += space.dim(i) * R[i] * T[i] * y2;
    den += space.dim(i) * T[i] * T[i] * y2;
    tr += space.dim(i) * T[i] / x[i];
  }
  double c = num / den;
  Vector F(r + 1);
  for (int i = 0; i < r; ++i) F[i] = R[i] - c * T[i];
  F[r] = tr - 1.0;
  return F;
}

Matrix residual_jacobian(const SpaceSpec& space, const Candidate& T, const Vector& x) {
  const int r = space.rank();
  DiagTensor R = ricci_x(space, x);
  Matrix dR = jacobian_dric_x(space, x);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < r; ++i) {
    double y2 = 1.0 / (x[i] * x[i]);
    num += space.dim(i) * R[i] * T[i] * y2;
    den += space.dim(i) * T[i] * T[i] * y2;
  }
  Matrix J(r + 1, r);
  for (int m = 0; m < r; ++m) {
    double dnum = -2.0 * space.dim(m) * R[m] * T[m] / (x[m] * x[m] * x[m]);
    for (int i = 0; i < r; ++i) dnum += space.dim(i) * T[i] * dR(i, m) / (x[i] * x[i]);
    double dden = -2.0 * space.dim(m) * T[m] * T[m] / (x[m] * x[m] * x[m]);
    double dc = (dnum * den - num * dden) / (den * den);
    for (int i = 0; i < r; ++i) J(i, m) = dR(i, m) - T[i] * dc;
    J(r, m) = -space.dim(m) * T[m] / (x[m] * x[m]);
  }
  return J;
}

}  // namespace

std::optional<CriticalPoint> solve_critical(const SpaceSpec& space, const Candidate& T,
                                            const Vector& x_start, const NewtonOptions& opts) {
  const int r = space.rank();
  Vector x = x_start;
  if (x.minCoeff() <= 0.0) return std::nullopt;
  // Pre-scale onto the constraint slice; Ric is scale invariant.
  {
    double tr = 0.0;
    for (int i = 0; i < r; ++i) tr += space.dim(i) * T[i] / x[i];
    if (!(tr > 0.0) || !std::isfinite(tr)) return std::nullopt;
    x *= tr;
  }
  Vector F = residual(space, T, x);
  double nf = F.norm();
  for (int it = 0; it < opts.max_iter; ++it) {
    if (!std::isfinite(nf)) return std::nullopt;
    if (nf <= opts.tol) break;
    Matrix J = residual_jacobian(space, T, x);
    Vector step = J.colPivHouseholderQr().solve(-F);
    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h < opts.max_halvings; ++h) {
      Vector xn = x + lambda * step;
      if (xn.minCoeff() > 0.0) {
        Vector Fn = residual(space, T, xn);
        double nfn = Fn.norm();
        if (nfn < nf) {
          x = std::move(xn);
          F = std::move(Fn);
          nf = nfn;
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!accepted) return std::nullopt;
  }
  if (nf > opts.tol) return std::nullopt;
  // extra polish toward the attainable floor; tightens the flat direction
  // of nearly-degenerate roots well below the dedup radius
  for (int it = 0; it < 20; ++it) {
    Matrix J = residual_jacobian(space, T, x);
    Vector step = J.colPivHouseholderQr().solve(-F);
    Vector xn = x + step;
    if (xn.minCoeff() <= 0.0) break;
    Vector Fn = residual(space, T, xn);
    if (Fn.norm() >= nf) break;
    x = std::move(xn);
    F = std::move(Fn);
    nf = F.norm();
  }
  double tr = 0.0;
  for (int i = 0; i < r; ++i) tr += space.dim(i) * T[i] / x[i];
  x *= tr;
  CriticalPoint cp;
  cp.x = x;
  cp.residual = nf;
  DiagTensor R = ricci_x(space, x);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < r; ++i) {
    double y2 = 1.0 / (x[i] * x[i]);
    num += space.dim(i) * R[i] * T[i] * y2;
    den += space.dim(i) * T[i] * T[i] * y2;
  }
  cp.c = num / den;
  return cp;
}

}  // namespace ricci
