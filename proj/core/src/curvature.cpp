#include "ricci/curvature.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace ricci {

double scalar_curvature_x(const SpaceSpec& space, const Vector& x) {
  const int r = space.rank();
  double lin = 0.0, tri = 0.0;
  for (int i = 0; i < r; ++i) lin += space.dim(i) * space.killing(i) / x[i];
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) {
        double c = space.triple(i, j, k);
        if (c != 0.0) tri += c * x[k] / (x[i] * x[j]);
      }
  return 0.5 * lin - 0.25 * tri;
}

double scalar_curvature_y(const SpaceSpec& space, const Vector& y) {
  const int r = space.rank();
  double lin = 0.0, tri = 0.0;
  for (int i = 0; i < r; ++i) lin += space.dim(i) * space.killing(i) * y[i];
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) {
        double c = space.triple(i, j, k);
        if (c != 0.0) tri += c * y[i] * y[j] / y[k];
      }
  return 0.5 * lin - 0.25 * tri;
}

double scalar_curvature(const SpaceSpec& space, const MetricPoint& p) {
  return p.chart() == Chart::X ? scalar_curvature_x(space, p.coords())
                               : scalar_curvature_y(space, p.coords());
}

DiagTensor ricci_x(const SpaceSpec& space, const Vector& x) {
  const int r = space.rank();
  DiagTensor out(r);
  for (int i = 0; i < r; ++i) {
    double mix = 0.0, self = 0.0;
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) {
        double c = space.triple(i, j, k);
        if (c != 0.0) {
          mix += c * x[k] / x[j];
          self += c / (x[j] * x[k]);
        }
      }
    out[i] = 0.5 * space.killing(i) - mix / (2.0 * space.dim(i)) +
             x[i] * x[i] * self / (4.0 * space.dim(i));
  }
  return out;
}

DiagTensor ricci_y(const SpaceSpec& space, const Vector& y) {
  const int r = space.rank();
  DiagTensor out(r);
  for (int i = 0; i < r; ++i) {
    double mix = 0.0, self = 0.0;
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) {
        double c = space.triple(i, j, k);
        if (c != 0.0) {
          mix += c * y[j] / y[k];
          self += c * y[j] * y[k];
        }
      }
    out[i] = 0.5 * space.killing(i) - mix / (2.0 * space.dim(i)) +
             self / (4.0 * space.dim(i) * y[i] * y[i]);
  }
  return out;
}

DiagTensor ricci_coefficients(const SpaceSpec& space, const MetricPoint& p) {
  return p.chart() == Chart::X ? ricci_x(space, p.coords()) : ricci_y(space, p.coords());
}

double trace_T(const SpaceSpec& space, const MetricPoint& p, const Candidate& T) {
  Vector y = p.as_y();
  return trace_y(space, T, y);
}

double inner_g_y(const SpaceSpec& space, const DiagTensor& A, const DiagTensor& B, const Vector& y) {
  double s = 0.0;
  for (int i = 0; i < space.rank(); ++i) s += space.dim(i) * A[i] * B[i] * y[i] * y[i];
  return s;
}

double inner_g(const SpaceSpec& space, const DiagTensor& A, const DiagTensor& B,
               const MetricPoint& p) {
  Vector y = p.as_y();
  return inner_g_y(space, A, B, y);
}

double projection_coefficient(const SpaceSpec& space, const Vector& y, const Candidate& T) {
  DiagTensor R = ricci_y(space, y);
  return inner_g_y(space, R, T.components, y) / inner_g_y(space, T.components, T.components, y);
}

DiagTensor grad_constrained_y(const SpaceSpec& space, const Vector& y, const Candidate& T) {
  DiagTensor R = ricci_y(space, y);
  double c = inner_g_y(space, R, T.components, y) / inner_g_y(space, T.components, T.components, y);
  return -R + c * T.components;
}

double grad_norm_y(const SpaceSpec& space, const Vector& y, const Candidate& T) {
  DiagTensor G = grad_constrained_y(space, y, T);
  return std::sqrt(inner_g_y(space, G, G, y));
}

DiagTensor grad_constrained(const SpaceSpec& space, const MetricPoint& p, const Candidate& T) {
  Vector y = p.as_y();
  double tr = trace_y(space, T, y);
  if (std::abs(tr - 1.0) > 1e-9)
    throw spec_error("constraint violated: tr_g T = " + std::to_string(tr));
  return grad_constrained_y(space, y, T);
}

Matrix jacobian_dric_x(const SpaceSpec& space, const Vector& x) {
  const int r = space.rank();
  Matrix J(r, r);
  for (int i = 0; i < r; ++i) {
    // P_m = sum_j [ijm]/x_j,  Q_m = sum_k [imk] x_k,  C = sum_{j,k} [ijk]/(x_j x_k)
    Vector P = Vector::Zero(r), Q = Vector::Zero(r);
    double C = 0.0;
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) {
        double c = space.triple(i, j, k);
        if (c != 0.0) {
          P[k] += c / x[j];
          Q[j] += c * x[k];
          C += c / (x[j] * x[k]);
        }
      }
    const double di = space.dim(i);
    for (int m = 0; m < r; ++m) {
      double v = -(P[m] - Q[m] / (x[m] * x[m])) / (2.0 * di);
      v -= x[i] * x[i] * P[m] / (2.0 * di * x[m] * x[m]);
      if (m == i) v += x[i] * C / (2.0 * di);
      J(i, m) = v;
    }
  }
  return J;
}

Matrix jacobian_dric(const SpaceSpec& space, const MetricPoint& p) {
  return jacobian_dric_x(space, p.as_x());
}

Matrix jacobian_dric_fd(const SpaceSpec& space, const Vector& x) {
  const int r = space.rank();
  Matrix J(r, r);
  for (int m = 0; m < r; ++m) {
    double h = 1e-5 * std::max(1.0, std::abs(x[m]));
    Vector xp = x, xm = x;
    xp[m] += h;
    xm[m] -= h;
    DiagTensor Rp = ricci_x(space, xp), Rm = ricci_x(space, xm);
    for (int i = 0; i < r; ++i) J(i, m) = (Rp[i] - Rm[i]) / (2.0 * h);
  }
  return J;
}

namespace {

// Orthonormal basis (w.r.t. <.,.>_g) of {X : <X,T>_g = 0}, as columns.
// Work in the whitened frame v_i = sqrt(d_i)/x_i X_i where <.,.>_g is
// Euclidean; the tangent space is the orthogonal complement of the
// whitened normal, spanned by the trailing Householder columns.
Matrix tangent_basis(const SpaceSpec& space, const Vector& x, const Candidate& T) {
  const int r = space.rank();
  Vector w(r), n(r);
  for (int i = 0; i < r; ++i) {
    w[i] = std::sqrt(static_cast<double>(space.dim(i))) / x[i];
    n[i] = w[i] * T[i];
  }
  Eigen::HouseholderQR<Matrix> qr(n);
  Matrix Qfull = qr.householderQ() * Matrix::Identity(r, r);
  Matrix E(r, r - 1);
  for (int a = 0; a < r - 1; ++a)
    for (int i = 0; i < r; ++i) E(i, a) = Qfull(i, a + 1) / w[i];
  return E;
}

Spectrum spectrum_from_matrix(const Matrix& H, const HessianOptions& opts) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.transpose()));
  Spectrum sp;
  sp.eigenvalues = es.eigenvalues();
  double radius = sp.eigenvalues.size() ? sp.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  sp.tolerance = opts.degeneracy_factor * (radius + 1.0);
  sp.co_index = 0;
  sp.degenerate = false;
  for (long i = 0; i < sp.eigenvalues.size(); ++i) {
    if (sp.eigenvalues[i] > sp.tolerance) ++sp.co_index;
    if (std::abs(sp.eigenvalues[i]) <= sp.tolerance) sp.degenerate = true;
  }
  return sp;
}

}  // namespace

Spectrum hessian_spectrum_unchecked(const SpaceSpec& space, const Vector& x, const Candidate& T,
                                    const HessianOptions& opts) {
  const int r = space.rank();
  Matrix E = tangent_basis(space, x, T);
  Matrix Jac = jacobian_dric_x(space, x);
  Matrix M = Matrix::Zero(r, r);
  for (int i = 0; i < r; ++i) M(i, i) = space.dim(i) / (x[i] * x[i]);
  Matrix H = -(E.transpose() * M * Jac * E);
  return spectrum_from_matrix(H, opts);
}

Spectrum hessian_constrained(const SpaceSpec& space, const MetricPoint& p, const Candidate& T,
                             const HessianOptions& opts) {
  Vector y = p.as_y();
  double S = scalar_curvature_y(space, y);
  double gn = grad_norm_y(space, y, T);
  if (gn > opts.critical_tol * (1.0 + std::abs(S)))
    throw spec_error("point is not critical: |grad| = " + std::to_string(gn));
  return hessian_spectrum_unchecked(space, p.as_x(), T, opts);
}

RankReport rank_dric(const SpaceSpec& space, const MetricPoint& p, double threshold) {
  Vector x = p.as_x();
  const int r = space.rank();
  Eigen::HouseholderQR<Matrix> qr(x);
  Matrix Qfull = qr.householderQ() * Matrix::Identity(r, r);
  Matrix V = Qfull.rightCols(r - 1);  // Euclidean basis of x-perp
  Matrix restricted = jacobian_dric_x(space, x) * V;
  Eigen::JacobiSVD<Matrix> svd(restricted);
  RankReport rep;
  rep.singular_values = svd.singularValues();
  double smax = rep.singular_values[0];
  double smin = rep.singular_values[r - 2];
  rep.deficient = smin < threshold * smax;
  rep.gap = (r >= 3 && smin > 0.0) ? rep.singular_values[r - 3] / smin
                                   : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace ricci
