#include "ricci/invariants.hpp"

#include "ricci/critical_newton.hpp"
#include "ricci/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace ricci {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double simplex_trace(const SpaceSpec& space, const Candidate& T, const Vector& y) {
  return trace_y(space, T, y);
}

/// Projected gradient ascent for S on {sum d_i T_i y_i = 1, y > 0}.
/// Returns the final point, its S value, and whether it stayed interior.
struct AscentResult {
  Vector y;
  double value = kNegInf;
  bool interior = false;
  double sup_seen = kNegInf;  // best S observed along the trajectory
};

AscentResult ascend(const SpaceSpec& space, const Candidate& T, Vector y,
                    const SearchOptions& opts) {
  const int r = space.rank();
  Vector n(r);
  for (int i = 0; i < r; ++i) n[i] = space.dim(i) * T[i];
  const double nn = n.squaredNorm();
  y /= simplex_trace(space, T, y);
  double S = scalar_curvature_y(space, y);
  AscentResult res;
  res.sup_seen = S;
  double h = 0.05;
  for (int it = 0; it < opts.max_iter; ++it) {
    DiagTensor R = ricci_y(space, y);
    Vector g(r);
    for (int i = 0; i < r; ++i) g[i] = space.dim(i) * R[i];  // dS/dy
    g -= (g.dot(n) / nn) * n;
    double gnorm = g.cwiseAbs().maxCoeff();
    if (gnorm <= opts.ascent_tol * (1.0 + std::abs(S))) break;
    // keep the step inside the positive orthant with margin
    double hmax = h;
    for (int i = 0; i < r; ++i)
      if (g[i] < 0.0) hmax = std::min(hmax, -0.9 * y[i] / g[i]);
    bool accepted = false;
    while (hmax > 1e-18) {
      Vector yn = y + hmax * g;
      yn /= simplex_trace(space, T, yn);
      double Sn = scalar_curvature_y(space, yn);
      if (Sn > S) {
        y = std::move(yn);
        S = Sn;
        res.sup_seen = std::max(res.sup_seen, S);
        h = std::min(hmax * 1.3, 1e3);
        accepted = true;
        break;
      }
      hmax *= 0.5;
    }
    if (!accepted) break;
    if (y.minCoeff() < 1e-12 * y.maxCoeff()) break;  // boundary run
  }
  res.y = y;
  res.value = S;
  res.interior = y.minCoeff() > 1e-9 * y.maxCoeff();
  return res;
}

Vector halton_start(const SpaceSpec& space, const Candidate& T, int index) {
  const int r = space.rank();
  Vector y(r);
  for (int i = 0; i < r; ++i) {
    double u = halton(static_cast<std::uint64_t>(index) + 1, nth_prime_base(i));
    y[i] = std::exp(std::log(1e-2) + u * (std::log(1e2) - std::log(1e-2)));
  }
  double tr = trace_y(space, T, y);
  return y / tr;
}

}  // namespace

LevelValue sup_constrained(const SpaceSpec& space, const Candidate& T, const SearchOptions& opts) {
  const int r = space.rank();
  if (!T.definite()) throw spec_error("sup of S|M_T requires a definite candidate");
  if (r == 1) {
    // S/tr is constant: (d b/2 - [111]/4) / (d T).
    double num = 0.5 * space.dim(0) * space.killing(0) - 0.25 * space.triple(0, 0, 0);
    LevelValue lv;
    lv.value = num / (space.dim(0) * T[0]);
    lv.attained = true;
    Vector w(1);
    w[0] = 1.0 / (space.dim(0) * T[0]);
    lv.witness_y = w;
    return lv;
  }

  double best_interior = kNegInf;
  std::optional<Vector> best_witness;
  if (r == 2) {
    // One-dimensional slice: dense grid plus golden-section refinement.
    Vector n(2);
    n[0] = space.dim(0) * T[0];
    n[1] = space.dim(1) * T[1];
    auto point = [&n](double s) {
      Vector y(2);
      y[0] = s / n[0];
      y[1] = (1.0 - s) / n[1];
      return y;
    };
    auto f = [&](double s) { return scalar_curvature_y(space, point(s)); };
    const int N = 2048;
    double best_s = 0.5, best_f = kNegInf;
    for (int k = 1; k < N; ++k) {
      double s = static_cast<double>(k) / N;
      double v = f(s);
      if (v > best_f) {
        best_f = v;
        best_s = s;
      }
    }
    if (best_s > 1.5 / N && best_s < 1.0 - 1.5 / N) {
      double a = best_s - 1.0 / N, b = best_s + 1.0 / N;
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      double c = b - phi * (b - a), d = a + phi * (b - a);
      for (int it = 0; it < 200 && (b - a) > 1e-15; ++it) {
        if (f(c) > f(d)) b = d; else a = c;
        c = b - phi * (b - a);
        d = a + phi * (b - a);
      }
      best_s = 0.5 * (a + b);
      // polish to a critical point of the constrained problem
      auto cp = solve_critical(space, T, point(best_s).cwiseInverse());
      if (cp && cp->x.minCoeff() > 0.0) {
        best_interior = cp->c;
        best_witness = cp->x.cwiseInverse();
      } else {
        best_interior = f(best_s);
        best_witness = point(best_s);
      }
    }
  } else {
    for (int s = 0; s < opts.multistarts; ++s) {
      AscentResult a = ascend(space, T, halton_start(space, T, s), opts);
      if (!a.interior) continue;
      // polish to a genuine critical point
      auto cp = solve_critical(space, T, a.y.cwiseInverse());
      if (cp && cp->x.minCoeff() > 0.0) {
        Vector yc = cp->x.cwiseInverse();
        if (yc.minCoeff() > 1e-9 * yc.maxCoeff() && cp->c > best_interior) {
          best_interior = cp->c;
          best_witness = yc;
        }
      } else if (a.value > best_interior) {
        best_interior = a.value;
        best_witness = a.y;
      }
    }
  }

  double best_boundary = kNegInf;
  for (const Stratum& st : enumerate_strata(space)) {
    if (st.kind != StratumKind::Subalgebra) continue;
    LevelValue sub = alpha(space, T, st.members, opts);
    best_boundary = std::max(best_boundary, sub.value);
  }

  LevelValue lv;
  if (best_interior >= best_boundary - opts.boundary_match_tol * (1.0 + std::abs(best_boundary))) {
    lv.value = std::max(best_interior, best_boundary);
    lv.attained = best_witness.has_value();
    lv.witness_y = best_witness;
  } else {
    lv.value = best_boundary;
    lv.attained = false;
  }
  if (lv.value == kNegInf) throw spec_error("supremum search found no finite value");
  return lv;
}

LevelValue alpha(const SpaceSpec& space, const Candidate& T, IndexSet J, const SearchOptions& opts) {
  SpaceSpec fiber = restrict_to_fiber(space, J);
  Candidate TF = restrict_candidate(T, J);
  return sup_constrained(fiber, TF, opts);
}

double base_scalar_curvature(const SpaceSpec& space, IndexSet J, const Vector& base_y) {
  const auto comp = J.complement(space.rank()).members();
  const int m = static_cast<int>(comp.size());
  double lin = 0.0, tri = 0.0;
  for (int a = 0; a < m; ++a) lin += space.dim(comp[a]) * space.killing(comp[a]) * base_y[a];
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        double v = space.triple(comp[a], comp[b], comp[c]);
        if (v != 0.0) tri += v * base_y[a] * base_y[b] / base_y[c];
      }
  return 0.5 * lin - 0.25 * tri;
}

namespace {

/// Base problem over partition blocks: S and the trace as functions of the
/// block values v (one coordinate per block).
struct BlockProblem {
  const SpaceSpec& space;
  std::vector<int> comp;       // ascending members of J^c
  std::vector<int> block_of;   // position in comp -> block id
  int m = 0;                   // number of blocks
  Vector w;                    // trace weights per block

  BlockProblem(const SpaceSpec& sp, IndexSet J, const Candidate& T,
               const std::vector<IndexSet>& blocks)
      : space(sp), comp(J.complement(sp.rank()).members()), m(static_cast<int>(blocks.size())) {
    block_of.assign(comp.size(), -1);
    w = Vector::Zero(m);
    for (int b = 0; b < m; ++b)
      for (int i : blocks[static_cast<std::size_t>(b)].members()) {
        auto it = std::find(comp.begin(), comp.end(), i);
        block_of[static_cast<std::size_t>(it - comp.begin())] = b;
        w[b] += sp.dim(i) * T[i];
      }
  }

  Vector expand(const Vector& v) const {
    Vector y(static_cast<long>(comp.size()));
    for (std::size_t a = 0; a < comp.size(); ++a) y[static_cast<long>(a)] = v[block_of[a]];
    return y;
  }

  double S(const Vector& v) const {
    const int n = static_cast<int>(comp.size());
    double lin = 0.0, tri = 0.0;
    for (int a = 0; a < n; ++a)
      lin += space.dim(comp[a]) * space.killing(comp[a]) * v[block_of[a]];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          double t = space.triple(comp[a], comp[b], comp[c]);
          if (t != 0.0) tri += t * v[block_of[a]] * v[block_of[b]] / v[block_of[c]];
        }
    return 0.5 * lin - 0.25 * tri;
  }

  Vector dS(const Vector& v) const {
    const int n = static_cast<int>(comp.size());
    Vector g = Vector::Zero(m);
    for (int a = 0; a < n; ++a)
      g[block_of[a]] += 0.5 * space.dim(comp[a]) * space.killing(comp[a]);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          double t = space.triple(comp[a], comp[b], comp[c]);
          if (t == 0.0) continue;
          int A = block_of[a], B = block_of[b], C = block_of[c];
          g[A] += -0.25 * t * v[B] / v[C];
          g[B] += -0.25 * t * v[A] / v[C];
          g[C] += 0.25 * t * v[A] * v[B] / (v[C] * v[C]);
        }
    return g;
  }

  double trace(const Vector& v) const { return w.dot(v); }
};

/// Limit of f toward edge parameter 0 by Richardson extrapolation; -inf
/// when the values diverge.
double edge_limit(const std::function<double(double)>& f) {
  double l1 = f(1e-6), l2 = f(1e-7), l3 = f(1e-8);
  if (!std::isfinite(l3)) return kNegInf;
  if (std::abs(l2 - l3) > std::abs(l1 - l2) + 1e-30) return kNegInf;  // diverging
  return l3 + (l3 - l2) / 9.0;
}

LevelValue beta_two_blocks(const BlockProblem& bp, const SearchOptions& opts) {
  // parametrize by the share s in (0,1): v = (s/w0, (1-s)/w1)
  auto point = [&bp](double s) {
    Vector v(2);
    v[0] = s / bp.w[0];
    v[1] = (1.0 - s) / bp.w[1];
    return v;
  };
  auto f = [&](double s) { return bp.S(point(s)); };

  const int N = 4096;
  double best_s = 0.5, best_f = kNegInf;
  for (int k = 1; k < N; ++k) {
    double s = static_cast<double>(k) / N;
    double v = f(s);
    if (v > best_f) {
      best_f = v;
      best_s = s;
    }
  }
  bool interior = best_s > 1.5 / N && best_s < 1.0 - 1.5 / N;
  if (interior) {
    double lo = best_s - 1.0 / N, hi = best_s + 1.0 / N;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi, c = b - phi * (b - a), d = a + phi * (b - a);
    for (int it = 0; it < 200 && (b - a) > 1e-15; ++it) {
      if (f(c) > f(d)) {
        b = d;
      } else {
        a = c;
      }
      c = b - phi * (b - a);
      d = a + phi * (b - a);
    }
    best_s = 0.5 * (a + b);
    best_f = f(best_s);
  }
  double lim0 = edge_limit([&](double e) { return f(e); });
  double lim1 = edge_limit([&](double e) { return f(1.0 - e); });
  double boundary = std::max(lim0, lim1);

  LevelValue lv;
  if (interior && best_f >= boundary - opts.boundary_match_tol * (1.0 + std::abs(boundary))) {
    lv.value = std::max(best_f, boundary);
    lv.attained = true;
    lv.witness_y = bp.expand(point(best_s));
  } else {
    lv.value = std::max(best_f, boundary);
    lv.attained = false;
  }
  return lv;
}

LevelValue beta_multi_blocks(const BlockProblem& bp, const SearchOptions& opts) {
  const int m = bp.m;
  double best = kNegInf, best_interior = kNegInf;
  std::optional<Vector> witness;
  for (int s = 0; s < opts.multistarts; ++s) {
    Vector v(m);
    for (int i = 0; i < m; ++i) {
      double u = halton(static_cast<std::uint64_t>(s) + 1, nth_prime_base(i));
      v[i] = std::exp(std::log(1e-2) + u * (std::log(1e2) - std::log(1e-2)));
    }
    v /= bp.trace(v);
    double S = bp.S(v);
    double h = 0.05;
    for (int it = 0; it < opts.max_iter; ++it) {
      Vector g = bp.dS(v);
      g -= (g.dot(bp.w) / bp.w.squaredNorm()) * bp.w;
      if (g.cwiseAbs().maxCoeff() <= opts.ascent_tol * (1.0 + std::abs(S))) break;
      double hmax = h;
      for (int i = 0; i < m; ++i)
        if (g[i] < 0.0) hmax = std::min(hmax, -0.9 * v[i] / g[i]);
      bool ok = false;
      while (hmax > 1e-18) {
        Vector vn = v + hmax * g;
        vn /= bp.trace(vn);
        double Sn = bp.S(vn);
        if (Sn > S) {
          v = std::move(vn);
          S = Sn;
          h = std::min(1.3 * hmax, 1e3);
          ok = true;
          break;
        }
        hmax *= 0.5;
      }
      if (!ok) break;
      if (v.minCoeff() < 1e-12 * v.maxCoeff()) break;
    }
    best = std::max(best, S);
    if (v.minCoeff() > 1e-9 * v.maxCoeff() && S > best_interior) {
      best_interior = S;
      witness = bp.expand(v);
    }
  }
  LevelValue lv;
  lv.value = best;
  lv.attained =
      best_interior >= best - opts.boundary_match_tol * (1.0 + std::abs(best)) && witness.has_value();
  if (lv.attained) lv.witness_y = witness;
  return lv;
}

}  // namespace

LevelValue beta(const SpaceSpec& space, const Candidate& T, IndexSet J, const SearchOptions& opts) {
  if (!space.is_subalgebra(J)) throw spec_error("not a subalgebra stratum: " + J.str());
  if (!T.definite()) throw spec_error("beta requires a definite candidate");
  auto blocks = space.base_partition(J);
  BlockProblem bp(space, J, T, blocks);
  if (bp.m == 1) {
    // S/tr is constant over one-block base metrics.
    Vector v = Vector::Ones(1);
    double val = bp.S(v) / bp.trace(v);
    LevelValue lv;
    lv.value = val;
    lv.attained = true;
    Vector one(1);
    one[0] = 1.0 / bp.w[0];
    lv.witness_y = bp.expand(one);
    return lv;
  }
  if (bp.m == 2) return beta_two_blocks(bp, opts);
  return beta_multi_blocks(bp, opts);
}

LevelReport level_report(const SpaceSpec& space, const Candidate& T, IndexSet J,
                         const SearchOptions& opts) {
  LevelReport rep;
  rep.stratum = {J, space.is_subalgebra(J) ? StratumKind::Subalgebra : StratumKind::Infinity};
  rep.alpha = alpha(space, T, J, opts);
  rep.beta = beta(space, T, J, opts);
  rep.derivative_at_infinity = rep.beta.value - rep.alpha.value;
  return rep;
}

std::vector<LevelReport> all_levels(const SpaceSpec& space, const Candidate& T,
                                    const SearchOptions& opts) {
  std::vector<LevelReport> out;
  for (const Stratum& st : enumerate_strata(space))
    if (st.kind == StratumKind::Subalgebra) out.push_back(level_report(space, T, st.members, opts));
  return out;
}

MetricPoint CanonicalVariation::point(double t) const {
  if (!(t > 0.0) || t >= t_max) throw spec_error("variation parameter outside (0, t_max)");
  double sf = s(t);
  if (!(sf > 0.0)) throw spec_error("variation parameter outside (0, t_max)");
  const int r = static_cast<int>(fiber_index.size() + base_index.size());
  Vector y(r);
  for (std::size_t a = 0; a < fiber_index.size(); ++a)
    y[fiber_index[a]] = sf * fiber_y[static_cast<long>(a)];
  for (std::size_t a = 0; a < base_index.size(); ++a)
    y[base_index[a]] = t * base_y[static_cast<long>(a)];
  return MetricPoint::from_y(std::move(y));
}

CanonicalVariation canonical_variation(const SpaceSpec& space, const Candidate& T, IndexSet J,
                                       const Vector& fiber_y, const Vector& base_y, double t_max) {
  SpaceSpec fiber = restrict_to_fiber(space, J);  // validates J
  CanonicalVariation cv;
  cv.J = J;
  cv.fiber_index = J.members();
  cv.base_index = J.complement(space.rank()).members();
  cv.fiber_y = fiber_y;
  cv.base_y = base_y;
  if (fiber_y.minCoeff() <= 0.0 || base_y.minCoeff() <= 0.0)
    throw spec_error("fiber/base points must be strictly positive");

  // The base must be constant on the declared Ad_K-irreducible blocks, and
  // modules coupled through the fiber must share a block; otherwise the
  // submersion bookkeeping below is invalid.
  auto blocks = space.base_partition(J);
  for (int j : cv.fiber_index)
    for (std::size_t a = 0; a < blocks.size(); ++a)
      for (std::size_t b = a + 1; b < blocks.size(); ++b)
        for (int k : blocks[a].members())
          for (int l : blocks[b].members())
            if (space.triple(j, k, l) != 0.0)
              throw spec_error("base partition splits modules coupled through the fiber: [" +
                               std::to_string(j + 1) + "," + std::to_string(k + 1) + "," +
                               std::to_string(l + 1) + "] != 0");
  for (const IndexSet& block : blocks) {
    double v0 = -1.0;
    for (int i : block.members()) {
      auto it = std::find(cv.base_index.begin(), cv.base_index.end(), i);
      double v = base_y[static_cast<long>(it - cv.base_index.begin())];
      if (v0 < 0.0) v0 = v;
      if (std::abs(v - v0) > 1e-12 * v0)
        throw spec_error("base point is not constant on partition block " + block.str());
    }
  }

  Candidate TF = restrict_candidate(T, J);
  cv.fiber_trace = trace_y(fiber, TF, fiber_y);
  cv.base_trace = 0.0;
  for (std::size_t a = 0; a < cv.base_index.size(); ++a)
    cv.base_trace += space.dim(cv.base_index[a]) * T[cv.base_index[a]] * base_y[static_cast<long>(a)];

  cv.scal_fiber = scalar_curvature_y(fiber, fiber_y);
  cv.scal_base = base_scalar_curvature(space, J, base_y);

  Vector assembled(space.rank());
  for (std::size_t a = 0; a < cv.fiber_index.size(); ++a)
    assembled[cv.fiber_index[a]] = fiber_y[static_cast<long>(a)];
  for (std::size_t a = 0; a < cv.base_index.size(); ++a)
    assembled[cv.base_index[a]] = base_y[static_cast<long>(a)];
  cv.a_norm = cv.scal_fiber + cv.scal_base - scalar_curvature_y(space, assembled);
  if (cv.a_norm < 0.0 && cv.a_norm > -1e-10) cv.a_norm = 0.0;

  cv.t_max = t_max > 0.0 ? t_max : 0.9 / cv.base_trace;
  if (cv.t_max * cv.base_trace >= 1.0)
    throw spec_error("t_max leaves the simplex: t_max * T2* must be < 1");
  return cv;
}

double scal_along_variation(const CanonicalVariation& cv, double t) {
  if (!(t > 0.0) || t >= cv.t_max) throw spec_error("variation parameter outside (0, t_max)");
  double level = cv.scal_fiber / cv.fiber_trace;
  double slope = cv.base_trace * (cv.scal_base / cv.base_trace - level);
  return level + slope * t - t * t * cv.fiber_trace * cv.a_norm / (1.0 - t * cv.base_trace);
}

}  // namespace ricci
