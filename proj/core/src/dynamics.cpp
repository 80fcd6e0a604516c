#include "ricci/dynamics.hpp"

#include "ricci/parallel.hpp"
#include "ricci/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace ricci {

namespace {

// y' = -y^2 (grad S|_{M_T})(1/y)
Vector flow_field(const SpaceSpec& space, const Candidate& T, const Vector& y) {
  DiagTensor G = grad_constrained_y(space, y, T);
  return -(y.array().square() * G.array()).matrix();
}

double min_coeff_over(const Vector& y) { return y.minCoeff(); }

}  // namespace

FlowResult flow(const SpaceSpec& space, const Candidate& T, const MetricPoint& start,
                const FlowParams& params, const TrajectorySink& sink) {
  if (!T.definite()) throw spec_error("flow requires a definite candidate");
  Vector y = start.as_y();
  {
    double tr = trace_y(space, T, y);
    if (std::abs(tr - 1.0) > 0.1)
      throw spec_error("start point is far from the constraint slice: tr_g T = " +
                       std::to_string(tr));
    y /= tr;  // exact re-projection, applied after every step as well
  }

  FlowResult result;
  double h = params.dt0, t = 0.0;
  double S = scalar_curvature_y(space, y);
  double best_S = S;
  long since_progress = 0;
  std::deque<std::pair<Vector, double>> tail;  // (y, S) of accepted steps
  const std::size_t tail_cap = 4096;

  auto record = [&](long step) {
    tail.emplace_back(y, S);
    if (tail.size() > tail_cap) tail.pop_front();
    if (sink) sink(step, t, y, S, grad_norm_y(space, y, T));
  };
  record(0);

  for (long step = 1; step <= params.max_steps; ++step) {
    result.steps = step;
    double S_scale = 1.0 + std::abs(S);
    double gnorm = grad_norm_y(space, y, T);
    bool finish = gnorm <= params.grad_tol;
    if (!finish && params.newton_polish && gnorm <= 1e-5 * S_scale) {
      // basin reached: let Newton finish if it stays nearby
      if (auto cp = solve_critical(space, T, y.cwiseInverse())) {
        Vector yn = cp->x.cwiseInverse();
        if ((yn - y).norm() <= 1e-2 * y.norm() &&
            grad_norm_y(space, yn, T) <= params.grad_tol) {
          y = yn;
          finish = true;
        }
      }
    }
    if (finish) {
      Vector x = y.cwiseInverse();
      if (params.newton_polish) {
        if (auto cp = solve_critical(space, T, x)) x = cp->x;
      }
      Converged c{MetricPoint::from_x(x), scalar_curvature_x(space, x),
                  hessian_spectrum_unchecked(space, x, T)};
      result.outcome = std::move(c);
      return result;
    }
    if (min_coeff_over(y) <= params.boundary_eps) {
      std::vector<Vector> ty;
      ty.reserve(tail.size());
      for (const auto& [py, ps] : tail) ty.push_back(py);
      result.outcome = diagnose_divergence(space, T, ty, params);
      return result;
    }

    // Tighten the error scale with the gradient so the trajectory can
    // settle arbitrarily close to interior equilibria. Near the boundary
    // the gradient also vanishes (divergent PS tails); keep the controller
    // loose there, gated on the smallest trace share d_i T_i y_i.
    double min_share = 1.0;
    for (int i = 0; i < y.size(); ++i)
      min_share = std::min(min_share, space.dim(i) * T[i] * y[i]);
    double eff_rtol = params.rel_tol;
    if (min_share > 0.02) {
      eff_rtol = std::min(params.rel_tol, std::max(1e-13, 0.1 * gnorm));
    } else {
      // boundary escape: a dying exponential needs no fine resolution,
      // only the slow-manifold tail for the divergence diagnosis
      eff_rtol = std::max(params.rel_tol, 1e-4);
    }
    Vector f0 = flow_field(space, T, y);
    bool accepted = false;
    while (h > 1e-16) {
      Vector y_euler = y + h * f0;
      if (y_euler.minCoeff() <= 0.0) {
        h *= 0.5;
        continue;
      }
      Vector f1 = flow_field(space, T, y_euler);
      Vector y_heun = y + 0.5 * h * (f0 + f1);
      if (y_heun.minCoeff() <= 0.0) {
        h *= 0.5;
        continue;
      }
      double err = 0.0;
      for (int i = 0; i < y.size(); ++i) {
        double sc = 1e-14 + eff_rtol * std::abs(y_heun[i]);
        err = std::max(err, std::abs(y_heun[i] - y_euler[i]) / sc);
      }
      if (err > 1.0) {
        h *= std::max(0.2, 0.9 / std::sqrt(err));
        continue;
      }
      double tr = trace_y(space, T, y_heun);
      Vector yn = y_heun / tr;
      double Sn = scalar_curvature_y(space, yn);
      if (Sn < S - 1e-12 * (1.0 + std::abs(S))) {  // ascent must not lose ground
        h *= 0.5;
        continue;
      }
      t += h;
      y = std::move(yn);
      S = Sn;
      h = std::min(h * std::min(5.0, std::max(0.2, 0.9 / std::sqrt(err + 1e-300))), 1e6);
      accepted = true;
      break;
    }
    if (!accepted) {
      result.outcome = Stalled{MetricPoint::from_y(y), "step collapse below 1e-16"};
      return result;
    }
    record(step);
    if (S > best_S + 1e-14 * (1.0 + std::abs(best_S))) {
      best_S = S;
      since_progress = 0;
    } else if (++since_progress > params.stall_window) {
      result.outcome = Stalled{MetricPoint::from_y(y), "no S progress over stall window"};
      return result;
    }
  }
  result.outcome = Stalled{MetricPoint::from_y(y), "step budget exhausted"};
  return result;
}

Diverged diagnose_divergence(const SpaceSpec& space, const Candidate& T,
                             const std::vector<Vector>& tail_y, const FlowParams& params) {
  if (tail_y.empty()) throw spec_error("divergence diagnosis requires a nonempty tail");
  const Vector& last = tail_y.back();
  const int r = space.rank();

  IndexSet J;
  for (int i = 0; i < r; ++i)
    if (last[i] >= params.boundary_eps) J = J.unite(IndexSet::single(i));
  if (J.empty() || J.count() >= r)
    throw spec_error("tail does not exhibit a proper boundary stratum");

  Diverged d;
  d.stratum = {J, space.is_subalgebra(J) ? StratumKind::Subalgebra : StratumKind::Infinity};
  d.kind = d.stratum.kind == StratumKind::Subalgebra ? DivergenceKind::SubalgebraLimit
                                                     : DivergenceKind::InfinityAnomaly;

  const auto comp = J.complement(r).members();
  auto min_out = [&](const Vector& y) {
    double m = std::numeric_limits<double>::infinity();
    for (int i : comp) m = std::min(m, y[i]);
    return m;
  };

  // Level extrapolation: affine fit of S against min y over the last decade.
  double m_last = min_out(last);
  double sum_w = 0, sum_x = 0, sum_y = 0, sum_xx = 0, sum_xy = 0;
  for (const Vector& y : tail_y) {
    double m = min_out(y);
    if (m > 10.0 * m_last) continue;
    double S = scalar_curvature_y(space, y);
    sum_w += 1;
    sum_x += m;
    sum_y += S;
    sum_xx += m * m;
    sum_xy += m * S;
  }
  double det = sum_w * sum_xx - sum_x * sum_x;
  if (sum_w >= 2 && std::abs(det) > 1e-300) {
    d.level = (sum_y * sum_xx - sum_x * sum_xy) / det;
  } else {
    d.level = scalar_curvature_y(space, last);
  }

  if (d.kind == DivergenceKind::InfinityAnomaly) {
    // Bounded S toward an infinity stratum contradicts the boundary
    // estimates; report the raw data and let callers flag it.
    d.fiber_y = Vector();
    d.ps_residual = std::numeric_limits<double>::quiet_NaN();
    return d;
  }

  SpaceSpec fiber = restrict_to_fiber(space, J);
  Candidate TF = restrict_candidate(T, J);
  const auto mem = J.members();
  Vector fy(static_cast<long>(mem.size()));
  for (std::size_t a = 0; a < mem.size(); ++a) fy[static_cast<long>(a)] = last[mem[a]];
  fy /= trace_y(fiber, TF, fy);
  d.fiber_y = fy;

  DiagTensor RF = ricci_y(fiber, fy);
  DiagTensor res = RF - d.level * TF.components;
  d.ps_residual = std::sqrt(inner_g_y(fiber, res, res, fy));

  double best_gap = std::numeric_limits<double>::infinity();
  IndexSet best_J;
  for (const Stratum& st : enumerate_strata(space)) {
    if (st.kind != StratumKind::Subalgebra) continue;
    LevelValue a = alpha(space, T, st.members);
    double gap = std::abs(d.level - a.value);
    if (gap < best_gap) {
      best_gap = gap;
      best_J = st.members;
    }
  }
  if (std::isfinite(best_gap)) d.matched_alpha = std::make_pair(best_J, best_gap);
  return d;
}

std::optional<CriticalMetric> newton_critical(const SpaceSpec& space, const Candidate& T,
                                              const MetricPoint& start, const NewtonOptions& opts) {
  if (!T.definite()) throw spec_error("newton_critical requires a definite candidate");
  auto cp = solve_critical(space, T, start.as_x(), opts);
  if (!cp) return std::nullopt;
  CriticalMetric cm{MetricPoint::from_x(cp->x), cp->c,
                    hessian_spectrum_unchecked(space, cp->x, T)};
  return cm;
}

std::vector<CriticalMetric> newton_inventory(const SpaceSpec& space, const Candidate& T,
                                             int n_starts, std::uint64_t seed, int threads,
                                             const NewtonOptions& opts) {
  const int r = space.rank();
  std::vector<std::optional<CriticalPoint>> hits(static_cast<std::size_t>(n_starts));
  parallel_for(static_cast<std::size_t>(n_starts), threads, [&](std::size_t k) {
    auto eng = make_engine(seed, k);
    std::uniform_real_distribution<double> u(std::log(1e-2), std::log(1e2));
    Vector x(r);
    for (int i = 0; i < r; ++i) x[i] = std::exp(u(eng));
    hits[k] = solve_critical(space, T, x, opts);
  });

  // Order-independent dedup: sort roots, then cluster within 1e-6 relative.
  std::vector<Vector> roots;
  std::vector<double> cs;
  for (auto& h : hits) {
    if (!h) continue;
    roots.push_back(h->x);
    cs.push_back(h->c);
  }
  std::vector<std::size_t> order(roots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cs[a] != cs[b]) return cs[a] > cs[b];
    return std::lexicographical_compare(roots[a].data(), roots[a].data() + r, roots[b].data(),
                                        roots[b].data() + r);
  });
  std::vector<CriticalMetric> out;
  for (std::size_t idx : order) {
    bool dup = false;
    for (const CriticalMetric& cm : out) {
      Vector d = cm.point.as_x() - roots[idx];
      if (d.norm() <= 1e-6 * roots[idx].norm()) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    out.push_back(CriticalMetric{MetricPoint::from_x(roots[idx]), cs[idx],
                                 hessian_spectrum_unchecked(space, roots[idx], T)});
  }
  return out;
}

}  // namespace ricci
