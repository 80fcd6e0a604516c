#include "ricci/mountainpass.hpp"

#include "ricci/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ricci {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Vector> resample_polyline(const std::vector<Vector>& nodes, int count) {
  std::vector<double> arc(nodes.size(), 0.0);
  for (std::size_t k = 1; k < nodes.size(); ++k)
    arc[k] = arc[k - 1] + (nodes[k] - nodes[k - 1]).norm();
  double total = arc.back();
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  std::size_t seg = 0;
  for (int k = 0; k < count; ++k) {
    double target = total * k / (count - 1);
    while (seg + 2 < nodes.size() && arc[seg + 1] < target) ++seg;
    double len = arc[seg + 1] - arc[seg];
    double u = len > 0.0 ? (target - arc[seg]) / len : 0.0;
    out.push_back((1.0 - u) * nodes[seg] + u * nodes[seg + 1]);
  }
  return out;
}

std::vector<Vector> segment_nodes(const std::vector<Vector>& waypoints, int count) {
  return resample_polyline(waypoints, count);
}

void renormalize(const SpaceSpec& space, const Candidate& T, Vector& y) {
  y /= trace_y(space, T, y);
}

int argmin_S(const SpaceSpec& space, const std::vector<Vector>& nodes, double& inf_S) {
  inf_S = kInf;
  int arg = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    double S = scalar_curvature_y(space, nodes[k]);
    if (S < inf_S) {
      inf_S = S;
      arg = static_cast<int>(k);
    }
  }
  return arg;
}

/// Bounded-time gradient advance of a single node (same stepper as flow()).
Vector advance_node(const SpaceSpec& space, const Candidate& T, Vector y, double time,
                    const FlowParams& params, bool& clamped) {
  double t = 0.0, h = std::min(params.dt0, time);
  double S = scalar_curvature_y(space, y);
  auto field = [&](const Vector& p) -> Vector {
    DiagTensor G = grad_constrained_y(space, p, T);
    return -(p.array().square() * G.array()).matrix();
  };
  while (t < time) {
    Vector f0 = field(y);
    bool accepted = false;
    while (h > 1e-16) {
      double hstep = std::min(h, time - t);
      Vector y_euler = y + hstep * f0;
      if (y_euler.minCoeff() <= 0.0) {
        h *= 0.5;
        continue;
      }
      Vector f1 = field(y_euler);
      Vector y_heun = y + 0.5 * hstep * (f0 + f1);
      if (y_heun.minCoeff() <= 0.0) {
        h *= 0.5;
        continue;
      }
      double err = 0.0;
      for (int i = 0; i < y.size(); ++i) {
        double sc = 1e-14 + params.rel_tol * std::abs(y_heun[i]);
        err = std::max(err, std::abs(y_heun[i] - y_euler[i]) / sc);
      }
      if (err > 1.0) {
        h *= std::max(0.2, 0.9 / std::sqrt(err));
        continue;
      }
      renormalize(space, T, y_heun);
      double Sn = scalar_curvature_y(space, y_heun);
      if (Sn < S - 1e-12 * (1.0 + std::abs(S))) {
        h *= 0.5;
        continue;
      }
      t += hstep;
      y = std::move(y_heun);
      S = Sn;
      h = std::min(h * 1.5, time);
      accepted = true;
      break;
    }
    if (!accepted) break;
    if (y.minCoeff() < 1e-9) {
      for (int i = 0; i < y.size(); ++i) y[i] = std::max(y[i], 1e-9);
      renormalize(space, T, y);
      clamped = true;
      break;
    }
  }
  return y;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

PathState build_path_wallach(const SpaceSpec& space, const Candidate& T, const PathOptions& opts) {
  if (!generalized_wallach_shape(space))
    throw hypothesis_error("space is not generalized-Wallach-shaped (need r=3 with only [123] != 0)");
  if (!T.definite()) throw hypothesis_error("candidate must be positive definite");

  double a[3], b[3];
  for (int i = 0; i < 3; ++i) {
    IndexSet J = IndexSet::single(i);
    a[i] = alpha(space, T, J, opts.search).value;
    b[i] = beta(space, T, J, opts.search).value;
  }
  int ord[3] = {0, 1, 2};
  std::sort(ord, ord + 3, [&](int p, int q) { return a[p] > a[q]; });
  const int i1 = ord[0], i2 = ord[1], i3 = ord[2];

  int negatives = 0;
  for (int i = 0; i < 3; ++i)
    if (b[i] - a[i] < 0.0) ++negatives;
  if (negatives < 2)
    throw hypothesis_error("need two negative derivatives, got beta-alpha = (" + fmt(b[0] - a[0]) +
                           ", " + fmt(b[1] - a[1]) + ", " + fmt(b[2] - a[2]) + ")");
  if (!(b[i1] - a[i1] < 0.0))
    throw hypothesis_error("top stratum " + IndexSet::single(i1).str() +
                           " has non-negative derivative " + fmt(b[i1] - a[i1]));
  if (!(b[i2] - a[i2] < 0.0))
    throw hypothesis_error("second stratum " + IndexSet::single(i2).str() +
                           " has non-negative derivative " + fmt(b[i2] - a[i2]));
  if (!(a[i2] > a[i3] + 1e-12 * (1.0 + std::abs(a[i3]))))
    throw hypothesis_error("no strict level gap: alpha_(2) = " + fmt(a[i2]) +
                           " vs alpha_(3) = " + fmt(a[i3]));

  double w = 0.0;
  for (int i = 0; i < 3; ++i) w += space.dim(i) * T[i];
  w = 1.0 / w;
  Vector center = Vector::Constant(3, w);

  auto anchor_toward = [&](int vertex) {
    Vector v = Vector::Zero(3);
    v[vertex] = 1.0 / (space.dim(vertex) * T[vertex]);
    double lam = std::min(1.0, opts.anchor_distance / w);
    Vector p = v + lam * (center - v);
    return p;
  };

  std::vector<Vector> waypoints = {anchor_toward(i1), center, anchor_toward(i2)};
  PathState path;
  path.nodes = segment_nodes(waypoints, opts.node_count);
  for (Vector& n : path.nodes) renormalize(space, T, n);

  double inf_S;
  path.min_index = argmin_S(space, path.nodes, inf_S);
  if (!(inf_S > a[i3]))
    throw hypothesis_error("initial path dips to " + fmt(inf_S) +
                           ", not above the lowest level alpha = " + fmt(a[i3]));
  path.c_estimate = inf_S;
  path.bracket = {a[i3], a[i2]};
  return path;
}

PathState build_path_flag(const SpaceSpec& space, const Candidate& T, IndexSet k_low,
                          const PathOptions& opts) {
  if (!T.definite()) throw hypothesis_error("candidate must be positive definite");
  if (!space.is_subalgebra(k_low))
    throw hypothesis_error(k_low.str() + " is not a subalgebra stratum");

  std::vector<Stratum> sub;
  for (const Stratum& st : enumerate_strata(space))
    if (st.kind == StratumKind::Subalgebra) sub.push_back(st);
  if (sub.size() < 2) throw hypothesis_error("need a second subalgebra stratum");

  auto dim_sum = [&](IndexSet J) {
    int s = 0;
    for (int i : J.members()) s += space.dim(i);
    return s;
  };

  double a_low = alpha(space, T, k_low, opts.search).value;
  for (const Stratum& st : sub) {
    if (st.members == k_low) continue;
    double av = alpha(space, T, st.members, opts.search).value;
    double tol = 1e-9 * (1.0 + std::abs(a_low));
    if (av < a_low - tol)
      throw hypothesis_error("alpha at " + st.members.str() + " = " + fmt(av) +
                             " undercuts alpha at " + k_low.str() + " = " + fmt(a_low));
    if (av <= a_low + tol && dim_sum(st.members) < dim_sum(k_low))
      throw hypothesis_error("tied stratum " + st.members.str() +
                             " has lower dimension than " + k_low.str());
  }
  LevelValue beta_low = beta(space, T, k_low, opts.search);
  if (!(beta_low.value - a_low < 0.0))
    throw hypothesis_error("beta - alpha at " + k_low.str() + " = " +
                           fmt(beta_low.value - a_low) + " is not negative");

  // Second anchor: the other subalgebra vertex with the highest alpha.
  IndexSet other;
  double best_alpha = -kInf;
  for (const Stratum& st : sub) {
    if (st.members == k_low || st.members.count() != 1) continue;
    double av = alpha(space, T, st.members, opts.search).value;
    if (av > best_alpha) {
      best_alpha = av;
      other = st.members;
    }
  }
  if (other.empty()) throw hypothesis_error("no second vertex subalgebra stratum to anchor at");

  PathState path;
  auto anchor_for = [&](IndexSet J) {
    LevelValue av = alpha(space, T, J, opts.search);
    LevelValue bv = beta(space, T, J, opts.search);
    Vector fiber_y;
    if (av.witness_y) {
      fiber_y = *av.witness_y;
    } else {
      // unattained fiber level: fall back to the equal-coefficient metric
      auto mem = J.members();
      fiber_y = Vector::Ones(static_cast<long>(mem.size()));
      double tr = 0.0;
      for (std::size_t q = 0; q < mem.size(); ++q) tr += space.dim(mem[q]) * T[mem[q]];
      fiber_y /= tr;
      path.warnings.push_back("alpha witness unattained at " + J.str() + "; equal-coefficient fiber used");
    }
    Vector base_y;
    if (bv.witness_y) {
      base_y = *bv.witness_y;
    } else {
      auto comp = J.complement(space.rank()).members();
      base_y = Vector::Ones(static_cast<long>(comp.size()));
      double tr = 0.0;
      for (std::size_t q = 0; q < comp.size(); ++q) tr += space.dim(comp[q]) * T[comp[q]];
      base_y /= tr;
      path.warnings.push_back("beta witness unattained at " + J.str() + "; equal-coefficient base used");
    }
    CanonicalVariation cv = canonical_variation(space, T, J, fiber_y, base_y);
    double t0 = opts.anchor_distance / base_y.minCoeff();
    t0 = std::min(t0, 0.5 * cv.t_max);
    return cv.point(t0).as_y();
  };

  // Route through the simplex center: the straight anchor-to-anchor segment
  // hugs an infinity edge where S is deeply negative, which costs the
  // relaxation many rounds for nothing.
  double w = 0.0;
  for (int i = 0; i < space.rank(); ++i) w += space.dim(i) * T[i];
  Vector center = Vector::Constant(space.rank(), 1.0 / w);
  std::vector<Vector> waypoints = {anchor_for(k_low), center, anchor_for(other)};
  path.nodes = segment_nodes(waypoints, opts.node_count);
  for (Vector& n : path.nodes) renormalize(space, T, n);
  double inf_S;
  path.min_index = argmin_S(space, path.nodes, inf_S);
  path.c_estimate = inf_S;
  path.bracket = {-kInf, a_low};
  return path;
}

PathState relax(const SpaceSpec& space, const Candidate& T, PathState path,
                const RelaxOptions& opts, const RelaxSink& sink) {
  int stable = 0;
  for (int round = 1; round <= opts.max_rounds; ++round) {
    std::vector<char> clamped(path.nodes.size(), 0);
    parallel_for(path.nodes.size(), opts.threads, [&](std::size_t k) {
      bool cl = false;
      path.nodes[k] = advance_node(space, T, path.nodes[k], opts.flow_time, opts.flow, cl);
      clamped[k] = cl ? 1 : 0;
    });
    for (std::size_t k = 0; k < clamped.size(); ++k)
      if (clamped[k])
        path.warnings.push_back("round " + std::to_string(round) + ": node " + std::to_string(k) +
                                " clamped at the boundary");
    path.nodes = resample_polyline(path.nodes, static_cast<int>(path.nodes.size()));
    for (Vector& n : path.nodes) renormalize(space, T, n);

    double inf_S;
    path.min_index = argmin_S(space, path.nodes, inf_S);
    double prev = path.c_estimate;
    path.c_estimate = std::max(path.c_estimate, inf_S);
    if (sink) sink(round, inf_S, path.min_index, path.c_estimate);
    if (std::abs(path.c_estimate - prev) < opts.stabilize_delta) {
      if (++stable >= opts.stabilize_rounds) break;
    } else {
      stable = 0;
    }
  }
  return path;
}

std::optional<SaddleResult> extract_saddle(const SpaceSpec& space, const Candidate& T,
                                           const PathState& path, const NewtonOptions& opts) {
  const int n = static_cast<int>(path.nodes.size());
  std::vector<int> tries;
  for (int off = 0; off <= 5; ++off) {
    for (int sign : {+1, -1}) {
      int k = path.min_index + sign * off;
      if (k >= 0 && k < n) tries.push_back(k);
      if (off == 0) break;
    }
  }
  for (int k : tries) {
    auto cm = newton_critical(space, T, MetricPoint::from_y(path.nodes[static_cast<std::size_t>(k)]),
                              opts);
    if (!cm) continue;
    if (cm->spectrum.co_index > 1) continue;
    if (std::abs(cm->c - path.c_estimate) > 1e-3 * (1.0 + std::abs(path.c_estimate))) continue;
    SaddleResult res{cm->point, cm->c, cm->spectrum, path.c_estimate};
    return res;
  }
  return std::nullopt;
}

}  // namespace ricci
