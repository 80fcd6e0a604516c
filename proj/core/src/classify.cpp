#include "ricci/classify.hpp"

#include "ricci/parallel.hpp"
#include "ricci/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ricci {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* region_name(Region r) {
  switch (r) {
    case Region::GlobalMax: return "GlobalMax";
    case Region::SaddleByThmB: return "SaddleByThmB";
    case Region::SaddleByThmC: return "SaddleByThmC";
    case Region::MaxAndSaddle: return "MaxAndSaddle";
    case Region::NoPrediction: return "NoPrediction";
  }
  return "?";
}

RegionLabel region_label(const SpaceSpec& space, const Candidate& T, const SearchOptions& opts) {
  if (!T.definite()) throw spec_error("region predicates require a definite candidate");
  RegionLabel out;

  std::vector<Stratum> sub;
  for (const Stratum& st : enumerate_strata(space))
    if (st.kind == StratumKind::Subalgebra) sub.push_back(st);
  if (sub.empty()) {
    out.region = Region::NoPrediction;
    out.witness.emplace_back("subalgebra_strata", 0.0);
    return out;
  }

  std::vector<double> av(sub.size()), bv(sub.size());
  std::vector<int> dim_sum(sub.size(), 0);
  for (std::size_t k = 0; k < sub.size(); ++k) {
    av[k] = alpha(space, T, sub[k].members, opts).value;
    bv[k] = beta(space, T, sub[k].members, opts).value;
    for (int i : sub[k].members.members()) dim_sum[k] += space.dim(i);
    out.witness.emplace_back("alpha" + sub[k].members.str(), av[k]);
    out.witness.emplace_back("beta" + sub[k].members.str(), bv[k]);
  }

  auto pick_extreme = [&](bool top) {
    double ext = top ? *std::max_element(av.begin(), av.end())
                     : *std::min_element(av.begin(), av.end());
    double tol = 1e-9 * (1.0 + std::abs(ext));
    std::size_t pick = sub.size();
    for (std::size_t k = 0; k < sub.size(); ++k) {
      if (std::abs(av[k] - ext) > tol) continue;
      if (pick == sub.size() || dim_sum[k] < dim_sum[pick]) pick = k;
    }
    return pick;
  };

  // Strict inequalities up to arithmetic noise: a derivative that is zero
  // in exact arithmetic (the red-dot candidates) must not count as a sign.
  auto strict = [](double v, double scale) { return v > 1e-12 * (1.0 + std::abs(scale)); };

  // Global maximum: positive derivative at the top level (lowest dimension
  // among ties).
  std::size_t top = pick_extreme(true);
  bool global_max = strict(bv[top] - av[top], av[top]);
  out.witness.emplace_back("top_stratum_derivative", bv[top] - av[top]);
  out.witness.emplace_back("pred_global_max", global_max ? 1.0 : 0.0);

  // Composed canonical variations: generalized Wallach shape with two
  // negative derivatives.
  bool thm_b = false;
  if (generalized_wallach_shape(space) && sub.size() == 3) {
    int negatives = 0;
    for (std::size_t k = 0; k < sub.size(); ++k)
      if (strict(av[k] - bv[k], av[k])) ++negatives;
    thm_b = negatives >= 2;
    out.witness.emplace_back("negative_derivatives", static_cast<double>(negatives));
  }
  out.witness.emplace_back("pred_thm_b", thm_b ? 1.0 : 0.0);

  // Lowest-level argument: minimal-alpha stratum (lowest dimension among
  // ties) with negative derivative, a second subalgebra stratum, and at
  // most two-summand fibers elsewhere.
  bool thm_c = false;
  if (sub.size() >= 2) {
    std::size_t low = pick_extreme(false);
    bool fibers_small = true;
    for (std::size_t k = 0; k < sub.size(); ++k)
      if (k != low && sub[k].members.count() > 2) fibers_small = false;
    thm_c = fibers_small && strict(av[low] - bv[low], av[low]);
    out.witness.emplace_back("low_stratum_derivative", bv[low] - av[low]);
  }
  out.witness.emplace_back("pred_thm_c", thm_c ? 1.0 : 0.0);

  // Space-specific inequality values, as displayed in the worked examples.
  if (space.name() == "wallach_su3") {
    for (int i = 0; i < 3; ++i) {
      int j = (i + 1) % 3, k = (i + 2) % 3;
      out.witness.emplace_back("ratio" + IndexSet::single(i).str(),
                               (T[j] + T[k]) / (3.0 * T[i]));
    }
  } else if (space.name() == "g2_u2") {
    double t1 = T[0] / T[2], t2 = T[1] / T[2];
    out.witness.emplace_back("cond1_low", t2 - 2.0 / 9.0);
    out.witness.emplace_back("cond1_high", (t1 + 1.0) / 12.0 - t2);
    out.witness.emplace_back("cond2_low", t2 - (10.0 - 6.0 * t1) / 3.0);
    out.witness.emplace_back("cond2_high", 2.0 / 9.0 - t2);
  } else if (space.name() == "f4_u3su2") {
    double t1 = T[0] / T[3], t2 = T[1] / T[3], t3 = T[2] / T[3];
    double q = 3.0 * t1 + t3;
    double disc = -28.0 * q * q + 144.0 * q * t2 + 81.0 * t2 * t2;
    double branch = disc >= 0.0 ? (16.0 * q + 18.0 * t2 - 2.0 * std::sqrt(disc)) / (8.0 * q * q)
                                : std::numeric_limits<double>::quiet_NaN();
    bool col1 = t3 >= 3.0 / 8.0 && 30.0 * t3 < 2.0 * t1 + 3.0 * t2 + 1.0;
    bool col2 = t3 <= 3.0 / 8.0 && 7.0 * q >= 36.0 * t2 && t2 > 7.0 / 4.0;
    bool col3 = t3 <= 3.0 / 8.0 && 7.0 * q < 36.0 * t2 && branch < 2.0 / 9.0;
    out.witness.emplace_back("col1_t3_slack", t3 - 3.0 / 8.0);
    out.witness.emplace_back("col1_deriv_slack", 2.0 * t1 + 3.0 * t2 + 1.0 - 30.0 * t3);
    out.witness.emplace_back("col2_branch_slack", 7.0 * q - 36.0 * t2);
    out.witness.emplace_back("col2_t2_slack", t2 - 7.0 / 4.0);
    out.witness.emplace_back("col3_branch_value", branch);
    out.witness.emplace_back("collection",
                             col1 ? 1.0 : (col2 ? 2.0 : (col3 ? 3.0 : 0.0)));
  }

  bool saddle = thm_b || thm_c;
  if (global_max && saddle) out.region = Region::MaxAndSaddle;
  else if (global_max) out.region = Region::GlobalMax;
  else if (thm_b) out.region = Region::SaddleByThmB;
  else if (thm_c) out.region = Region::SaddleByThmC;
  else out.region = Region::NoPrediction;
  return out;
}

std::vector<SweepRecord> sweep_plane(const SpaceSpec& space, const SweepSpec& spec, int threads,
                                     const SearchOptions& opts) {
  const int r = space.rank();
  if (spec.res_i < 1 || spec.res_j < 1) throw spec_error("degenerate sweep grid");
  if (spec.mode == SweepSpec::Mode::WallachXY && r != 3)
    throw spec_error("WallachXY sweep requires a three-module space");
  if (spec.mode == SweepSpec::Mode::TComponents) {
    if (spec.axis_i == spec.axis_j || spec.axis_i < 0 || spec.axis_j < 0 || spec.axis_i >= r ||
        spec.axis_j >= r)
      throw spec_error("sweep axes must be distinct valid component indices");
    if (spec.fixed.size() != r) throw spec_error("fixed component template must have length r");
  }

  std::vector<SweepRecord> records(static_cast<std::size_t>(spec.res_i) * spec.res_j);
  parallel_for(records.size(), threads, [&](std::size_t idx) {
    int ki = static_cast<int>(idx) / spec.res_j;
    int kj = static_cast<int>(idx) % spec.res_j;
    double u = spec.lo_i + (ki + 0.5) * (spec.hi_i - spec.lo_i) / spec.res_i;
    double v = spec.lo_j + (kj + 0.5) * (spec.hi_j - spec.lo_j) / spec.res_j;
    SweepRecord rec;
    if (spec.mode == SweepSpec::Mode::WallachXY) {
      // u = (4 sqrt3/3)(T1 - T2), v = 4 T3 - 4/3, with T1+T2+T3 = 1.
      Vector t(3);
      t[2] = (v + 4.0 / 3.0) / 4.0;
      double diff = std::sqrt(3.0) / 4.0 * u;
      t[0] = 0.5 * (1.0 - t[2] + diff);
      t[1] = 0.5 * (1.0 - t[2] - diff);
      rec.T = t;
    } else {
      Vector t = spec.fixed;
      t[spec.axis_i] = u;
      t[spec.axis_j] = v;
      rec.T = t;
    }
    Candidate cand{rec.T};
    rec.definite = cand.definite();
    if (rec.definite) {
      RegionLabel lab = region_label(space, cand, opts);
      rec.region = lab.region;
      rec.witness = std::move(lab.witness);
    }
    records[idx] = std::move(rec);
  });
  return records;
}

Eigen::Vector2d wallach_xy_projection(const Vector& ricci) {
  double s = ricci.sum();
  Eigen::Vector2d p;
  double t1 = ricci[0] / s, t2 = ricci[1] / s, t3 = ricci[2] / s;
  p[0] = 4.0 * std::sqrt(3.0) / 3.0 * (t1 - t2);
  p[1] = 4.0 * t3 - 4.0 / 3.0;
  return p;
}

std::vector<ImagePoint> ricci_image_sample(const SpaceSpec& space, int n, double lo, double hi,
                                           std::uint64_t seed, bool log_uniform, int threads) {
  if (n < 1) throw spec_error("sample count must be >= 1");
  if (!(lo > 0.0) || !(hi > lo)) throw spec_error("sample range must satisfy 0 < lo < hi");
  const int r = space.rank();
  const bool wallach = generalized_wallach_shape(space);
  std::vector<ImagePoint> out(static_cast<std::size_t>(n));
  parallel_for(out.size(), threads, [&](std::size_t k) {
    auto eng = make_engine(seed, k);
    Vector x(r);
    x[r - 1] = 1.0;  // scale gauge; Ric is scale invariant
    if (log_uniform) {
      std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
      for (int i = 0; i + 1 < r; ++i) x[i] = std::exp(u(eng));
    } else {
      std::uniform_real_distribution<double> u(lo, hi);
      for (int i = 0; i + 1 < r; ++i) x[i] = u(eng);
    }
    ImagePoint p;
    p.x = x;
    p.ricci = ricci_x(space, x);
    p.definite = p.ricci.minCoeff() > 0.0;
    if (wallach) {
      p.projected = wallach_xy_projection(p.ricci);
    } else {
      Vector proj(r - 1);
      for (int i = 0; i + 1 < r; ++i) proj[i] = p.ricci[i] / p.ricci[r - 1];
      p.projected = proj;
    }
    out[k] = std::move(p);
  });
  return out;
}

double wallach_degenerate_quartic(double x1, double x2) {
  return std::pow(x1, 4) - (2.0 * x2 * x2 + 2.0) * x1 * x1 + std::pow(x2, 4) - 2.0 * x2 * x2 + 1.0;
}

double g2_degenerate_quintic(double x1, double x2, double x3) {
  return 3.0 * std::pow(x1, 5) - (6.0 * x2 * x2 + 6.0 * x3 * x3) * std::pow(x1, 3) +
         3.0 * std::pow(x2 - x3, 2) * std::pow(x2 + x3, 2) * x1 - 8.0 * x2 * x2 * std::pow(x3, 3);
}

namespace {

LocusPoint certified_point(const SpaceSpec& space, const Vector& x, double threshold) {
  LocusPoint p;
  p.x = x;
  RankReport rep = rank_dric(space, MetricPoint::from_x(x), threshold);
  const int r = space.rank();
  p.sigma_min = rep.singular_values[r - 2] / rep.singular_values[0];
  p.sigma_gap = rep.gap;
  DiagTensor R = ricci_x(space, x);
  Vector proj(r);
  for (int i = 0; i < r; ++i) proj[i] = R[i] / R[r - 1];
  p.projected_T = proj;
  return p;
}

std::vector<LocusPoint> closed_form_locus(const SpaceSpec& space, const LocusSpec& spec) {
  std::vector<LocusPoint> out;
  auto emit = [&](const Vector& x) {
    LocusPoint p = certified_point(space, x, spec.deficiency_threshold);
    if (p.sigma_min < spec.deficiency_threshold) out.push_back(std::move(p));
  };
  if (space.name() == "wallach_su3") {
    for (int k = 0; k < spec.count; ++k) {
      double s = spec.param_lo + (spec.param_hi - spec.param_lo) * k / std::max(1, spec.count - 1);
      Vector x(3);
      x[2] = 1.0;
      x[1] = s;
      switch (spec.branch) {
        case 0: x[0] = 1.0 - s; break;   // x1 + x2 = 1
        case 1: x[0] = 1.0 + s; break;   // x1 - x2 = 1
        case 2: x[0] = s - 1.0; break;   // x2 - x1 = 1
        default: throw spec_error("wallach locus branch must be 0, 1 or 2");
      }
      if (x[0] <= 0.0) continue;
      emit(x);
    }
    return out;
  }
  if (space.name() == "g2_u2") {
    if (spec.branch != 0 && spec.branch != 1) throw spec_error("g2 locus branch must be 0 (+) or 1 (-)");
    for (int k = 0; k < spec.count; ++k) {
      double t = spec.param_lo + (spec.param_hi - spec.param_lo) * k / std::max(1, spec.count - 1);
      double root = std::sqrt(9.0 * std::pow(t, 4) + 6.0 * std::pow(t, 3) + 6.0 * t + 4.0);
      double sgn = spec.branch == 0 ? 1.0 : -1.0;
      double x2sq = t * t + 1.0 + 4.0 / (3.0 * t) + sgn * 2.0 / (3.0 * t) * root;
      if (!(x2sq > 0.0)) continue;
      Vector x(3);
      x[0] = t;
      x[1] = std::sqrt(x2sq);
      x[2] = 1.0;
      emit(x);
    }
    return out;
  }
  throw spec_error("no closed-form degenerate locus for " + space.name() +
                   "; use continuation mode");
}

/// Signed defining function for rank deficiency along a traced curve:
/// determinant of the restricted Jacobian with one row dropped. The row is
/// chosen from the left null vector at the seed and revalidated by the
/// singular-value certificate on every accepted point.
struct MinorFunction {
  const SpaceSpec& space;
  int drop_row = 0;

  Matrix restricted(const Vector& x) const {
    const int r = space.rank();
    Eigen::HouseholderQR<Matrix> qr(x);
    Matrix Q = qr.householderQ() * Matrix::Identity(r, r);
    return jacobian_dric_x(space, x) * Q.rightCols(r - 1);
  }

  double operator()(const Vector& x) const {
    const int r = space.rank();
    Matrix M = restricted(x);
    Matrix Sq(r - 1, r - 1);
    int row = 0;
    for (int i = 0; i < r; ++i) {
      if (i == drop_row) continue;
      Sq.row(row++) = M.row(i);
    }
    return Sq.determinant();
  }
};

std::vector<LocusPoint> continuation_locus(const SpaceSpec& space, const LocusSpec& spec) {
  const int r = space.rank();
  if (spec.seed_x.size() != r) throw spec_error("continuation requires a seed point of length r");
  if (spec.seed_x.minCoeff() <= 0.0) throw spec_error("continuation seed must be positive");

  MinorFunction minor{space, 0};
  {
    Matrix M = minor.restricted(spec.seed_x);
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU);
    Vector left_null = svd.matrixU().col(r - 1).cwiseAbs();
    Eigen::Index row = 0;
    left_null.maxCoeff(&row);
    minor.drop_row = static_cast<int>(row);
  }

  // The curve lives in the (x_1, x_2) slice with the gauge x_r = 1 and any
  // remaining coordinates frozen at the seed.
  auto lift = [&](const Eigen::Vector2d& u) {
    Vector x = spec.seed_x;
    x[0] = u[0];
    x[1] = u[1];
    return x;
  };
  auto g = [&](const Eigen::Vector2d& u) { return minor(lift(u)); };
  auto grad_g = [&](const Eigen::Vector2d& u) {
    Eigen::Vector2d gr;
    for (int i = 0; i < 2; ++i) {
      double h = 1e-6 * std::max(1.0, std::abs(u[i]));
      Eigen::Vector2d up = u, um = u;
      up[i] += h;
      um[i] -= h;
      gr[i] = (g(up) - g(um)) / (2.0 * h);
    }
    return gr;
  };
  auto correct = [&](Eigen::Vector2d u, const Eigen::Vector2d& tangent) {
    for (int it = 0; it < 50; ++it) {
      double val = g(u);
      Eigen::Vector2d gr = grad_g(u);
      Eigen::Matrix2d A;
      A.row(0) = gr.transpose();
      A.row(1) = tangent.transpose();
      Eigen::Vector2d rhs(-val, 0.0);
      Eigen::Vector2d du = A.fullPivLu().solve(rhs);
      u += du;
      if (u.minCoeff() <= 0.0) return std::optional<Eigen::Vector2d>{};
      if (du.norm() < 1e-13 * (1.0 + u.norm())) return std::optional<Eigen::Vector2d>{u};
    }
    return std::optional<Eigen::Vector2d>{};
  };

  // Polish the seed onto g = 0 along the gradient direction.
  Eigen::Vector2d u0(spec.seed_x[0], spec.seed_x[1]);
  for (int it = 0; it < 50; ++it) {
    double val = g(u0);
    Eigen::Vector2d gr = grad_g(u0);
    double gn = gr.squaredNorm();
    if (gn == 0.0) break;
    Eigen::Vector2d du = -val / gn * gr;
    u0 += du;
    if (du.norm() < 1e-13 * (1.0 + u0.norm())) break;
  }
  if (u0.minCoeff() <= 0.0) throw spec_error("continuation seed polish left the positive chart");

  std::vector<LocusPoint> out;
  auto accept = [&](const Eigen::Vector2d& u) {
    LocusPoint p = certified_point(space, lift(u), spec.deficiency_threshold);
    bool ok = p.sigma_min < spec.deficiency_threshold;
    if (ok) out.push_back(std::move(p));
    return ok;
  };
  if (!accept(u0)) throw spec_error("continuation seed does not certify rank deficiency");

  for (double dir : {+1.0, -1.0}) {
    Eigen::Vector2d prev = u0;
    // first tangent: rotate the gradient by 90 degrees
    Eigen::Vector2d gr = grad_g(u0);
    Eigen::Vector2d tangent(-gr[1], gr[0]);
    tangent.normalize();
    tangent *= dir;
    Eigen::Vector2d cur = prev;
    bool have_two = false;
    for (int stepk = 0; stepk < spec.max_steps; ++stepk) {
      Eigen::Vector2d t = have_two ? (cur - prev).normalized() : tangent;
      Eigen::Vector2d pred = cur + spec.step * t;
      auto corr = correct(pred, t);
      if (!corr) break;
      if (corr->minCoeff() < 1e-3 || corr->maxCoeff() > 1e3) break;
      prev = cur;
      cur = *corr;
      have_two = true;
      if (!accept(cur)) break;
    }
  }
  return out;
}

}  // namespace

std::vector<LocusPoint> degenerate_locus(const SpaceSpec& space, const LocusSpec& spec) {
  return spec.mode == LocusSpec::Mode::ClosedForm ? closed_form_locus(space, spec)
                                                  : continuation_locus(space, spec);
}

}  // namespace ricci
