#include "ricci/serialize.hpp"

#include "ricci/parallel.hpp"

#include <cstdio>
#include <cstdlib>

namespace ricci {

using nlohmann::json;

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RICCI_LAB_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

json vec_json(const Vector& v) {
  json a = json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

json to_json(const Spectrum& sp) {
  return json{{"eigenvalues", vec_json(sp.eigenvalues)},
              {"co_index", sp.co_index},
              {"degenerate", sp.degenerate},
              {"tolerance", sp.tolerance}};
}

json to_json(const LevelValue& lv) {
  json j{{"value", lv.value}, {"attained", lv.attained}};
  if (lv.witness_y) j["witness_y"] = vec_json(*lv.witness_y);
  return j;
}

json to_json(const LevelReport& rep) {
  return json{{"stratum", rep.stratum.members.str()},
              {"kind", rep.stratum.kind == StratumKind::Subalgebra ? "subalgebra" : "infinity"},
              {"alpha", to_json(rep.alpha)},
              {"beta", to_json(rep.beta)},
              {"derivative_at_infinity", rep.derivative_at_infinity}};
}

json to_json(const FlowResult& fr) {
  json j{{"steps", fr.steps}};
  if (fr.converged()) {
    const auto& c = std::get<Converged>(fr.outcome);
    j["outcome"] = "converged";
    j["point_x"] = vec_json(c.point.as_x());
    j["S"] = c.s_value;
    j["spectrum"] = to_json(c.spectrum);
  } else if (fr.diverged()) {
    const auto& d = std::get<Diverged>(fr.outcome);
    j["outcome"] = "diverged";
    j["stratum"] = d.stratum.members.str();
    j["kind"] = d.kind == DivergenceKind::SubalgebraLimit ? "subalgebra_limit" : "infinity_anomaly";
    j["level"] = d.level;
    j["fiber_y"] = vec_json(d.fiber_y);
    j["ps_residual"] = d.ps_residual;
    if (d.matched_alpha)
      j["matched_alpha"] = json{{"stratum", d.matched_alpha->first.str()},
                                {"gap", d.matched_alpha->second}};
  } else {
    const auto& s = std::get<Stalled>(fr.outcome);
    j["outcome"] = "stalled";
    j["point_y"] = vec_json(s.last.as_y());
    j["diagnostics"] = s.diagnostics;
  }
  return j;
}

json to_json(const CriticalMetric& cm) {
  return json{{"point_x", vec_json(cm.point.as_x())},
              {"c", cm.c},
              {"spectrum", to_json(cm.spectrum)}};
}

json to_json(const RegionLabel& lab) {
  json w = json::object();
  for (const auto& [k, v] : lab.witness) w[k] = v;
  return json{{"region", region_name(lab.region)}, {"witness", w}};
}

json to_json(const SaddleResult& sr) {
  return json{{"point_x", vec_json(sr.point.as_x())},
              {"S", sr.s_value},
              {"spectrum", to_json(sr.spectrum)},
              {"c_estimate", sr.c_estimate}};
}

void write_sweep_csv(std::ostream& os, const SpaceSpec& space,
                     const std::vector<SweepRecord>& records) {
  os << "# space=" << space.name() << "\n";
  const int r = space.rank();
  os << "T1";
  for (int i = 1; i < r; ++i) os << ",T" << (i + 1);
  os << ",definite,label";
  std::vector<std::string> keys;
  for (const SweepRecord& rec : records)
    if (rec.definite) {
      for (const auto& [k, v] : rec.witness) keys.push_back(k);
      break;
    }
  for (const auto& k : keys) os << "," << k;
  os << "\n";
  for (const SweepRecord& rec : records) {
    for (int i = 0; i < r; ++i) os << (i ? "," : "") << format_double(rec.T[i]);
    os << "," << (rec.definite ? 1 : 0) << "," << region_name(rec.region);
    if (rec.definite && rec.witness.size() == keys.size()) {
      for (const auto& [k, v] : rec.witness) os << "," << format_double(v);
    } else {
      for (std::size_t i = 0; i < keys.size(); ++i) os << ",";
    }
    os << "\n";
  }
}

void write_image_csv(std::ostream& os, const SpaceSpec& space,
                     const std::vector<ImagePoint>& points) {
  os << "# space=" << space.name() << "\n";
  const int r = space.rank();
  for (int i = 0; i < r; ++i) os << (i ? "," : "") << "x" << (i + 1);
  for (int i = 0; i < r; ++i) os << ",R" << (i + 1);
  long np = points.empty() ? 0 : points.front().projected.size();
  for (long i = 0; i < np; ++i) os << ",p" << (i + 1);
  os << ",definite\n";
  for (const ImagePoint& p : points) {
    for (int i = 0; i < r; ++i) os << (i ? "," : "") << format_double(p.x[i]);
    for (int i = 0; i < r; ++i) os << "," << format_double(p.ricci[i]);
    for (long i = 0; i < p.projected.size(); ++i) os << "," << format_double(p.projected[i]);
    os << "," << (p.definite ? 1 : 0) << "\n";
  }
}

void write_image_svg(std::ostream& os, const std::vector<ImagePoint>& points) {
  const double view = 720.0, margin = 20.0;
  double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
  for (const ImagePoint& p : points) {
    if (p.projected.size() < 2) continue;
    lo_x = std::min(lo_x, p.projected[0]);
    hi_x = std::max(hi_x, p.projected[0]);
    lo_y = std::min(lo_y, p.projected[1]);
    hi_y = std::max(hi_y, p.projected[1]);
  }
  if (!(hi_x > lo_x)) { lo_x = -1; hi_x = 1; }
  if (!(hi_y > lo_y)) { lo_y = -1; hi_y = 1; }
  double span = std::max(hi_x - lo_x, hi_y - lo_y);
  auto px = [&](double v) { return margin + (v - lo_x) / span * (view - 2 * margin); };
  auto py = [&](double v) { return view - margin - (v - lo_y) / span * (view - 2 * margin); };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << view << "\" height=\"" << view
     << "\" viewBox=\"0 0 " << view << " " << view << "\">\n";
  for (const ImagePoint& p : points) {
    if (p.projected.size() < 2) continue;
    os << "<circle cx=\"" << format_double(px(p.projected[0])) << "\" cy=\""
       << format_double(py(p.projected[1])) << "\" r=\"1\" fill=\""
       << (p.definite ? "#444466" : "#99bbee") << "\"/>\n";
  }
  os << "</svg>\n";
}

void write_locus_csv(std::ostream& os, const SpaceSpec& space,
                     const std::vector<LocusPoint>& points) {
  os << "# space=" << space.name() << "\n";
  const int r = space.rank();
  for (int i = 0; i < r; ++i) os << (i ? "," : "") << "x" << (i + 1);
  for (int i = 0; i < r; ++i) os << ",T" << (i + 1);
  os << ",sigma_min,sigma_gap\n";
  for (const LocusPoint& p : points) {
    for (int i = 0; i < r; ++i) os << (i ? "," : "") << format_double(p.x[i]);
    for (int i = 0; i < r; ++i) os << "," << format_double(p.projected_T[i]);
    os << "," << format_double(p.sigma_min) << "," << format_double(p.sigma_gap) << "\n";
  }
}

}  // namespace ricci
