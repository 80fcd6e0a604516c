// ricci-lab: command line front end for the prescribed-Ricci-curvature
// laboratory. One subcommand per pipeline; every run with --out writes a
// JSON manifest next to the outputs, and `rerun` replays a manifest.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ricci/classify.hpp"
#include "ricci/dynamics.hpp"
#include "ricci/invariants.hpp"
#include "ricci/mountainpass.hpp"
#include "ricci/serialize.hpp"
#include "ricci/space.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;
using namespace ricci;

// exit codes: 0 ok, 2 validation, 3 no result, 4 anomaly
constexpr int kOk = 0, kValidation = 2, kNoResult = 3, kAnomaly = 4;

Vector parse_csv(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  return Eigen::Map<const Vector>(vals.data(), static_cast<long>(vals.size()));
}

std::string csv_of(const Vector& v) {
  std::string out;
  for (long i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

SpaceSpec load_space_arg(const std::string& arg) {
  if (arg.find('{') != std::string::npos) return load_space(arg);
  if (arg.size() > 5 && arg.substr(arg.size() - 5) == ".json") {
    std::ifstream in(arg);
    if (!in) throw spec_error("cannot open space document " + arg);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_space(ss.str());
  }
  return catalog(arg);
}

struct OutputWriter {
  std::string out_path;  // empty: stdout
  json manifest;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void write(const std::string& payload) {
    if (out_path.empty()) {
      std::cout << payload;
      return;
    }
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw spec_error("cannot open output file " + out_path);
    os << payload;
    os.close();
    manifest["outputs"] = json::array({out_path});
    manifest["version"] = kVersion;
    manifest["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream ms(out_path + ".manifest.json", std::ios::binary);
    ms << manifest.dump(2) << "\n";
  }
};

struct Common {
  std::string space_arg;
  std::string t_arg;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
  int threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool needs_T = true) {
  cmd->add_option("--space", c.space_arg, "catalog name or space document (.json path)")
      ->required();
  auto* topt = cmd->add_option("--T", c.t_arg, "candidate components, comma separated");
  if (needs_T) topt->required();
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd->add_option("--out", c.out, "output path (default: stdout)");
  cmd->add_option("--format", c.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--threads", c.threads,
                  "worker cap (default: RICCI_LAB_THREADS or hardware)");
}

json common_manifest(const std::string& command, const Common& c) {
  json m;
  m["command"] = command;
  m["config"] = {{"space", c.space_arg}, {"T", c.t_arg},        {"seed", c.seed},
                 {"out", c.out},         {"format", c.format},  {"threads", c.threads}};
  return m;
}

int run_curvature(const Common& c, const std::string& x_arg, const std::string& y_arg) {
  SpaceSpec space = load_space_arg(c.space_arg);
  if (x_arg.empty() == y_arg.empty())
    throw spec_error("provide exactly one of --x or --y");
  MetricPoint p = x_arg.empty() ? MetricPoint::from_y(parse_csv(y_arg))
                                : MetricPoint::from_x(parse_csv(x_arg));
  if (p.size() != space.rank()) throw spec_error("coordinate count does not match the space");
  json out;
  out["space"] = space.name();
  out["x"] = json::parse("[" + csv_of(p.as_x()) + "]");
  out["S"] = scalar_curvature(space, p);
  DiagTensor R = ricci_coefficients(space, p);
  out["ricci"] = json::parse("[" + csv_of(R) + "]");
  if (!c.t_arg.empty()) {
    Candidate T{parse_csv(c.t_arg)};
    Vector y = p.as_y();
    double tr = trace_y(space, T, y);
    out["trace_T"] = tr;
    if (std::abs(tr - 1.0) <= 1e-9) {
      DiagTensor G = grad_constrained(space, p, T);
      double gn = std::sqrt(inner_g(space, G, G, p));
      out["grad_norm"] = gn;
      if (gn <= 1e-5 * (1.0 + std::abs(out["S"].get<double>())))
        out["spectrum"] = to_json(hessian_constrained(space, p, T));
    }
  }
  OutputWriter w;
  w.out_path = c.out;
  w.manifest = common_manifest("curvature", c);
  w.manifest["config"]["x"] = x_arg;
  w.manifest["config"]["y"] = y_arg;
  w.write(out.dump(2) + "\n");
  return kOk;
}

int run_levels(const Common& c, const std::string& stratum_arg) {
  SpaceSpec space = load_space_arg(c.space_arg);
  Candidate T{parse_csv(c.t_arg)};
  SearchOptions opts;
  opts.threads = c.threads;
  json arr = json::array();
  if (!stratum_arg.empty()) {
    IndexSet J;
    for (double v : parse_csv(stratum_arg)) J = J.unite(IndexSet::single(static_cast<int>(v) - 1));
    arr.push_back(to_json(level_report(space, T, J, opts)));
  } else {
    for (const LevelReport& rep : all_levels(space, T, opts)) arr.push_back(to_json(rep));
  }
  OutputWriter w;
  w.out_path = c.out;
  w.manifest = common_manifest("levels", c);
  w.manifest["config"]["stratum"] = stratum_arg;
  if (c.format == "csv") {
    std::ostringstream os;
    os << "stratum,alpha,alpha_attained,beta,beta_attained,derivative\n";
    for (const auto& j : arr)
      os << j["stratum"].get<std::string>() << "," << format_double(j["alpha"]["value"]) << ","
         << (j["alpha"]["attained"].get<bool>() ? 1 : 0) << ","
         << format_double(j["beta"]["value"]) << ","
         << (j["beta"]["attained"].get<bool>() ? 1 : 0) << ","
         << format_double(j["derivative_at_infinity"]) << "\n";
    w.write(os.str());
  } else {
    w.write(arr.dump(2) + "\n");
  }
  return kOk;
}

int run_flow(const Common& c, const std::string& start_x, const std::string& start_y,
             FlowParams params, const std::string& trajectory_path) {
  SpaceSpec space = load_space_arg(c.space_arg);
  Candidate T{parse_csv(c.t_arg)};
  if (start_x.empty() == start_y.empty())
    throw spec_error("provide exactly one of --start-x or --start-y");
  MetricPoint start = start_x.empty() ? MetricPoint::from_y(parse_csv(start_y))
                                      : MetricPoint::from_x(parse_csv(start_x));

  std::ofstream traj;
  TrajectorySink sink = nullptr;
  if (!trajectory_path.empty()) {
    traj.open(trajectory_path, std::ios::binary);
    if (!traj) throw spec_error("cannot open trajectory file " + trajectory_path);
    traj << "step,t";
    for (int i = 0; i < space.rank(); ++i) traj << ",y" << (i + 1);
    traj << ",S,grad_norm\n";
    sink = [&](long step, double t, const Vector& y, double S, double gn) {
      traj << step << "," << format_double(t);
      for (long i = 0; i < y.size(); ++i) traj << "," << format_double(y[i]);
      traj << "," << format_double(S) << "," << format_double(gn) << "\n";
    };
  }
  FlowResult fr = flow(space, T, start, params, sink);
  OutputWriter w;
  w.out_path = c.out;
  w.manifest = common_manifest("flow", c);
  w.manifest["config"]["start_x"] = start_x;
  w.manifest["config"]["start_y"] = start_y;
  w.manifest["config"]["trajectory"] = trajectory_path;
  w.write(to_json(fr).dump(2) + "\n");
  if (fr.stalled()) return kNoResult;
  if (fr.diverged() &&
      std::get<Diverged>(fr.outcome).kind == DivergenceKind::InfinityAnomaly)
    return kAnomaly;
  return kOk;
}

int run_saddle(const Common& c, const std::string& stratum_arg, RelaxOptions relax_opts,
               const std::string& telemetry_path) {
  SpaceSpec space = load_space_arg(c.space_arg);
  Candidate T{parse_csv(c.t_arg)};
  relax_opts.threads = c.threads;
  PathOptions popts;
  popts.search.threads = c.threads;

  PathState path;
  if (generalized_wallach_shape(space) && stratum_arg.empty()) {
    path = build_path_wallach(space, T, popts);
  } else {
    IndexSet k_low;
    if (!stratum_arg.empty()) {
      for (double v : parse_csv(stratum_arg))
        k_low = k_low.unite(IndexSet::single(static_cast<int>(v) - 1));
    } else {
      double best = std::numeric_limits<double>::infinity();
      for (const Stratum& st : enumerate_strata(space)) {
        if (st.kind != StratumKind::Subalgebra) continue;
        double a = alpha(space, T, st.members, popts.search).value;
        if (a < best) {
          best = a;
          k_low = st.members;
        }
      }
      if (k_low.empty()) throw spec_error("no subalgebra stratum to anchor at");
    }
    path = build_path_flag(space, T, k_low, popts);
  }

  std::ofstream tel;
  RelaxSink sink = nullptr;
  if (!telemetry_path.empty()) {
    tel.open(telemetry_path, std::ios::binary);
    if (!tel) throw spec_error("cannot open telemetry file " + telemetry_path);
    tel << "round,inf_S,argmin_node,c_estimate\n";
    sink = [&](int round, double inf_S, int argmin, double cest) {
      tel << round << "," << format_double(inf_S) << "," << argmin << ","
          << format_double(cest) << "\n";
    };
  }
  path = relax(space, T, std::move(path), relax_opts, sink);
  auto saddle = extract_saddle(space, T, path);

  OutputWriter w;
  w.out_path = c.out;
  w.manifest = common_manifest("saddle", c);
  w.manifest["config"]["stratum"] = stratum_arg;
  w.manifest["config"]["telemetry"] = telemetry_path;
  json out;
  out["c_estimate"] = path.c_estimate;
  out["bracket"] = json::array({path.bracket.first, path.bracket.second});
  out["warnings"] = path.warnings;
  if (saddle) out["saddle"] = to_json(*saddle);
  w.write(out.dump(2) + "\n");
  return saddle ? kOk : kNoResult;
}

int run_classify(const Common& c) {
  SpaceSpec space = load_space_arg(c.space_arg);
  Candidate T{parse_csv(c.t_arg)};
  SearchOptions opts;
  opts.threads = c.threads;
  RegionLabel lab = region_label(space, T, opts);
  OutputWriter w;
  w.out_path = c.out;
  w.manifest = common_manifest("classify", c);
  w.write(to_json(lab).dump(2) + "\n");
  return kOk;
}

int run_sweep(const Common& c, const std::string& mode, const std::string& axes,
              const std::string& range_i, const std::string& range_j, const std::string& grid,
              const std::string& fixed) {
  SpaceSpec space = load_space_arg(c.space_arg);
  SweepSpec spec;
  spec.mode = mode == "wallach-xy" ? SweepSpec::Mode::WallachXY : SweepSpec::Mode::TComponents;
  auto parse_range = [](const std::string& s, double& lo, double& hi) {
    auto pos = s.find(':');
    if (pos == std::string::npos) throw spec_error("range must be lo:hi");
    lo = std::stod(s.substr(0, pos));
    hi = std::stod(s.substr(pos + 1));
  };
  parse_range(range_i, spec.lo_i, spec.hi_i);
  parse_range(range_j, spec.lo_j, spec.hi_j);
  {
    auto pos = grid.find('x');
    if (pos == std::string::npos) throw spec_error("grid must be NxM");
    spec.res_i = std::stoi(grid.substr(0, pos));
    spec.res_j = std::stoi(grid.substr(pos + 1));
  }
  if (spec.mode == SweepSpec::Mode::TComponents) {
    Vector ax = parse_csv(axes);
    if (ax.size() != 2) throw spec_error("--axes must name two components");
    spec.axis_i = static_cast<int>(ax[0]) - 1;
    spec.axis_j = static_cast<int>(ax[1]) - 1;
    if (fixed.empty()) throw spec_error("--fixed template required for component sweeps");
    spec.fixed = parse_csv(fixed);
  }
  SearchOptions opts;
  opts.threads = c.threads;
  auto records = sweep_plane(space, spec, c.threads, opts);
  std::ostringstream os;
  write_sweep_csv(os, space, records);
  OutputWriter w;
  w.out_path = c.out;
  w.manifest = common_manifest("sweep", c);
  w.manifest["config"]["mode"] = mode;
  w.manifest["config"]["axes"] = axes;
  w.manifest["config"]["range_i"] = range_i;
  w.manifest["config"]["range_j"] = range_j;
  w.manifest["config"]["grid"] = grid;
  w.manifest["config"]["fixed"] = fixed;
  w.write(os.str());
  return kOk;
}

int run_image(const Common& c, int n, double lo, double hi, bool uniform,
              const std::string& svg_path) {
  SpaceSpec space = load_space_arg(c.space_arg);
  auto points = ricci_image_sample(space, n, lo, hi, c.seed, !uniform, c.threads);
  if (!svg_path.empty()) {
    std::ofstream svg(svg_path, std::ios::binary);
    if (!svg) throw spec_error("cannot open svg file " + svg_path);
    write_image_svg(svg, points);
  }
  std::ostringstream os;
  write_image_csv(os, space, points);
  OutputWriter w;
  w.out_path = c.out;
  w.manifest = common_manifest("image", c);
  w.manifest["config"]["n"] = n;
  w.manifest["config"]["lo"] = lo;
  w.manifest["config"]["hi"] = hi;
  w.manifest["config"]["uniform"] = uniform;
  w.manifest["config"]["svg"] = svg_path;
  w.write(os.str());
  return kOk;
}

int run_locus(const Common& c, const std::string& mode, int branch, const std::string& range,
              int count, const std::string& seed_x, double step, int max_steps) {
  SpaceSpec space = load_space_arg(c.space_arg);
  LocusSpec spec;
  spec.mode = mode == "continue" ? LocusSpec::Mode::Continuation : LocusSpec::Mode::ClosedForm;
  spec.branch = branch;
  if (!range.empty()) {
    auto pos = range.find(':');
    if (pos == std::string::npos) throw spec_error("range must be lo:hi");
    spec.param_lo = std::stod(range.substr(0, pos));
    spec.param_hi = std::stod(range.substr(pos + 1));
  }
  spec.count = count;
  if (!seed_x.empty()) spec.seed_x = parse_csv(seed_x);
  spec.step = step;
  spec.max_steps = max_steps;
  auto points = degenerate_locus(space, spec);
  std::ostringstream os;
  write_locus_csv(os, space, points);
  OutputWriter w;
  w.out_path = c.out;
  w.manifest = common_manifest("locus", c);
  w.manifest["config"]["mode"] = mode;
  w.manifest["config"]["branch"] = branch;
  w.manifest["config"]["range"] = range;
  w.manifest["config"]["count"] = count;
  w.manifest["config"]["seed_x"] = seed_x;
  w.manifest["config"]["step"] = step;
  w.manifest["config"]["max_steps"] = max_steps;
  w.write(os.str());
  return points.empty() ? kNoResult : kOk;
}

std::string get_str(const json& cfg, const char* key) {
  return cfg.contains(key) ? cfg.at(key).get<std::string>() : std::string();
}

int run_from_manifest(const std::string& manifest_path, const std::string& out_override) {
  std::ifstream in(manifest_path);
  if (!in) throw spec_error("cannot open manifest " + manifest_path);
  json m = json::parse(in);
  const json& cfg = m.at("config");
  Common c;
  c.space_arg = get_str(cfg, "space");
  c.t_arg = get_str(cfg, "T");
  c.seed = cfg.value("seed", 0ull);
  c.out = out_override.empty() ? get_str(cfg, "out") : out_override;
  c.format = cfg.value("format", "json");
  c.threads = cfg.value("threads", 0);
  std::string command = m.at("command").get<std::string>();
  if (command == "curvature") return run_curvature(c, get_str(cfg, "x"), get_str(cfg, "y"));
  if (command == "levels") return run_levels(c, get_str(cfg, "stratum"));
  if (command == "flow")
    return run_flow(c, get_str(cfg, "start_x"), get_str(cfg, "start_y"), FlowParams{},
                    get_str(cfg, "trajectory"));
  if (command == "saddle")
    return run_saddle(c, get_str(cfg, "stratum"), RelaxOptions{}, get_str(cfg, "telemetry"));
  if (command == "classify") return run_classify(c);
  if (command == "sweep")
    return run_sweep(c, get_str(cfg, "mode"), get_str(cfg, "axes"), get_str(cfg, "range_i"),
                     get_str(cfg, "range_j"), get_str(cfg, "grid"), get_str(cfg, "fixed"));
  if (command == "image")
    return run_image(c, cfg.value("n", 1000), cfg.value("lo", 0.1), cfg.value("hi", 10.0),
                     cfg.value("uniform", false), get_str(cfg, "svg"));
  if (command == "locus")
    return run_locus(c, get_str(cfg, "mode"), cfg.value("branch", 0), get_str(cfg, "range"),
                     cfg.value("count", 50), get_str(cfg, "seed_x"), cfg.value("step", 1e-2),
                     cfg.value("max_steps", 400));
  throw spec_error("unknown command in manifest: " + command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for the prescribed Ricci curvature problem"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI config file; flags take precedence");

  Common c_curv, c_levels, c_flow, c_saddle, c_classify, c_sweep, c_image, c_locus;

  auto* curvature = app.add_subcommand("curvature", "S, Ricci and gradient data at a point");
  std::string x_arg, y_arg;
  add_common(curvature, c_curv, false);
  curvature->add_option("--x", x_arg, "metric eigenvalues, comma separated");
  curvature->add_option("--y", y_arg, "reciprocal coordinates, comma separated");

  auto* levels = app.add_subcommand("levels", "critical levels at infinity (alpha/beta)");
  std::string levels_stratum;
  add_common(levels, c_levels);
  levels->add_option("--stratum", levels_stratum, "1-based stratum members (default: all)");

  auto* flowc = app.add_subcommand("flow", "constrained gradient flow from a start point");
  std::string start_x, start_y, trajectory;
  FlowParams fparams;
  add_common(flowc, c_flow);
  flowc->add_option("--start-x", start_x, "start point, eigenvalue chart");
  flowc->add_option("--start-y", start_y, "start point, reciprocal chart");
  flowc->add_option("--trajectory", trajectory, "CSV trajectory output path");
  flowc->add_option("--grad-tol", fparams.grad_tol, "convergence tolerance")->capture_default_str();
  flowc->add_option("--max-steps", fparams.max_steps, "step budget")->capture_default_str();
  flowc->add_option("--boundary-eps", fparams.boundary_eps, "divergence threshold on y")
      ->capture_default_str();
  bool no_polish = false;
  flowc->add_flag("--no-polish", no_polish, "skip the Newton refinement of converged points");

  auto* saddle = app.add_subcommand("saddle", "mountain-pass saddle search");
  std::string saddle_stratum, telemetry;
  RelaxOptions relax_opts;
  add_common(saddle, c_saddle);
  saddle->add_option("--stratum", saddle_stratum, "anchor stratum (1-based; default: auto)");
  saddle->add_option("--telemetry", telemetry, "CSV relaxation telemetry path");
  saddle->add_option("--rounds", relax_opts.max_rounds, "relaxation round budget")
      ->capture_default_str();
  saddle->add_option("--flow-time", relax_opts.flow_time, "flow time per node per round")
      ->capture_default_str();

  auto* classifyc = app.add_subcommand("classify", "region label for a candidate");
  add_common(classifyc, c_classify);

  auto* sweep = app.add_subcommand("sweep", "region sweep over a candidate plane");
  std::string sweep_mode = "components", sweep_axes = "1,2", sweep_range_i = "0:1",
              sweep_range_j = "0:1", sweep_grid = "100x100", sweep_fixed;
  add_common(sweep, c_sweep, false);
  sweep->add_option("--mode", sweep_mode, "components|wallach-xy")
      ->check(CLI::IsMember({"components", "wallach-xy"}));
  sweep->add_option("--axes", sweep_axes, "two 1-based component indices");
  sweep->add_option("--range-i", sweep_range_i, "first axis range lo:hi");
  sweep->add_option("--range-j", sweep_range_j, "second axis range lo:hi");
  sweep->add_option("--grid", sweep_grid, "resolution NxM");
  sweep->add_option("--fixed", sweep_fixed, "full-length fixed component template");

  auto* image = app.add_subcommand("image", "sample the image of the Ricci map");
  int image_n = 100000;
  double image_lo = 0.1, image_hi = 10.0;
  bool image_uniform = false;
  std::string image_svg;
  add_common(image, c_image, false);
  image->add_option("--n", image_n, "sample count")->capture_default_str();
  image->add_option("--lo", image_lo, "lower sampling bound")->capture_default_str();
  image->add_option("--hi", image_hi, "upper sampling bound")->capture_default_str();
  image->add_flag("--uniform", image_uniform, "uniform instead of log-uniform sampling");
  image->add_option("--svg", image_svg, "also write a flat SVG scatter of the projection");

  auto* locus = app.add_subcommand("locus", "degenerate locus of the Ricci map");
  std::string locus_mode = "closed", locus_range, locus_seed_x;
  int locus_branch = 0, locus_count = 50, locus_max_steps = 400;
  double locus_step = 1e-2;
  add_common(locus, c_locus, false);
  locus->add_option("--mode", locus_mode, "closed|continue")
      ->check(CLI::IsMember({"closed", "continue"}));
  locus->add_option("--branch", locus_branch, "closed-form branch index")->capture_default_str();
  locus->add_option("--range", locus_range, "closed-form parameter range lo:hi");
  locus->add_option("--count", locus_count, "closed-form sample count")->capture_default_str();
  locus->add_option("--seed-x", locus_seed_x, "continuation seed point (x chart)");
  locus->add_option("--step", locus_step, "continuation step")->capture_default_str();
  locus->add_option("--max-steps", locus_max_steps, "continuation step budget")
      ->capture_default_str();

  auto* rerun = app.add_subcommand("rerun", "replay a run from its manifest");
  std::string manifest_path, rerun_out;
  rerun->add_option("manifest", manifest_path, "manifest JSON path")->required();
  rerun->add_option("--out", rerun_out, "override the output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (curvature->parsed()) return run_curvature(c_curv, x_arg, y_arg);
    if (levels->parsed()) return run_levels(c_levels, levels_stratum);
    if (flowc->parsed()) {
      fparams.newton_polish = !no_polish;
      return run_flow(c_flow, start_x, start_y, fparams, trajectory);
    }
    if (saddle->parsed()) return run_saddle(c_saddle, saddle_stratum, relax_opts, telemetry);
    if (classifyc->parsed()) return run_classify(c_classify);
    if (sweep->parsed())
      return run_sweep(c_sweep, sweep_mode, sweep_axes, sweep_range_i, sweep_range_j, sweep_grid,
                       sweep_fixed);
    if (image->parsed())
      return run_image(c_image, image_n, image_lo, image_hi, image_uniform, image_svg);
    if (locus->parsed())
      return run_locus(c_locus, locus_mode, locus_branch, locus_range, locus_count, locus_seed_x,
                       locus_step, locus_max_steps);
    if (rerun->parsed()) return run_from_manifest(manifest_path, rerun_out);
  } catch (const hypothesis_error& e) {
    std::cerr << "no result: " << e.what() << "\n";
    return kNoResult;
  } catch (const spec_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kValidation;
}
