// Integration tests driving the installed binary end to end.

#include <doctest.h>

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

namespace {

using nlohmann::json;

std::string bin() {
  const char* p = std::getenv("RICCI_LAB_BIN");
  REQUIRE_MESSAGE(p != nullptr, "RICCI_LAB_BIN must point at the ricci-lab binary");
  return p;
}

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

std::string unique_tmp(const char* suffix) {
  static std::atomic<int> counter{0};
  return "/tmp/ricci_cli_" + std::to_string(getpid()) + "_" +
         std::to_string(counter++) + suffix;
}

RunResult run(const std::string& args) {
  std::string out_file = unique_tmp(".out");
  std::string cmd = bin() + " " + args + " > " + out_file + " 2>/dev/null";
  int rc = std::system(cmd.c_str());
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  std::remove(out_file.c_str());
  return {WEXITSTATUS(rc), ss.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tmp_path(const char* suffix) { return unique_tmp(suffix); }

}  // namespace

TEST_CASE("curvature command prints S and Ricci, rejects bad points") {
  RunResult r = run("curvature --space wallach_su3 --x 1,1,2");
  CHECK(r.exit_code == 0);
  json j = json::parse(r.stdout_text);
  CHECK(j["S"].get<double>() == doctest::Approx(2.0));
  CHECK(j["ricci"][0].get<double>() == doctest::Approx(1.0 / 3));
  CHECK(j["ricci"][2].get<double>() == doctest::Approx(2.0 / 3));

  CHECK(run("curvature --space g2_u2 --x 1,1,1").stdout_text.find("3.75") != std::string::npos);
  CHECK(run("curvature --space wallach_su3 --x 1,0,2").exit_code == 2);
  CHECK(run("curvature --space no_such --x 1,1,1").exit_code == 2);
}

TEST_CASE("levels command reproduces the closed forms") {
  RunResult r = run("levels --space g2_u2 --T 1.6,0.22,1");
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.stdout_text);
  REQUIRE(j.size() == 2);
  CHECK(j[0]["stratum"] == "{2}");
  CHECK(j[0]["alpha"]["value"].get<double>() == doctest::Approx(25.0 / 66).epsilon(1e-12));
  CHECK(j[0]["beta"]["value"].get<double>() == doctest::Approx(5.0 / 13).epsilon(1e-12));
  CHECK(j[1]["stratum"] == "{3}");
  CHECK(j[1]["alpha"]["value"].get<double>() == doctest::Approx(3.0 / 8).epsilon(1e-12));
  CHECK(j[1]["beta"]["value"].get<double>() == doctest::Approx(125.0 / 342).epsilon(1e-12));
}

TEST_CASE("flow command converges on the Einstein candidate") {
  RunResult r = run("flow --space wallach_su3 --T 1,1,1 --start-y 0.18,0.16,0.1628");
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.stdout_text);
  CHECK(j["outcome"] == "converged");
  CHECK(j["point_x"][0].get<double>() == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(j["spectrum"]["co_index"].get<int>() == 0);
}

TEST_CASE("saddle command finds the theorem-B saddle") {
  RunResult r = run("saddle --space wallach_su3 --T 0.15,0.15,0.7");
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.stdout_text);
  REQUIRE(j.contains("saddle"));
  CHECK(j["saddle"]["spectrum"]["co_index"].get<int>() == 1);
  double S = j["saddle"]["S"].get<double>();
  CHECK(S > 1.0 / 2.1);
  CHECK(S < 20.0 / 9.0);
  // hypotheses fail in the global-max regime
  CHECK(run("saddle --space wallach_su3 --T 0.33,0.33,0.34").exit_code == 3);
}

TEST_CASE("classify command emits labels") {
  RunResult r = run("classify --space g2_u2 --T 1.6,0.22,1");
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.stdout_text);
  CHECK(j["region"] == "MaxAndSaddle");
}

TEST_CASE("sweep and image emit CSV with byte-identical reruns") {
  std::string out = tmp_path(".csv");
  std::string cmd = "sweep --space g2_u2 --axes 1,2 --range-i 1.4:1.8 --range-j 0.18:0.24 "
                    "--grid 12x12 --fixed 0,0,1 --out " + out;
  REQUIRE(run(cmd).exit_code == 0);
  std::string first = slurp(out);
  CHECK(first.find("label") != std::string::npos);
  CHECK(first.find("MaxAndSaddle") != std::string::npos);
  REQUIRE(run(cmd).exit_code == 0);
  CHECK(slurp(out) == first);

  std::string img = tmp_path(".csv");
  std::string icmd = "image --space wallach_su3 --n 500 --seed 11 --out " + img;
  REQUIRE(run(icmd).exit_code == 0);
  std::string img1 = slurp(img);
  REQUIRE(run(icmd + " --threads 3").exit_code == 0);
  CHECK(slurp(img) == img1);  // thread count does not change bytes
  std::remove(out.c_str());
  std::remove((out + ".manifest.json").c_str());
  std::remove(img.c_str());
  std::remove((img + ".manifest.json").c_str());
}

TEST_CASE("manifest round trip reproduces outputs") {
  std::string out = tmp_path(".csv");
  std::string cmd = "image --space wallach_su3 --n 400 --seed 3 --out " + out;
  REQUIRE(run(cmd).exit_code == 0);
  std::string original = slurp(out);
  json manifest = json::parse(slurp(out + ".manifest.json"));
  CHECK(manifest["command"] == "image");
  CHECK(manifest.contains("wall_time_s"));
  CHECK(manifest["version"] == "0.1.0");

  std::string replay = tmp_path(".csv");
  RunResult r = run("rerun " + out + ".manifest.json --out " + replay);
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(replay) == original);
  std::remove(out.c_str());
  std::remove((out + ".manifest.json").c_str());
  std::remove(replay.c_str());
  std::remove((replay + ".manifest.json").c_str());
}

TEST_CASE("curvature prints the spectrum at near-critical feasible points") {
  RunResult r = run("curvature --space wallach_su3 --x 6,6,6 --T 1,1,1");
  REQUIRE(r.exit_code == 0);
  json j = json::parse(r.stdout_text);
  CHECK(j["trace_T"].get<double>() == doctest::Approx(1.0));
  CHECK(j["grad_norm"].get<double>() <= 1e-12);
  REQUIRE(j.contains("spectrum"));
  CHECK(j["spectrum"]["co_index"].get<int>() == 0);
}

namespace {

bool sweep_has_collection(const std::string& csv, const std::string& want) {
  std::istringstream lines(csv);
  std::string line, header;
  std::getline(lines, header);  // comment
  std::getline(lines, header);  // header
  int col_idx = -1, idx = 0;
  std::istringstream hs(header);
  std::string tok;
  while (std::getline(hs, tok, ',')) {
    if (tok == "collection") col_idx = idx;
    ++idx;
  }
  if (col_idx < 0) return false;
  while (std::getline(lines, line)) {
    std::istringstream ls(line);
    for (int k = 0; k <= col_idx && std::getline(ls, tok, ','); ++k) {
    }
    if (tok == want) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("f4 slice sweeps carry the collection labels") {
  // critical slice T3 = 3/8: collection (1) region present
  RunResult r1 = run("sweep --space f4_u3su2 --axes 1,2 --range-i 0:6 --range-j 0:3 "
                     "--grid 12x12 --fixed 0,0,0.375,1");
  REQUIRE(r1.exit_code == 0);
  CHECK(r1.stdout_text.find("SaddleByThmC") != std::string::npos);
  CHECK(sweep_has_collection(r1.stdout_text, "1"));
  // small slice T3 = 1/8: collection (2) region present
  RunResult r2 = run("sweep --space f4_u3su2 --axes 1,2 --range-i 0:6 --range-j 0:3 "
                     "--grid 12x12 --fixed 0,0,0.125,1");
  REQUIRE(r2.exit_code == 0);
  CHECK(sweep_has_collection(r2.stdout_text, "2"));
}

TEST_CASE("locus command emits certified points") {
  RunResult r = run("locus --space g2_u2 --branch 0 --range 0.5:2 --count 5");
  REQUIRE(r.exit_code == 0);
  CHECK(r.stdout_text.find("sigma_min") != std::string::npos);
  // 5 data rows + comment + header
  int lines = 0;
  for (char ch : r.stdout_text)
    if (ch == '\n') ++lines;
  CHECK(lines == 7);
}

TEST_CASE("image --svg emits a scatter") {
  std::string svg = tmp_path(".svg");
  RunResult r = run("image --space wallach_su3 --n 200 --seed 4 --svg " + svg);
  REQUIRE(r.exit_code == 0);
  std::string body = slurp(svg);
  CHECK(body.rfind("<svg", 0) == 0);
  CHECK(body.find("circle") != std::string::npos);
  std::remove(svg.c_str());
}

TEST_CASE("trajectory streaming writes the documented columns") {
  std::string traj = tmp_path(".csv");
  RunResult r = run("flow --space wallach_su3 --T 1,1,1 --start-y 0.18,0.16,0.1628 --trajectory " +
                    traj);
  REQUIRE(r.exit_code == 0);
  std::string t = slurp(traj);
  CHECK(t.rfind("step,t,y1,y2,y3,S,grad_norm", 0) == 0);
  std::remove(traj.c_str());
}
