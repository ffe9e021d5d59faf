#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gobs/sim.hpp"

using namespace gobs;

namespace {

std::string passive_json(double horizon, const char* extra_channel = "{}") {
  std::ostringstream os;
  os << R"({
    "version": 1,
    "group": "SO3",
    "system": {"handedness": "left",
               "input": {"kind": "constant", "value": [0.3, -0.1, 0.4]}},
    "observer": {"kind": "gradient",
                 "cost": {"name": "so3_frobenius", "gain": 1.0},
                 "metric": "canonical"},
    "initial": {"state": {"algebra": [0, 0, 0]},
                "estimate": {"algebra": [1.2, 0.4, -0.6]}},
    "channel": )"
     << extra_channel << R"(,
    "integrator": {"scheme": "rkmk4", "step": 0.002},
    "horizon": )"
     << horizon << "}";
  return os.str();
}

std::filesystem::path fresh_dir(const char* tag) {
  const auto dir = std::filesystem::temp_directory_path() /
                   (std::string("gobs_test_") + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("rate fit on exact exponentials") {
  std::vector<double> ts, fs;
  for (int i = 0; i <= 1000; ++i) {
    const double t = 0.01 * i;
    ts.push_back(t);
    fs.push_back(std::exp(-2.0 * t));
  }
  const RateReport rep = fit_exponential_rate(ts, fs, 0.5);
  CHECK(std::abs(rep.rate - 2.0) <= 1e-6);
  CHECK(rep.r_squared > 0.999999);
  CHECK(rep.window_start == doctest::Approx(5.0));
  CHECK(rep.window_end == 10.0);

  // Constant trace: rate 0, perfect fit by convention.
  std::vector<double> ones(ts.size(), 0.75);
  const RateReport flat = fit_exponential_rate(ts, ones, 0.5);
  CHECK(flat.rate == 0.0);
  CHECK(flat.r_squared == 1.0);
  CHECK(flat.final_value == doctest::Approx(0.75));
}

TEST_CASE("rate fit window handling") {
  std::vector<double> ts, fs;
  for (int i = 0; i <= 100; ++i) {
    ts.push_back(0.1 * i);
    // Hits the floor (exact zero) from i = 60 on.
    fs.push_back(i < 60 ? std::exp(-1.5 * 0.1 * i) : 0.0);
  }
  // Tail [5,10] has only zeros available until the window is cut at i=60;
  // the fit must use [5, 6) and still see 10 points.
  const RateReport rep = fit_exponential_rate(ts, fs, 0.5);
  CHECK(rep.points == 10);
  CHECK(std::abs(rep.rate - 1.5) <= 1e-9);

  // Too few positive points -> UsageError.
  std::vector<double> fs2(ts.size(), 0.0);
  for (int i = 0; i < 55; ++i) fs2[i] = 1.0;
  CHECK_THROWS_AS((void)fit_exponential_rate(ts, fs2, 0.5), UsageError);

  CHECK_THROWS_AS((void)fit_exponential_rate(ts, fs, 0.0), UsageError);
  CHECK_THROWS_AS((void)fit_exponential_rate(ts, fs, 1.5), UsageError);
  std::vector<double> short_t{0.0}, short_f{1.0};
  CHECK_THROWS_AS((void)fit_exponential_rate(short_t, short_f, 0.5), UsageError);
}

TEST_CASE("scenario parsing happy path") {
  const Scenario sc = parse_scenario(passive_json(5.0), "unit");
  CHECK(sc.name == "unit");
  CHECK(sc.system.group == GroupId::SO3);
  CHECK(sc.system.handedness == Handedness::Left);
  CHECK(sc.observer_kind == ObserverKind::Gradient);
  REQUIRE(sc.cost.has_value());
  CHECK(sc.cost->name == "so3_frobenius");
  REQUIRE(sc.metric.has_value());
  CHECK(sc.metric->invariance == Invariance::Bi);
  CHECK(sc.horizon == 5.0);
  CHECK(sc.integrator.step == 0.002);
  CHECK(sc.error_side == ErrorSide::Right);
}

TEST_CASE("scenario parsing rejections") {
  auto expect_invalid = [](std::string text, const char* needle) {
    try {
      (void)parse_scenario(text, "t");
      FAIL_CHECK("expected ValidationError for ", needle);
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(needle) != std::string::npos);
    }
  };

  expect_invalid("{not json", "not valid JSON");

  std::string s = passive_json(5.0);
  // Unknown top-level field.
  std::string extra = s;
  extra.insert(extra.size() - 1, R"(,"surprise": 1)");
  expect_invalid(extra, "surprise");

  // Wrong version.
  std::string v2 = s;
  v2.replace(v2.find("\"version\": 1"), 12, "\"version\": 2");
  expect_invalid(v2, "version");

  // Unknown cost name.
  std::string badcost = s;
  badcost.replace(badcost.find("so3_frobenius"), 13, "mystery_cost");
  expect_invalid(badcost, "cost");

  // Cost/group mismatch.
  std::string se3cost = s;
  se3cost.replace(se3cost.find("so3_frobenius"), 13, "se3_pose");
  expect_invalid(se3cost, "SE3");

  // Nonpositive gain.
  std::string badgain = s;
  badgain.replace(badgain.find("\"gain\": 1.0"), 11, "\"gain\": 0.0");
  expect_invalid(badgain, "gain");

  // Negative horizon.
  const std::string neg = passive_json(-3.0);
  expect_invalid(neg, "horizon");

  // Initial state off the group.
  expect_invalid(R"({
    "version": 1, "group": "SO3",
    "system": {"handedness": "left",
               "input": {"kind": "constant", "value": [0,0,0]}},
    "observer": {"kind": "synchronous"},
    "initial": {"state": {"matrix": [[2,0,0],[0,2,0],[0,0,2]]},
                "estimate": {"algebra": [0,0,0]}},
    "horizon": 1.0})",
                 "scenario.initial.state");

  // Both algebra and matrix given.
  expect_invalid(R"({
    "version": 1, "group": "SO3",
    "system": {"handedness": "left",
               "input": {"kind": "constant", "value": [0,0,0]}},
    "observer": {"kind": "synchronous"},
    "initial": {"state": {"algebra": [0,0,0],
                          "matrix": [[1,0,0],[0,1,0],[0,0,1]]},
                "estimate": {"algebra": [0,0,0]}},
    "horizon": 1.0})",
                 "exactly one");

  // Synchronous observers take no cost.
  expect_invalid(R"({
    "version": 1, "group": "SO3",
    "system": {"handedness": "left",
               "input": {"kind": "constant", "value": [0,0,0]}},
    "observer": {"kind": "synchronous",
                 "cost": {"name": "so3_frobenius"}},
    "initial": {"state": {"algebra": [0,0,0]},
                "estimate": {"algebra": [0,0,0]}},
    "horizon": 1.0})",
                 "cost");

  // Piecewise times must increase.
  expect_invalid(R"({
    "version": 1, "group": "SO3",
    "system": {"handedness": "left",
               "input": {"kind": "piecewise_constant",
                         "pieces": [{"t": 1.0, "value": [1,0,0]},
                                     {"t": 0.5, "value": [0,1,0]}]}},
    "observer": {"kind": "synchronous"},
    "initial": {"state": {"algebra": [0,0,0]},
                "estimate": {"algebra": [0,0,0]}},
    "horizon": 2.0})",
                 "pieces");
}

TEST_CASE("run_scenario writes csv and diagnostics") {
  const auto dir = fresh_dir("run");
  const Scenario sc = parse_scenario(passive_json(2.0), "mini");
  const RunArtifacts art = run_scenario(sc, dir.string());
  CHECK(std::filesystem::exists(art.csv_path));
  CHECK(std::filesystem::exists(art.diagnostics_path));
  CHECK(art.noise_path.empty());

  // Header + one row per grid point; 17-significant-digit numbers re-read
  // to the same values.
  const auto [ts, fs] = read_cost_trace(art.csv_path);
  REQUIRE(ts.size() == 1001);
  CHECK(ts.front() == 0.0);
  CHECK(ts.back() == 2.0);
  CHECK(fs.front() > fs.back());
  for (std::size_t i = 1; i < fs.size(); ++i) CHECK(fs[i] <= fs[i - 1] + 1e-12);
}

TEST_CASE("horizon zero gives a single-row csv") {
  const auto dir = fresh_dir("h0");
  const Scenario sc = parse_scenario(passive_json(0.0), "single");
  const RunArtifacts art = run_scenario(sc, dir.string());
  std::ifstream in(art.csv_path);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);  // header + t = 0
}

TEST_CASE("identical scenarios give byte-identical outputs") {
  const auto d1 = fresh_dir("det1");
  const auto d2 = fresh_dir("det2");
  const char* noisy = R"({
    "state_noise": {"kind": "left_multiplicative", "amplitude": 0.01, "seed": 5},
    "input_noise": {"kind": "additive", "amplitude": 0.02, "seed": 6}})";
  const Scenario sc = parse_scenario(passive_json(1.0, noisy), "det");
  const RunArtifacts a1 = run_scenario(sc, d1.string());
  const RunArtifacts a2 = run_scenario(sc, d2.string());
  CHECK(slurp(a1.csv_path) == slurp(a2.csv_path));
  CHECK(slurp(a1.noise_path) == slurp(a2.noise_path));
  CHECK(slurp(a1.diagnostics_path) == slurp(a2.diagnostics_path));
}

TEST_CASE("run_scenario_file exit codes") {
  const auto dir = fresh_dir("codes");
  std::string err;

  // Missing file.
  CHECK(run_scenario_file((dir / "nope.json").string(), dir.string(), err) == 2);

  // Unknown cost name.
  const auto bad = dir / "bad.json";
  {
    std::ofstream out(bad);
    std::string s = passive_json(1.0);
    s.replace(s.find("so3_frobenius"), 13, "mystery_cost");
    out << s;
  }
  CHECK(run_scenario_file(bad.string(), dir.string(), err) == 2);
  CHECK(err.find("invalid scenario") != std::string::npos);

  // Healthy file.
  const auto good = dir / "good.json";
  {
    std::ofstream out(good);
    out << passive_json(1.0);
  }
  RunArtifacts art;
  CHECK(run_scenario_file(good.string(), dir.string(), err, &art) == 0);
  // Name defaults to the file stem.
  CHECK(art.csv_path.find("good.csv") != std::string::npos);
}

TEST_CASE("make_channel consistency checks") {
  const char* short_trace = R"({
    "state_noise": {"kind": "left_multiplicative",
                     "trace": [[0.01, 0, 0], [0, 0.01, 0]]}})";
  const Scenario sc = parse_scenario(passive_json(1.0, short_trace), "tr");
  // Grid for horizon 1 at step 0.002 needs 500 intervals; 2 won't do.
  CHECK_THROWS_AS((void)make_channel(sc, 500), ValidationError);
  CHECK_NOTHROW((void)make_channel(sc, 2));
}

TEST_CASE("read_cost_trace rejects malformed files") {
  const auto dir = fresh_dir("csv");
  const auto p = dir / "x.csv";
  {
    std::ofstream out(p);
    out << "a,b\n1,2\n";
  }
  CHECK_THROWS_AS((void)read_cost_trace(p.string()), UsageError);
  {
    std::ofstream out(p);
    out << "t,f\n1,oops\n";
  }
  CHECK_THROWS_AS((void)read_cost_trace(p.string()), UsageError);
  CHECK_THROWS_AS((void)read_cost_trace((dir / "missing.csv").string()),
                  UsageError);
}
