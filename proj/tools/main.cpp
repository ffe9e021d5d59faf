// gobs: build, simulate and check invariant observers on SO(3)/SE(3).
//
// Exit codes: 0 success, 1 failed self-checks, 2 usage/validation problems,
// 3 diverged simulation.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gobs/selfcheck.hpp"
#include "gobs/sim.hpp"

namespace {

std::string resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("GOBS_OUT_DIR"); env && *env) return env;
  return ".";
}

int cmd_run(const std::string& path, const std::string& out_dir) {
  std::string err;
  gobs::RunArtifacts art;
  const int code = gobs::run_scenario_file(path, resolve_out_dir(out_dir), err, &art);
  if (code == 0) {
    std::cout << art.csv_path << '\n' << art.diagnostics_path << '\n';
    if (!art.noise_path.empty()) std::cout << art.noise_path << '\n';
  } else {
    std::cerr << "gobs run: " << err << '\n';
  }
  return code;
}

int cmd_batch(const std::string& dir, const std::string& out_dir, unsigned jobs) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    std::cerr << "gobs batch: not a directory: " << dir << '\n';
    return 2;
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "gobs batch: no .json scenarios in " << dir << '\n';
    return 2;
  }
  const std::string resolved = resolve_out_dir(out_dir);
  {
    std::error_code ec;
    fs::create_directories(resolved, ec);  // once, before the workers race
  }
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, files.size());

  std::vector<int> codes(files.size(), 0);
  std::vector<std::string> errs(files.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
      codes[i] = gobs::run_scenario_file(files[i], resolved, errs[i]);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  int worst = 0;
  for (size_t i = 0; i < files.size(); ++i) {
    const std::string name = fs::path(files[i]).filename().string();
    if (codes[i] == 0) {
      std::cout << name << ": ok\n";
    } else {
      std::cout << name << ": FAILED (" << errs[i] << ")\n";
      worst = std::max(worst, codes[i]);
    }
  }
  return worst;
}

int cmd_check() {
  const std::vector<gobs::CheckResult> results = gobs::run_selfchecks();
  size_t passed = 0;
  for (const auto& r : results) {
    std::printf("%-34s %11.4g <= %-8.3g %s\n", r.name.c_str(), r.value, r.bound,
                r.passed ? "pass" : "FAIL");
    if (r.passed) ++passed;
  }
  std::printf("%zu/%zu checks passed\n", passed, results.size());
  return passed == results.size() ? 0 : 1;
}

int cmd_rate(const std::string& csv, double tail) {
  try {
    const auto [ts, fs] = gobs::read_cost_trace(csv);
    const gobs::RateReport rep = gobs::fit_exponential_rate(ts, fs, tail);
    nlohmann::json j;
    j["rate"] = rep.rate;
    j["r_squared"] = rep.r_squared;
    j["window"] = {rep.window_start, rep.window_end};
    j["points"] = rep.points;
    j["final_value"] = rep.final_value;
    std::cout << j.dump(1) << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "gobs rate: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient observers for invariant systems on SO(3)/SE(3)"};
  app.require_subcommand(1);

  std::string scenario_path, batch_dir, out_dir, csv_path;
  unsigned jobs = 0;
  double tail = 0.5;

  CLI::App* run = app.add_subcommand("run", "simulate one scenario file");
  run->add_option("scenario", scenario_path, "scenario .json")->required();
  run->add_option("--out-dir", out_dir,
                  "output directory (default $GOBS_OUT_DIR or .)");

  CLI::App* batch = app.add_subcommand("batch", "simulate every scenario in a directory");
  batch->add_option("dir", batch_dir, "directory of scenario .json files")->required();
  batch->add_option("--out-dir", out_dir,
                    "output directory (default $GOBS_OUT_DIR or .)");
  batch->add_option("--jobs", jobs, "worker threads (default: hardware)");

  CLI::App* check = app.add_subcommand("check", "run the invariant self-check battery");

  CLI::App* rate = app.add_subcommand("rate", "fit a decay rate to a run's cost trace");
  rate->add_option("csv", csv_path, "csv produced by run")->required();
  rate->add_option("--tail", tail, "fraction of the time span to fit on")
      ->check(CLI::Range(1e-6, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) return cmd_run(scenario_path, out_dir);
  if (*batch) return cmd_batch(batch_dir, out_dir, jobs);
  if (*check) return cmd_check();
  if (*rate) return cmd_rate(csv_path, tail);
  return 2;
}
