#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gobs/integrators.hpp"

namespace gobs {

// Least-squares fit of ln f(t) = a - rate * t over the trailing window.
struct RateReport {
  double window_start = 0.0;
  double window_end = 0.0;
  int points = 0;
  double rate = 0.0;       // decay rate, -d/dt ln f
  double r_squared = 0.0;
  double final_value = 0.0;  // last value inside the window
};

// Fits on the last tail_fraction of the time span. Non-positive values end
// the usable window (the trace has hit the floating-point floor); the fit
// runs on the longest positive prefix of the tail and needs >= 10 points.
RateReport fit_exponential_rate(std::span<const double> times,
                                std::span<const double> values,
                                double tail_fraction = 0.5);

// Typed form of a scenario file (schema version 1).
struct NoiseSpec {
  StateNoiseKind state_kind = StateNoiseKind::None;
  double state_amplitude = 0.0;
  std::uint64_t state_seed = 0;
  std::vector<Vector> state_trace;  // explicit trace wins over sampling
  InputNoiseKind input_kind = InputNoiseKind::None;
  double input_amplitude = 0.0;
  std::uint64_t input_seed = 0;
  std::vector<Vector> input_trace;
};

struct Scenario {
  std::string name;
  InvariantSystem system{GroupId::SO3, Handedness::Left, {}};
  ObserverKind observer_kind = ObserverKind::Synchronous;
  std::optional<CostFunction> cost;  // empty only for synchronous
  std::optional<Metric> metric;
  GroupElement initial_state{GroupId::SO3, {}};
  GroupElement initial_estimate{GroupId::SO3, {}};
  NoiseSpec noise;
  IntegratorConfig integrator;
  double horizon = 0.0;
  ErrorSide error_side = ErrorSide::Right;
};

// Parse + validate scenario JSON. Unknown fields and schema violations throw
// ValidationError naming the offending field.
Scenario parse_scenario(const std::string& json_text, const std::string& name_hint);
Scenario load_scenario(const std::string& path);

Observer make_observer(const Scenario& sc);
MeasurementChannel make_channel(const Scenario& sc, std::size_t n_intervals);

struct RunArtifacts {
  std::string csv_path;
  std::string diagnostics_path;
  std::string noise_path;  // empty when the channel is exact
};

// Simulate and write <out_dir>/<name>.csv, <name>.diag.json and, when noise
// is active, <name>.noise.json. Numbers are printed with 17 significant
// digits so repeated runs are byte-identical.
RunArtifacts run_scenario(const Scenario& sc, const std::string& out_dir);

// File-level wrapper with the CLI exit-code contract: 0 ok, 2 validation
// error, 3 divergence. Messages go to err.
int run_scenario_file(const std::string& path, const std::string& out_dir,
                      std::string& err, RunArtifacts* artifacts = nullptr);

// Column extraction for `rate`: reads our CSV back, returns (t, f).
std::pair<std::vector<double>, std::vector<double>> read_cost_trace(
    const std::string& csv_path);

}  // namespace gobs
