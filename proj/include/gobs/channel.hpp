#pragma once

#include <cstdint>
#include <vector>

#include "gobs/lie_core.hpp"

namespace gobs {

// How the true state is corrupted before the observer sees it.
enum class StateNoiseKind { None, LeftMultiplicative, RightMultiplicative };
// How the true velocity is corrupted.
enum class InputNoiseKind { None, Additive };

// What the observer receives at a step: Y = N_l X (or X N_r) and w = u + delta.
// Noise values are held constant over each grid interval (piecewise-constant
// disturbances), indexed by step so replays are exact on any grid.
struct MeasurementChannel {
  StateNoiseKind state_kind = StateNoiseKind::None;
  InputNoiseKind input_kind = InputNoiseKind::None;
  std::vector<Vector> state_coords;   // algebra coords of N per interval
  std::vector<GroupElement> state_elems;  // exp of the above, cached
  std::vector<Vector> input_coords;   // delta per interval
};

struct Measurement {
  GroupElement y;
  Vector w;
};

// Noise-free channel: y = x, w = u.
MeasurementChannel exact_channel();

// Sampled channel: each interval draws a clipped-normal algebra vector per
// active noise source, so |log N| <= state_amplitude and |delta| <=
// input_amplitude always. Seeds fully determine the traces.
MeasurementChannel sampled_channel(GroupId g, StateNoiseKind state_kind,
                                   double state_amplitude,
                                   std::uint64_t state_seed,
                                   InputNoiseKind input_kind,
                                   double input_amplitude,
                                   std::uint64_t input_seed,
                                   std::size_t n_intervals);

// Channel with caller-supplied per-interval traces (used for replay).
MeasurementChannel trace_channel(GroupId g, StateNoiseKind state_kind,
                                 std::vector<Vector> state_coords,
                                 InputNoiseKind input_kind,
                                 std::vector<Vector> input_coords);

bool channel_is_exact(const MeasurementChannel& ch);

// Measurement for interval `step_index`. Throws UsageError when a required
// trace does not cover the index.
Measurement measure(const MeasurementChannel& ch, std::size_t step_index,
                    const GroupElement& x, const Vector& u);

// Algebra coords of the state noise / input noise on the given interval
// (zero vectors when that source is off). Used by the noisy-error diagnostic.
Vector state_noise_coords(const MeasurementChannel& ch, std::size_t step_index,
                          GroupId g);
Vector input_noise_coords(const MeasurementChannel& ch, std::size_t step_index,
                          GroupId g);

}  // namespace gobs
