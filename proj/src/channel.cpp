#include "gobs/channel.hpp"

#include <utility>

#include "gobs/groups.hpp"
#include "gobs/noise.hpp"

namespace gobs {

namespace {

void cache_elements(GroupId g, MeasurementChannel& ch) {
  ch.state_elems.clear();
  ch.state_elems.reserve(ch.state_coords.size());
  for (const Vector& c : ch.state_coords) {
    ch.state_elems.push_back(exp_group(g, c));
  }
}

}  // namespace

MeasurementChannel exact_channel() { return MeasurementChannel{}; }

MeasurementChannel sampled_channel(GroupId g, StateNoiseKind state_kind,
                                   double state_amplitude,
                                   std::uint64_t state_seed,
                                   InputNoiseKind input_kind,
                                   double input_amplitude,
                                   std::uint64_t input_seed,
                                   std::size_t n_intervals) {
  if (state_kind != StateNoiseKind::None && state_amplitude < 0.0) {
    throw UsageError("sampled_channel: negative state amplitude");
  }
  if (input_kind != InputNoiseKind::None && input_amplitude < 0.0) {
    throw UsageError("sampled_channel: negative input amplitude");
  }
  MeasurementChannel ch;
  ch.state_kind = state_kind;
  ch.input_kind = input_kind;
  const int n = descriptor(g).dim_algebra;
  if (state_kind != StateNoiseKind::None) {
    NormalSampler sampler(state_seed);
    ch.state_coords.reserve(n_intervals);
    for (std::size_t k = 0; k < n_intervals; ++k) {
      ch.state_coords.push_back(sampler.bounded_vector(n, state_amplitude));
    }
    cache_elements(g, ch);
  }
  if (input_kind != InputNoiseKind::None) {
    NormalSampler sampler(input_seed);
    ch.input_coords.reserve(n_intervals);
    for (std::size_t k = 0; k < n_intervals; ++k) {
      ch.input_coords.push_back(sampler.bounded_vector(n, input_amplitude));
    }
  }
  return ch;
}

MeasurementChannel trace_channel(GroupId g, StateNoiseKind state_kind,
                                 std::vector<Vector> state_coords,
                                 InputNoiseKind input_kind,
                                 std::vector<Vector> input_coords) {
  const int n = descriptor(g).dim_algebra;
  for (const Vector& c : state_coords) {
    if (c.size() != n) throw UsageError("trace_channel: bad state trace dim");
  }
  for (const Vector& c : input_coords) {
    if (c.size() != n) throw UsageError("trace_channel: bad input trace dim");
  }
  if (state_kind == StateNoiseKind::None && !state_coords.empty()) {
    throw UsageError("trace_channel: state trace given but kind is none");
  }
  if (input_kind == InputNoiseKind::None && !input_coords.empty()) {
    throw UsageError("trace_channel: input trace given but kind is none");
  }
  MeasurementChannel ch;
  ch.state_kind = state_kind;
  ch.input_kind = input_kind;
  ch.state_coords = std::move(state_coords);
  ch.input_coords = std::move(input_coords);
  cache_elements(g, ch);
  return ch;
}

bool channel_is_exact(const MeasurementChannel& ch) {
  return ch.state_kind == StateNoiseKind::None &&
         ch.input_kind == InputNoiseKind::None;
}

Measurement measure(const MeasurementChannel& ch, std::size_t step_index,
                    const GroupElement& x, const Vector& u) {
  Measurement out{x, u};
  if (ch.state_kind != StateNoiseKind::None) {
    if (step_index >= ch.state_elems.size()) {
      throw UsageError("measure: state noise trace exhausted");
    }
    const GroupElement& n = ch.state_elems[step_index];
    out.y = ch.state_kind == StateNoiseKind::LeftMultiplicative
                ? compose(n, x)
                : compose(x, n);
  }
  if (ch.input_kind != InputNoiseKind::None) {
    if (step_index >= ch.input_coords.size()) {
      throw UsageError("measure: input noise trace exhausted");
    }
    out.w = u + ch.input_coords[step_index];
  }
  return out;
}

Vector state_noise_coords(const MeasurementChannel& ch, std::size_t step_index,
                          GroupId g) {
  if (ch.state_kind == StateNoiseKind::None) {
    return Vector::Zero(descriptor(g).dim_algebra);
  }
  if (step_index >= ch.state_coords.size()) {
    throw UsageError("state_noise_coords: trace exhausted");
  }
  return ch.state_coords[step_index];
}

Vector input_noise_coords(const MeasurementChannel& ch, std::size_t step_index,
                          GroupId g) {
  if (ch.input_kind == InputNoiseKind::None) {
    return Vector::Zero(descriptor(g).dim_algebra);
  }
  if (step_index >= ch.input_coords.size()) {
    throw UsageError("input_noise_coords: trace exhausted");
  }
  return ch.input_coords[step_index];
}

}  // namespace gobs
