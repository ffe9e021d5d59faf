#pragma once

#include <utility>
#include <vector>

#include "gobs/lie_core.hpp"

namespace gobs {

// Which side the input acts on: Left means Xdot = X hat(u) (body velocity),
// Right means Xdot = hat(v) X (spatial velocity).
enum class Handedness { Left, Right };

const char* handedness_name(Handedness h);

// Time signal with algebra-coordinate values. Three shapes cover every
// scenario we ship; arbitrary callbacks stay on the API side (FlowField).
struct InputSignal {
  enum class Kind { Constant, SinusoidSum, PiecewiseConstant };

  struct Term {
    double amplitude = 0.0;
    double angular_frequency = 0.0;
    double phase = 0.0;
  };

  Kind kind = Kind::Constant;
  Vector constant;                                   // Constant
  Vector offset;                                     // SinusoidSum
  std::vector<std::vector<Term>> terms;              // SinusoidSum, per coordinate
  std::vector<std::pair<double, Vector>> pieces;     // PiecewiseConstant, (t_i, value)
};

InputSignal constant_input(const Vector& value);
InputSignal sinusoid_input(const Vector& offset,
                           std::vector<std::vector<InputSignal::Term>> terms);
// pieces must be sorted by time, strictly increasing, nonempty, equal dims.
// Value at t is the piece with the largest t_i <= t (first value before t_0).
InputSignal piecewise_input(std::vector<std::pair<double, Vector>> pieces);

int input_dim(const InputSignal& s);
Vector eval_input(const InputSignal& s, double t);

// Switch times in (t0, t1), used to align integration grids with the jumps.
std::vector<double> input_breakpoints(const InputSignal& s, double t0, double t1);

struct InvariantSystem {
  GroupId group;
  Handedness handedness;
  InputSignal input;
};

InvariantSystem make_system(GroupId g, Handedness h, InputSignal input);

// Tangent vector of the system flow at state x, time t, in the frame that
// matches the handedness (Body for Left, Spatial for Right).
TangentVector vector_field(const InvariantSystem& sys, const GroupElement& x,
                           double t);

// Coordinates of the same input in the opposite trivialization at state x.
Vector convert_input(const InvariantSystem& sys, const GroupElement& x, double t);

}  // namespace gobs
