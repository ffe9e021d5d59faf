#pragma once

#include <functional>
#include <vector>

#include "gobs/channel.hpp"
#include "gobs/observers.hpp"
#include "gobs/systems.hpp"

namespace gobs {

enum class Scheme { LieEuler, RKMK4 };

const char* scheme_name(Scheme s);

struct IntegratorConfig {
  Scheme scheme = Scheme::RKMK4;
  double step = 1e-3;
  // Pull the state back onto the group after each step when its membership
  // residual exceeds the snap tolerance. Off by default: the group-aware
  // steppers hold the residual near machine precision on their own.
  bool reproject = false;
};

// Time-dependent tangent field z -> T_z G. Both steppers accept either frame.
using FlowField =
    std::function<TangentVector(const GroupElement&, double t)>;

// One step from (x, t) to t + h.
// LieEuler: x exp(h u) for a Body-frame field value, exp(h u) x for Spatial.
// RKMK4: classical RK4 in the spatial exponential chart x_next = exp(s) x,
// with dexp^-1 truncated to id - ad/2 + ad^2/12 (enough for order 4).
GroupElement step(Scheme scheme, const FlowField& field, const GroupElement& x,
                  double t, double h);

struct Trajectory {
  std::vector<double> times;
  std::vector<GroupElement> states;
  // Optional co-recorded signals; empty when not applicable.
  std::vector<Vector> inputs;
  std::vector<double> costs;
};

// Uniform grid from t0 to t1 with step h (last step shortened to land on t1
// exactly), with the given interior jump times spliced in so that no step
// straddles a discontinuity.
std::vector<double> build_grid(double t0, double t1, double h,
                               const std::vector<double>& jumps = {});

// Integrate a standalone field over [t0, t0 + horizon].
Trajectory integrate_flow(const IntegratorConfig& cfg, const FlowField& field,
                          const GroupElement& x0, double t0, double horizon,
                          const std::vector<double>& jumps = {});

struct SimResult {
  Trajectory truth;     // inputs = u(t_k) in the handedness frame
  Trajectory estimate;  // inputs = received w_k; costs = f(E, I) when a cost exists
};

// Truth and estimate stepped in lockstep on the shared grid: every RKMK4
// stage of the estimate is fed the measurement of the matching truth stage,
// so the coupled pair is one RK integration of the product system. Noise is
// held constant per step (interval k uses trace entry k). Piecewise-constant
// inputs are evaluated at the interval start so a step never samples across
// its own jump; build_grid aligns the jumps with step boundaries.
// Throws DivergenceError on non-finite field values or when the recorded
// cost exceeds 1e6.
SimResult simulate_coupled(const InvariantSystem& sys, const Observer& obs,
                           const MeasurementChannel& ch, const GroupElement& x0,
                           const GroupElement& xhat0,
                           const IntegratorConfig& cfg, double t0,
                           double horizon);

// Side of the canonical error a gradient observer of this handedness drives
// autonomously: Right for Left observers, Left for Right observers.
ErrorSide primary_error_side(Handedness h);

}  // namespace gobs
