#include "gobs/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gobs/groups.hpp"

namespace gobs {

namespace {

constexpr double kCostGuard = 1e6;

Vector dexpinv_trunc(GroupId g, const Vector& sigma, const Vector& v) {
  const Vector b1 = bracket(g, sigma, v);
  const Vector b2 = bracket(g, sigma, b1);
  return v - 0.5 * b1 + (1.0 / 12.0) * b2;
}

void check_finite(const Vector& v, double t) {
  if (!v.allFinite()) {
    throw DivergenceError("non-finite field value at t = " + std::to_string(t));
  }
}

GroupElement maybe_reproject(const IntegratorConfig& cfg, GroupElement x) {
  if (cfg.reproject &&
      membership_residual(x.group, x.matrix) > kMembershipSnap) {
    x.matrix = project_to_group(x.group, x.matrix);
  }
  return x;
}

// Classical RK4 tableau in the spatial chart; `spatial` returns the field's
// spatial coordinates at (point, stage time).
template <typename SpatialFn>
GroupElement rkmk4_step(const GroupElement& x, double t, double h,
                        SpatialFn&& spatial) {
  const GroupId g = x.group;
  const Vector k1 = spatial(x, t);
  const Vector s2 = (0.5 * h) * k1;
  const Vector k2 = dexpinv_trunc(g, s2, spatial(compose(exp_group(g, s2), x), t + 0.5 * h));
  const Vector s3 = (0.5 * h) * k2;
  const Vector k3 = dexpinv_trunc(g, s3, spatial(compose(exp_group(g, s3), x), t + 0.5 * h));
  const Vector s4 = h * k3;
  const Vector k4 = dexpinv_trunc(g, s4, spatial(compose(exp_group(g, s4), x), t + h));
  const Vector sigma = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return compose(exp_group(g, sigma), x);
}

double piece_time(const InputSignal& in, double interval_start, double stage_time) {
  return in.kind == InputSignal::Kind::PiecewiseConstant ? interval_start
                                                         : stage_time;
}

}  // namespace

const char* scheme_name(Scheme s) {
  return s == Scheme::LieEuler ? "lie_euler" : "rkmk4";
}

GroupElement step(Scheme scheme, const FlowField& field, const GroupElement& x,
                  double t, double h) {
  if (!(h > 0.0)) throw UsageError("step: h must be positive");
  if (scheme == Scheme::LieEuler) {
    const TangentVector v = field(x, t);
    check_finite(v.coords, t);
    const GroupElement inc = exp_group(x.group, h * v.coords);
    return v.frame == Frame::Body ? compose(x, inc) : compose(inc, x);
  }
  auto spatial = [&field](const GroupElement& z, double tau) {
    const TangentVector v = field(z, tau);
    check_finite(v.coords, tau);
    return to_frame(v, Frame::Spatial).coords;
  };
  return rkmk4_step(x, t, h, spatial);
}

std::vector<double> build_grid(double t0, double t1, double h,
                               const std::vector<double>& jumps) {
  if (!(h > 0.0)) throw UsageError("build_grid: step must be positive");
  if (t1 < t0) throw UsageError("build_grid: t1 < t0");
  std::vector<double> grid{t0};
  const double span = t1 - t0;
  if (span <= 0.0) return grid;
  const auto n = static_cast<long>(std::ceil(span / h - 1e-9));
  for (long k = 1; k < std::max(n, 1L); ++k) {
    grid.push_back(t0 + static_cast<double>(k) * h);
  }
  grid.push_back(t1);
  // Splice jump times in; a jump that lands within h*1e-9 of an existing
  // point replaces it so the discontinuity sits exactly on the grid.
  const double tol = 1e-9 * h;
  for (double b : jumps) {
    if (!(b > t0 && b < t1)) continue;
    auto it = std::lower_bound(grid.begin(), grid.end(), b);
    if (it != grid.end() && std::abs(*it - b) <= tol) {
      *it = b;
    } else if (it != grid.begin() && std::abs(*std::prev(it) - b) <= tol) {
      *std::prev(it) = b;
    } else {
      grid.insert(it, b);
    }
  }
  return grid;
}

Trajectory integrate_flow(const IntegratorConfig& cfg, const FlowField& field,
                          const GroupElement& x0, double t0, double horizon,
                          const std::vector<double>& jumps) {
  if (horizon < 0.0) throw UsageError("integrate_flow: negative horizon");
  const std::vector<double> grid = build_grid(t0, t0 + horizon, cfg.step, jumps);
  Trajectory traj;
  traj.times = grid;
  traj.states.reserve(grid.size());
  traj.states.push_back(x0);
  for (size_t k = 0; k + 1 < grid.size(); ++k) {
    const double h = grid[k + 1] - grid[k];
    traj.states.push_back(maybe_reproject(
        cfg, step(cfg.scheme, field, traj.states.back(), grid[k], h)));
  }
  return traj;
}

ErrorSide primary_error_side(Handedness h) {
  return h == Handedness::Left ? ErrorSide::Right : ErrorSide::Left;
}

SimResult simulate_coupled(const InvariantSystem& sys, const Observer& obs,
                           const MeasurementChannel& ch, const GroupElement& x0,
                           const GroupElement& xhat0,
                           const IntegratorConfig& cfg, double t0,
                           double horizon) {
  if (x0.group != sys.group || xhat0.group != sys.group) {
    throw UsageError("simulate_coupled: initial states must match the system group");
  }
  if (obs.handedness != sys.handedness) {
    throw UsageError("simulate_coupled: observer is built for " +
                     std::string(handedness_name(obs.handedness)) +
                     "-invariant systems, got a " +
                     handedness_name(sys.handedness) + " one");
  }
  if (horizon < 0.0) throw UsageError("simulate_coupled: negative horizon");

  const GroupId g = sys.group;
  const ErrorSide side = primary_error_side(sys.handedness);
  const std::vector<double> grid =
      build_grid(t0, t0 + horizon, cfg.step, input_breakpoints(sys.input, t0, t0 + horizon));

  SimResult out;
  out.truth.times = grid;
  out.estimate.times = grid;
  out.truth.states.reserve(grid.size());
  out.estimate.states.reserve(grid.size());
  out.truth.inputs.reserve(grid.size());
  out.estimate.inputs.reserve(grid.size());
  const bool has_cost = obs.cost.has_value();
  if (has_cost) out.estimate.costs.reserve(grid.size());

  GroupElement x = x0;
  GroupElement xhat = xhat0;

  // The final grid point starts no interval of its own; the signals recorded
  // there are the last interval's.
  const std::size_t last_interval = grid.size() >= 2 ? grid.size() - 2 : 0;
  auto record = [&](std::size_t k, double t) {
    out.truth.states.push_back(x);
    out.estimate.states.push_back(xhat);
    const Vector u = eval_input(sys.input, t);
    out.truth.inputs.push_back(u);
    out.estimate.inputs.push_back(measure(ch, std::min(k, last_interval), x, u).w);
    if (has_cost) {
      const GroupElement e = canonical_error(side, xhat, x);
      const double f = eval_cost(*obs.cost, e, identity(g));
      out.estimate.costs.push_back(f);
      if (!(f <= kCostGuard)) {
        throw DivergenceError("cost guard tripped at t = " + std::to_string(t) +
                              " (f = " + std::to_string(f) + ")");
      }
    }
  };

  record(0, grid[0]);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double t = grid[k];
    const double h = grid[k + 1] - t;

    // Field of the truth in its native frame at a stage point.
    auto truth_native = [&](const GroupElement& z, double tau) {
      const TangentVector v =
          vector_field(sys, z, piece_time(sys.input, t, tau));
      check_finite(v.coords, tau);
      return v;
    };
    // Observer field fed by the measurement of the matching truth stage.
    auto estimate_native = [&](const GroupElement& zhat, const GroupElement& z,
                               double tau) {
      const Vector u = eval_input(sys.input, piece_time(sys.input, t, tau));
      const Measurement m = measure(ch, k, z, u);
      const TangentVector v = observer_field(obs, zhat, m.y, m.w, tau);
      check_finite(v.coords, tau);
      return v;
    };

    if (cfg.scheme == Scheme::LieEuler) {
      const TangentVector vx = truth_native(x, t);
      const TangentVector vh = estimate_native(xhat, x, t);
      const GroupElement incx = exp_group(g, h * vx.coords);
      const GroupElement inch = exp_group(g, h * vh.coords);
      const GroupElement xn = vx.frame == Frame::Body ? compose(x, incx)
                                                      : compose(incx, x);
      xhat = vh.frame == Frame::Body ? compose(xhat, inch) : compose(inch, xhat);
      x = xn;
    } else {
      // One RK4 pass over the product state (x, xhat) in the spatial charts.
      auto sx = [&](const GroupElement& z, double tau) {
        return to_frame(truth_native(z, tau), Frame::Spatial).coords;
      };
      auto sh = [&](const GroupElement& zhat, const GroupElement& z, double tau) {
        return to_frame(estimate_native(zhat, z, tau), Frame::Spatial).coords;
      };
      const Vector k1x = sx(x, t);
      const Vector k1h = sh(xhat, x, t);
      const Vector s2x = (0.5 * h) * k1x;
      const Vector s2h = (0.5 * h) * k1h;
      const GroupElement x2 = compose(exp_group(g, s2x), x);
      const GroupElement xh2 = compose(exp_group(g, s2h), xhat);
      const Vector k2x = dexpinv_trunc(g, s2x, sx(x2, t + 0.5 * h));
      const Vector k2h = dexpinv_trunc(g, s2h, sh(xh2, x2, t + 0.5 * h));
      const Vector s3x = (0.5 * h) * k2x;
      const Vector s3h = (0.5 * h) * k2h;
      const GroupElement x3 = compose(exp_group(g, s3x), x);
      const GroupElement xh3 = compose(exp_group(g, s3h), xhat);
      const Vector k3x = dexpinv_trunc(g, s3x, sx(x3, t + 0.5 * h));
      const Vector k3h = dexpinv_trunc(g, s3h, sh(xh3, x3, t + 0.5 * h));
      const Vector s4x = h * k3x;
      const Vector s4h = h * k3h;
      const GroupElement x4 = compose(exp_group(g, s4x), x);
      const GroupElement xh4 = compose(exp_group(g, s4h), xhat);
      const Vector k4x = dexpinv_trunc(g, s4x, sx(x4, t + h));
      const Vector k4h = dexpinv_trunc(g, s4h, sh(xh4, x4, t + h));
      x = compose(
          exp_group(g, (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)), x);
      xhat = compose(
          exp_group(g, (h / 6.0) * (k1h + 2.0 * k2h + 2.0 * k3h + k4h)), xhat);
    }
    x = maybe_reproject(cfg, x);
    xhat = maybe_reproject(cfg, xhat);
    record(k + 1, grid[k + 1]);
  }
  return out;
}

}  // namespace gobs
