#include "gobs/selfcheck.hpp"

#include <cmath>

#include "gobs/costs.hpp"
#include "gobs/groups.hpp"
#include "gobs/integrators.hpp"
#include "gobs/noise.hpp"
#include "gobs/observers.hpp"
#include "gobs/sim.hpp"

namespace gobs {

Matrix series_exp(const Matrix& a, int terms) {
  if (a.rows() != a.cols()) throw UsageError("series_exp: square matrices only");
  if (terms < 1) throw UsageError("series_exp: need at least one term");
  Matrix sum = Matrix::Identity(a.rows(), a.cols());
  Matrix term = sum;
  for (int k = 1; k < terms; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// Deterministic sample of algebra coordinates with rotation part bounded
// away from the log cut locus.
Vector sample_coords(NormalSampler& rng, GroupId g, double rot_cap) {
  const int n = descriptor(g).dim_algebra;
  Vector v = rng.vector(n);
  const double rot = v.head(3).norm();
  if (rot > rot_cap) v.head(3) *= rot_cap / rot;
  return v;
}

void add(std::vector<CheckResult>& out, const std::string& name, double value,
         double bound) {
  out.push_back(CheckResult{name, value <= bound, value, bound});
}

double exp_log_round_trip(GroupId g) {
  NormalSampler rng(g == GroupId::SO3 ? 11u : 12u);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Vector w = sample_coords(rng, g, kPi - 1e-3);
    worst = std::max(worst, (log_group(exp_group(g, w)) - w).norm());
  }
  return worst;
}

double exp_vs_series(GroupId g) {
  NormalSampler rng(g == GroupId::SO3 ? 21u : 22u);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vector w = sample_coords(rng, g, 2.0);
    if (g == GroupId::SE3) w.tail(3) *= 0.5;
    const Matrix direct = exp_group(g, w).matrix;
    worst = std::max(worst, (direct - series_exp(hat(g, w))).norm());
  }
  return worst;
}

double group_axioms(GroupId g) {
  NormalSampler rng(g == GroupId::SO3 ? 31u : 32u);
  const Matrix id = identity(g).matrix;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const GroupElement a = exp_group(g, sample_coords(rng, g, 2.5));
    const GroupElement b = exp_group(g, sample_coords(rng, g, 2.5));
    const GroupElement c = exp_group(g, sample_coords(rng, g, 2.5));
    worst = std::max(worst, (compose(a, invert(a)).matrix - id).norm());
    worst = std::max(
        worst,
        (compose(compose(a, b), c).matrix - compose(a, compose(b, c)).matrix)
            .norm());
  }
  return worst;
}

double adjoint_consistency(GroupId g) {
  NormalSampler rng(g == GroupId::SO3 ? 41u : 42u);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const GroupElement x = exp_group(g, sample_coords(rng, g, 2.5));
    const Vector u = rng.vector(descriptor(g).dim_algebra);
    const Matrix lhs = hat(g, adjoint(x, u));
    const Matrix rhs = x.matrix * hat(g, u) * invert(x).matrix;
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

double projection_quality(GroupId g) {
  NormalSampler rng(g == GroupId::SO3 ? 51u : 52u);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const GroupElement x = exp_group(g, sample_coords(rng, g, 2.5));
    const int n = descriptor(g).matrix_size;
    Matrix noisy = x.matrix;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) noisy(r, c) += 1e-7 * rng.next();
    }
    const Matrix p = project_to_group(g, noisy);
    worst = std::max(worst, membership_residual(g, p));
    worst = std::max(worst, (project_to_group(g, p) - p).norm());
  }
  return worst;
}

double so3_metric_bi_invariance() {
  const Metric m = canonical_metric(GroupId::SO3);
  NormalSampler rng(61);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const GroupElement x = exp_group(GroupId::SO3, sample_coords(rng, GroupId::SO3, 3.0));
    const Vector u = rng.vector(3);
    const Vector v = rng.vector(3);
    worst = std::max(worst,
                     std::abs(metric_inner(m, adjoint(x, u), adjoint(x, v)) -
                              metric_inner(m, u, v)));
  }
  return worst;
}

double grad_consistency(GroupId g) {
  const CostFunction cost =
      g == GroupId::SO3 ? so3_frobenius_cost(1.3) : se3_pose_cost();
  const Metric metric = canonical_metric(g);
  NormalSampler rng(g == GroupId::SO3 ? 71u : 72u);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const GroupElement xhat = exp_group(g, sample_coords(rng, g, 2.0));
    const GroupElement y = exp_group(g, sample_coords(rng, g, 2.0));
    const TangentVector an = grad1(cost, metric, xhat, y);
    const TangentVector fd = fd_grad1(cost, metric, xhat, y);
    const double rel = (an.coords - fd.coords).norm() /
                       std::max(1.0, an.coords.norm());
    worst = std::max(worst, rel);
  }
  return worst;
}

double gradient_like_coincidence(GroupId g) {
  const CostFunction cost =
      g == GroupId::SO3 ? so3_frobenius_cost(0.8) : se3_pose_cost();
  const Metric metric = canonical_metric(g);
  const Observer grad_obs = gradient_observer(Handedness::Left, cost, metric);
  const Observer gl_obs = gradient_like_observer(Handedness::Left, cost, metric);
  NormalSampler rng(g == GroupId::SO3 ? 81u : 82u);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const GroupElement xhat = exp_group(g, sample_coords(rng, g, 1.5));
    const GroupElement y = exp_group(g, sample_coords(rng, g, 1.5));
    const Vector w = rng.vector(descriptor(g).dim_algebra);
    const Vector a = to_frame(observer_field(grad_obs, xhat, y, w, 0.0), Frame::Body).coords;
    const Vector b = to_frame(observer_field(gl_obs, xhat, y, w, 0.0), Frame::Body).coords;
    worst = std::max(worst, (a - b).norm() / std::max(1.0, a.norm()));
  }
  return worst;
}

InvariantSystem demo_system() {
  std::vector<std::vector<InputSignal::Term>> terms(3);
  terms[0].push_back({0.8, 1.0, 0.0});
  terms[1].push_back({0.5, 2.0, 0.4});
  terms[2].push_back({0.3, 3.0, 1.1});
  Vector offset(3);
  offset << 0.0, 0.1, -0.2;
  return make_system(GroupId::SO3, Handedness::Left,
                     sinusoid_input(offset, std::move(terms)));
}

double synchrony_of_internal_model() {
  const InvariantSystem sys = demo_system();
  const Observer obs = synchronous_observer(Handedness::Left);
  Vector w0(3), e0(3);
  w0 << 0.2, -0.1, 0.3;
  e0 << 0.4, 0.2, -0.5;
  IntegratorConfig cfg;
  cfg.step = 1e-2;
  const SimResult sim =
      simulate_coupled(sys, obs, exact_channel(), exp_group(GroupId::SO3, w0),
                       exp_group(GroupId::SO3, e0), cfg, 0.0, 2.0);
  return synchrony_defect(ErrorSide::Right, sim.estimate.states,
                          sim.truth.states);
}

double lie_euler_constant_exactness() {
  Vector u(3);
  u << 0.04, 0.05, -0.03;
  IntegratorConfig cfg;
  cfg.scheme = Scheme::LieEuler;
  cfg.step = 0.01;
  const GroupElement x0 = identity(GroupId::SO3);
  const FlowField field = [&u](const GroupElement& z, double) {
    return TangentVector{z, u, Frame::Body};
  };
  const Trajectory traj = integrate_flow(cfg, field, x0, 0.0, 10.0);
  const GroupElement closed = exp_group(GroupId::SO3, 10.0 * u);
  return (traj.states.back().matrix - closed.matrix).norm();
}

double rkmk4_order_deviation() {
  const InvariantSystem sys = demo_system();
  const FlowField field = [&sys](const GroupElement& z, double t) {
    return vector_field(sys, z, t);
  };
  const GroupElement x0 = identity(GroupId::SO3);
  auto endpoint = [&](double h) {
    IntegratorConfig cfg;
    cfg.step = h;
    return integrate_flow(cfg, field, x0, 0.0, 5.0).states.back();
  };
  const GroupElement a = endpoint(0.05);
  const GroupElement b = endpoint(0.025);
  const GroupElement c = endpoint(0.0125);
  const double e1 = group_distance(a, b);
  const double e2 = group_distance(b, c);
  const double order = std::log2(e1 / e2);
  return std::abs(4.0 - order);
}

double monotone_decay_violation() {
  const InvariantSystem sys = demo_system();
  const Observer obs = gradient_observer(
      Handedness::Left, so3_frobenius_cost(1.0), canonical_metric(GroupId::SO3));
  Vector w0(3), e0(3);
  w0 << 0.3, -0.2, 0.1;
  e0 << 1.2, 0.8, -0.4;
  IntegratorConfig cfg;
  cfg.step = 1e-3;
  const SimResult sim =
      simulate_coupled(sys, obs, exact_channel(), exp_group(GroupId::SO3, w0),
                       compose(exp_group(GroupId::SO3, e0),
                               exp_group(GroupId::SO3, w0)),
                       cfg, 0.0, 5.0);
  double worst = 0.0;
  for (size_t i = 1; i < sim.estimate.costs.size(); ++i) {
    worst = std::max(worst, sim.estimate.costs[i] - sim.estimate.costs[i - 1]);
  }
  return worst;
}

double noise_replay_determinism() {
  const MeasurementChannel a =
      sampled_channel(GroupId::SO3, StateNoiseKind::LeftMultiplicative, 0.02,
                      1234, InputNoiseKind::Additive, 0.05, 99, 500);
  const MeasurementChannel b =
      sampled_channel(GroupId::SO3, StateNoiseKind::LeftMultiplicative, 0.02,
                      1234, InputNoiseKind::Additive, 0.05, 99, 500);
  double worst = 0.0;
  for (size_t k = 0; k < 500; ++k) {
    worst = std::max(worst, (a.state_coords[k] - b.state_coords[k]).norm());
    worst = std::max(worst, (a.input_coords[k] - b.input_coords[k]).norm());
  }
  return worst;
}

double error_flow_autonomy() {
  const InvariantSystem sys = demo_system();
  const CostFunction cost = so3_frobenius_cost(1.5);
  const Metric metric = canonical_metric(GroupId::SO3);
  const Observer obs = gradient_observer(Handedness::Left, cost, metric);
  const GroupElement x0 = exp_group(GroupId::SO3, Vector{{0.2, -0.1, 0.3}});
  const GroupElement e0 = exp_group(GroupId::SO3, Vector{{0.9, -0.7, 0.5}});
  IntegratorConfig cfg;
  cfg.step = 1e-3;
  const SimResult sim = simulate_coupled(sys, obs, exact_channel(), x0,
                                         compose(e0, x0), cfg, 0.0, 3.0);
  const FlowField flow = [&cost, &metric](const GroupElement& e, double) {
    return error_flow_field(cost, metric, e);
  };
  const Trajectory direct = integrate_flow(cfg, flow, e0, 0.0, 3.0);
  double worst = 0.0;
  for (size_t k = 0; k < direct.states.size(); ++k) {
    const GroupElement coupled = canonical_error(
        ErrorSide::Right, sim.estimate.states[k], sim.truth.states[k]);
    worst = std::max(worst, group_distance(coupled, direct.states[k]));
  }
  return worst;
}

}  // namespace

std::vector<CheckResult> run_selfchecks() {
  std::vector<CheckResult> out;
  add(out, "so3_exp_log_round_trip", exp_log_round_trip(GroupId::SO3), 1e-9);
  add(out, "se3_exp_log_round_trip", exp_log_round_trip(GroupId::SE3), 1e-9);
  add(out, "so3_exp_matches_series", exp_vs_series(GroupId::SO3), 1e-12);
  add(out, "se3_exp_matches_series", exp_vs_series(GroupId::SE3), 1e-12);
  add(out, "so3_group_axioms", group_axioms(GroupId::SO3), 1e-12);
  add(out, "se3_group_axioms", group_axioms(GroupId::SE3), 1e-12);
  add(out, "so3_adjoint_consistency", adjoint_consistency(GroupId::SO3), 1e-10);
  add(out, "se3_adjoint_consistency", adjoint_consistency(GroupId::SE3), 1e-10);
  add(out, "so3_projection", projection_quality(GroupId::SO3), 1e-12);
  add(out, "se3_projection", projection_quality(GroupId::SE3), 1e-12);
  add(out, "so3_metric_bi_invariance", so3_metric_bi_invariance(), 1e-10);
  add(out, "so3_grad_analytic_vs_fd", grad_consistency(GroupId::SO3), 1e-6);
  add(out, "se3_grad_analytic_vs_fd", grad_consistency(GroupId::SE3), 1e-6);
  add(out, "so3_gradient_like_coincidence",
      gradient_like_coincidence(GroupId::SO3), 1e-9);
  add(out, "se3_gradient_like_coincidence",
      gradient_like_coincidence(GroupId::SE3), 1e-9);
  add(out, "internal_model_synchrony", synchrony_of_internal_model(), 1e-12);
  add(out, "lie_euler_constant_input_exact", lie_euler_constant_exactness(),
      1e-12);
  add(out, "rkmk4_order_deviation", rkmk4_order_deviation(), 0.35);
  add(out, "gradient_descent_monotone", monotone_decay_violation(), 1e-15);
  add(out, "noise_replay_deterministic", noise_replay_determinism(), 0.0);
  add(out, "error_flow_autonomy", error_flow_autonomy(), 1e-8);
  return out;
}

}  // namespace gobs
