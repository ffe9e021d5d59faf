#include <doctest.h>

#include <cmath>

#include "gobs/groups.hpp"
#include "gobs/integrators.hpp"
#include "gobs/noise.hpp"
#include "gobs/observers.hpp"

using namespace gobs;

namespace {

Vector v3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

GroupElement sample(NormalSampler& rng, GroupId g, double amp = 2.0) {
  return exp_group(g, rng.bounded_vector(descriptor(g).dim_algebra, amp));
}

InputSignal wobble3() {
  std::vector<std::vector<InputSignal::Term>> terms(3);
  terms[0].push_back({0.8, 1.1, 0.0});
  terms[1].push_back({0.5, 1.9, 0.7});
  terms[2].push_back({0.3, 0.5, 1.3});
  return sinusoid_input(Vector::Zero(3), terms);
}

std::vector<Observer> so3_catalog() {
  std::vector<Observer> out;
  out.push_back(synchronous_observer(Handedness::Left));
  out.push_back(synchronous_observer(Handedness::Right));
  out.push_back(gradient_observer(Handedness::Left, so3_frobenius_cost(1.0),
                                  canonical_metric(GroupId::SO3)));
  out.push_back(gradient_observer(Handedness::Right, so3_frobenius_cost(1.0),
                                  canonical_metric(GroupId::SO3)));
  out.push_back(gradient_like_observer(Handedness::Left, so3_frobenius_cost(1.0),
                                       canonical_metric(GroupId::SO3)));
  out.push_back(gradient_like_observer(Handedness::Right,
                                       so3_frobenius_cost(1.0),
                                       canonical_metric(GroupId::SO3)));
  return out;
}

}  // namespace

TEST_CASE("passive filter closed forms") {
  NormalSampler rng(601);
  const double k = 1.4;
  const Observer left = gradient_observer(Handedness::Left, so3_frobenius_cost(k),
                                          canonical_metric(GroupId::SO3));
  const Observer right = gradient_observer(Handedness::Right,
                                           so3_frobenius_cost(k),
                                           canonical_metric(GroupId::SO3));
  for (int i = 0; i < 40; ++i) {
    const GroupElement rh = sample(rng, GroupId::SO3);
    const GroupElement y = sample(rng, GroupId::SO3);
    const Vector w = rng.vector(3);
    const Matrix p = skew_project(rh.matrix.transpose() * y.matrix);

    const Matrix want_left = rh.matrix * hat(GroupId::SO3, w) + k * rh.matrix * p;
    CHECK((ambient(observer_field(left, rh, y, w, 0.0)) - want_left).norm() <=
          1e-12);

    const Matrix want_right = hat(GroupId::SO3, w) * rh.matrix + k * rh.matrix * p;
    CHECK((ambient(observer_field(right, rh, y, w, 0.0)) - want_right).norm() <=
          1e-12);
  }
}

TEST_CASE("innovation vanishes on the diagonal (C2')") {
  NormalSampler rng(602);
  for (const Observer& obs : so3_catalog()) {
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const GroupElement y = sample(rng, GroupId::SO3);
      const Vector w = rng.vector(3);
      const double t = rng.next();
      worst = std::max(worst,
                       innovation_of(obs, y, y, w, t).coords.norm());
      // At xhat = y the field must equal the bare synchronous term.
      const Matrix field = ambient(observer_field(obs, y, y, w, t));
      const Matrix sync = ambient(synchronous_term(obs.handedness, y, w));
      worst = std::max(worst, (field - sync).norm());
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("innovation of a gradient observer is minus the gradient") {
  NormalSampler rng(603);
  const CostFunction f = so3_frobenius_cost(0.9);
  const Metric m = canonical_metric(GroupId::SO3);
  const Observer obs = gradient_observer(Handedness::Left, f, m);
  for (int i = 0; i < 30; ++i) {
    const GroupElement xh = sample(rng, GroupId::SO3);
    const GroupElement y = sample(rng, GroupId::SO3);
    const TangentVector inn = innovation_of(obs, xh, y, rng.vector(3), 0.0);
    const TangentVector gr = grad1(f, m, xh, y);
    CHECK(inn.frame == gr.frame);
    CHECK((inn.coords + gr.coords).norm() <= 1e-12);
  }
  // Synchronous observers have no innovation anywhere.
  const Observer sync = synchronous_observer(Handedness::Left);
  for (int i = 0; i < 30; ++i) {
    CHECK(innovation_of(sync, sample(rng, GroupId::SO3),
                        sample(rng, GroupId::SO3), rng.vector(3), 0.0)
              .coords.norm() == 0.0);
  }
}

TEST_CASE("gradient-like coincides with gradient under matched invariance") {
  NormalSampler rng(604);
  // Right-invariant cost and metric, Left observers, on SE(3).
  const CostFunction f = se3_pose_cost();
  const Metric m = canonical_metric(GroupId::SE3);
  const Observer grad = gradient_observer(Handedness::Left, f, m);
  const Observer gl = gradient_like_observer(Handedness::Left, f, m);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const GroupElement xh = sample(rng, GroupId::SE3);
    const GroupElement y = sample(rng, GroupId::SE3);
    const Vector w = rng.vector(6);
    worst = std::max(worst, (ambient(observer_field(grad, xh, y, w, 0.0)) -
                             ambient(observer_field(gl, xh, y, w, 0.0)))
                                .norm());
  }
  CHECK(worst <= 1e-9);

  // Bi-invariant SO(3) cost: both handednesses coincide.
  const CostFunction f3 = so3_frobenius_cost(1.0);
  const Metric m3 = canonical_metric(GroupId::SO3);
  for (Handedness h : {Handedness::Left, Handedness::Right}) {
    const Observer g3 = gradient_observer(h, f3, m3);
    const Observer gl3 = gradient_like_observer(h, f3, m3);
    worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const GroupElement xh = sample(rng, GroupId::SO3);
      const GroupElement y = sample(rng, GroupId::SO3);
      const Vector w = rng.vector(3);
      worst = std::max(worst, (ambient(observer_field(g3, xh, y, w, 0.0)) -
                               ambient(observer_field(gl3, xh, y, w, 0.0)))
                                  .norm());
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("se3 pose filter translation row") {
  // pdot = R w_V - (p - R Y^T y) - P(R Y^T) p for the left gradient-like
  // filter with the canonical right metric.
  NormalSampler rng(605);
  const Observer obs = gradient_like_observer(
      Handedness::Left, se3_pose_cost(), canonical_metric(GroupId::SE3));
  for (int i = 0; i < 40; ++i) {
    const GroupElement xh = sample(rng, GroupId::SE3);
    const GroupElement yel = sample(rng, GroupId::SE3);
    Vector w(6);
    w = rng.vector(6);
    const Matrix rh = xh.matrix.topLeftCorner(3, 3);
    const Vector ph = xh.matrix.topRightCorner(3, 1);
    const Matrix ry = yel.matrix.topLeftCorner(3, 3);
    const Vector py = yel.matrix.topRightCorner(3, 1);

    const Matrix field = ambient(observer_field(obs, xh, yel, w, 0.0));
    const Vector pdot = field.topRightCorner(3, 1);
    const Vector want = rh * w.tail(3) - (ph - rh * ry.transpose() * py) -
                        skew_project(rh * ry.transpose()) * ph;
    CHECK((pdot - want).norm() <= 1e-10);
  }
}

TEST_CASE("internal-model property for the whole catalog") {
  // Estimator started on the truth with exact measurements stays on it.
  NormalSampler rng(606);
  const GroupElement x0 = sample(rng, GroupId::SO3);
  IntegratorConfig cfg;
  cfg.step = 1e-3;
  for (const Observer& obs : so3_catalog()) {
    const InvariantSystem sys =
        make_system(GroupId::SO3, obs.handedness, wobble3());
    const SimResult sim = simulate_coupled(sys, obs, exact_channel(), x0, x0,
                                           cfg, 0.0, 10.0);
    double sup = 0.0;
    for (std::size_t k = 0; k < sim.truth.states.size(); ++k) {
      sup = std::max(sup, (sim.truth.states[k].matrix -
                           sim.estimate.states[k].matrix)
                              .norm());
    }
    CHECK(sup <= 1e-7);
  }
}

TEST_CASE("zero velocity freezes the synchronous estimator") {
  const InvariantSystem sys = make_system(GroupId::SO3, Handedness::Left,
                                          constant_input(Vector::Zero(3)));
  const Observer obs = synchronous_observer(Handedness::Left);
  NormalSampler rng(607);
  const GroupElement x0 = sample(rng, GroupId::SO3);
  const GroupElement xh0 = sample(rng, GroupId::SO3);
  IntegratorConfig cfg;
  cfg.step = 1e-2;
  const SimResult sim =
      simulate_coupled(sys, obs, exact_channel(), x0, xh0, cfg, 0.0, 3.0);
  for (const GroupElement& z : sim.estimate.states) {
    CHECK((z.matrix - xh0.matrix).norm() <= 1e-13);
  }
}

TEST_CASE("error flow field") {
  const CostFunction f = so3_frobenius_cost(1.3);
  const Metric m = canonical_metric(GroupId::SO3);

  CHECK(error_flow_field(f, m, identity(GroupId::SO3)).coords.norm() <= 1e-13);

  // Along exp(theta zhat) the flow reduces to thetadot = -k sin(theta).
  for (double theta : {0.3, 1.0, 2.0, 3.0}) {
    const GroupElement e = exp_group(GroupId::SO3, v3(0, 0, theta));
    const Matrix edot = ambient(error_flow_field(f, m, e));
    const Matrix want =
        -1.3 * std::sin(theta) * hat(GroupId::SO3, v3(0, 0, 1)) * e.matrix;
    CHECK((edot - want).norm() <= 1e-12);
  }
}

TEST_CASE("coupled error equals the autonomous error flow") {
  // The autonomy property at unit scale: SO(3), left gradient observer.
  const CostFunction f = so3_frobenius_cost(1.0);
  const Metric m = canonical_metric(GroupId::SO3);
  const InvariantSystem sys =
      make_system(GroupId::SO3, Handedness::Left, wobble3());
  const Observer obs = gradient_observer(Handedness::Left, f, m);
  IntegratorConfig cfg;
  cfg.step = 1e-3;
  NormalSampler rng(608);
  const GroupElement x0 = sample(rng, GroupId::SO3);
  const GroupElement xh0 = sample(rng, GroupId::SO3);
  const SimResult sim =
      simulate_coupled(sys, obs, exact_channel(), x0, xh0, cfg, 0.0, 10.0);

  const GroupElement e0 =
      canonical_error(ErrorSide::Right, sim.estimate.states[0],
                      sim.truth.states[0]);
  const FlowField flow = [&](const GroupElement& e, double) {
    return error_flow_field(f, m, e);
  };
  const Trajectory direct = integrate_flow(cfg, flow, e0, 0.0, 10.0);
  REQUIRE(direct.states.size() == sim.truth.states.size());
  double sup = 0.0;
  for (std::size_t k = 0; k < direct.states.size(); ++k) {
    const GroupElement ek = canonical_error(
        ErrorSide::Right, sim.estimate.states[k], sim.truth.states[k]);
    sup = std::max(sup, group_distance(ek, direct.states[k]));
  }
  CHECK(sup <= 1e-6);
}

TEST_CASE("skew error field and passivity") {
  const CostFunction f = so3_frobenius_cost(1.0);
  const Metric m = canonical_metric(GroupId::SO3);
  NormalSampler rng(609);

  // u = 0 reduces to the plain error flow; E = e gives zero.
  const GroupElement e1 = sample(rng, GroupId::SO3);
  CHECK((ambient(skew_error_field(f, m, e1, Vector::Zero(3))) -
         ambient(error_flow_field(f, m, e1)))
            .norm() <= 1e-13);
  CHECK(skew_error_field(f, m, identity(GroupId::SO3), rng.vector(3))
            .coords.norm() <= 1e-13);

  // d/dt f along the skew flow is exactly -|grad|^2: the commutator part is
  // orthogonal to the gradient for the bi-invariant cost.
  REQUIRE(bool(f.body_diff1));
  const GroupElement id = identity(GroupId::SO3);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const GroupElement e = sample(rng, GroupId::SO3, 2.5);
    const Vector u = rng.vector(3);
    const TangentVector field = skew_error_field(f, m, e, u);
    const TangentVector body = to_frame(field, Frame::Body);
    const Vector db = f.body_diff1(e, id);
    const double fdot = db.dot(body.coords);
    const TangentVector gr = grad1(f, m, e, id);
    const double grad_sq = metric_inner(m, gr.coords, gr.coords);
    worst = std::max(worst, std::abs(fdot + grad_sq));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("custom observer probe rejects malformed fields") {
  // Wrong dimension.
  CHECK_THROWS_AS(
      (void)custom_observer(GroupId::SO3, Handedness::Left,
                            [](const GroupElement& xh, const GroupElement&,
                               const Vector&, double) {
                              return TangentVector{xh, Vector::Zero(6),
                                                   Frame::Body};
                            }),
      UsageError);
  // Tangent parked at the wrong base point.
  CHECK_THROWS_AS(
      (void)custom_observer(GroupId::SO3, Handedness::Left,
                            [](const GroupElement&, const GroupElement& y,
                               const Vector&, double) {
                              return TangentVector{y, Vector::Zero(3),
                                                   Frame::Body};
                            }),
      UsageError);
  // Non-finite coordinates.
  CHECK_THROWS_AS(
      (void)custom_observer(GroupId::SO3, Handedness::Left,
                            [](const GroupElement& xh, const GroupElement&,
                               const Vector&, double) {
                              Vector bad = Vector::Zero(3);
                              bad(0) = std::nan("");
                              return TangentVector{xh, bad, Frame::Body};
                            }),
      UsageError);
  // A well-behaved field passes and round-trips through observer_field.
  const Observer ok = custom_observer(
      GroupId::SO3, Handedness::Left,
      [](const GroupElement& xh, const GroupElement&, const Vector& w, double) {
        return TangentVector{xh, w, Frame::Body};
      });
  NormalSampler rng(610);
  const GroupElement z = sample(rng, GroupId::SO3);
  CHECK((ambient(observer_field(ok, z, z, v3(1, 2, 3), 0.0)) -
         z.matrix * hat(GroupId::SO3, v3(1, 2, 3)))
            .norm() == 0.0);
}

TEST_CASE("observer_field validates its arguments") {
  const Observer obs = gradient_observer(Handedness::Left, so3_frobenius_cost(1.0),
                                         canonical_metric(GroupId::SO3));
  CHECK_THROWS_AS((void)observer_field(obs, identity(GroupId::SE3),
                                       identity(GroupId::SE3), Vector::Zero(6),
                                       0.0),
                  UsageError);
  CHECK_THROWS_AS((void)observer_field(obs, identity(GroupId::SO3),
                                       identity(GroupId::SO3), Vector::Zero(5),
                                       0.0),
                  UsageError);
}
