#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gobs/groups.hpp"
#include "gobs/noise.hpp"

using namespace gobs;

namespace {

constexpr double kPi = std::numbers::pi;

Vector v3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

GroupElement rot_z(double th) {
  return exp_group(GroupId::SO3, v3(0, 0, th));
}

GroupElement random_element(NormalSampler& rng, GroupId g, double amp = 2.0) {
  return exp_group(g, rng.bounded_vector(descriptor(g).dim_algebra, amp));
}

}  // namespace

TEST_CASE("compose basics") {
  NormalSampler rng(201);
  for (GroupId g : {GroupId::SO3, GroupId::SE3}) {
    const GroupElement id = identity(g);
    for (int i = 0; i < 20; ++i) {
      const GroupElement x = random_element(rng, g);
      CHECK((compose(id, x).matrix - x.matrix).norm() == 0.0);
      CHECK((compose(x, id).matrix - x.matrix).norm() == 0.0);
      CHECK((compose(x, invert(x)).matrix - id.matrix).norm() <= 1e-12);
    }
  }
  // Pure translations add.
  Matrix a = Matrix::Identity(4, 4), b = Matrix::Identity(4, 4);
  a(0, 3) = 1.0;
  a(2, 3) = -2.0;
  b(0, 3) = 0.5;
  b(1, 3) = 4.0;
  const GroupElement ab = compose(group_element(GroupId::SE3, a),
                                  group_element(GroupId::SE3, b));
  CHECK(ab.matrix(0, 3) == 1.5);
  CHECK(ab.matrix(1, 3) == 4.0);
  CHECK(ab.matrix(2, 3) == -2.0);
  CHECK((ab.matrix.topLeftCorner(3, 3) - Matrix::Identity(3, 3)).norm() == 0.0);

  CHECK_THROWS_AS((void)compose(identity(GroupId::SO3), identity(GroupId::SE3)),
                  UsageError);
}

TEST_CASE("invert closed forms") {
  CHECK((invert(identity(GroupId::SO3)).matrix - Matrix::Identity(3, 3)).norm() ==
        0.0);
  NormalSampler rng(202);
  for (int i = 0; i < 20; ++i) {
    const GroupElement r = random_element(rng, GroupId::SO3);
    CHECK((invert(r).matrix - r.matrix.transpose()).norm() <= 1e-15);

    const GroupElement x = random_element(rng, GroupId::SE3);
    const Matrix rt = x.matrix.topLeftCorner(3, 3).transpose();
    const Vector p = x.matrix.topRightCorner(3, 1);
    const Matrix xin = invert(x).matrix;
    CHECK((xin.topLeftCorner(3, 3) - rt).norm() <= 1e-15);
    CHECK((xin.topRightCorner(3, 1) + rt * p).norm() <= 1e-13);
  }
}

TEST_CASE("group axioms on random elements") {
  NormalSampler rng(203);
  for (GroupId g : {GroupId::SO3, GroupId::SE3}) {
    const Matrix id = identity(g).matrix;
    double assoc = 0.0, inv_law = 0.0;
    for (int i = 0; i < 100; ++i) {
      const GroupElement a = random_element(rng, g);
      const GroupElement b = random_element(rng, g);
      const GroupElement c = random_element(rng, g);
      assoc = std::max(assoc, (compose(compose(a, b), c).matrix -
                               compose(a, compose(b, c)).matrix)
                                  .norm());
      inv_law = std::max(inv_law, (compose(invert(a), a).matrix - id).norm());
    }
    CHECK(assoc <= 1e-10);
    CHECK(inv_law <= 1e-12);
  }
}

TEST_CASE("adjoint action") {
  NormalSampler rng(204);
  const Vector e1 = v3(1, 0, 0);
  CHECK((adjoint(identity(GroupId::SO3), e1) - e1).norm() == 0.0);
  CHECK((adjoint(rot_z(kPi / 2), e1) - v3(0, 1, 0)).norm() <= 1e-15);

  for (GroupId g : {GroupId::SO3, GroupId::SE3}) {
    const int n = descriptor(g).dim_algebra;
    double homo = 0.0, action = 0.0;
    for (int i = 0; i < 100; ++i) {
      const GroupElement x = random_element(rng, g);
      const GroupElement y = random_element(rng, g);
      const Vector v = rng.vector(n);
      action = std::max(action,
                        (adjoint(x, adjoint(invert(x), v)) - v).norm());
      homo = std::max(homo, (adjoint(compose(x, y), v) -
                             adjoint(x, adjoint(y, v)))
                                .norm());
    }
    CHECK(action <= 1e-10);
    CHECK(homo <= 1e-10);
  }
}

TEST_CASE("to_frame and ambient") {
  NormalSampler rng(205);
  const GroupElement x = rot_z(kPi / 2);
  const TangentVector body{x, v3(1, 0, 0), Frame::Body};

  // Same frame: unchanged.
  const TangentVector same = to_frame(body, Frame::Body);
  CHECK((same.coords - body.coords).norm() == 0.0);
  CHECK(same.frame == Frame::Body);

  // Body (1,0,0) at rot_z(pi/2) is spatial (0,1,0).
  const TangentVector sp = to_frame(body, Frame::Spatial);
  CHECK(sp.frame == Frame::Spatial);
  CHECK((sp.coords - v3(0, 1, 0)).norm() <= 1e-15);

  // Identity base: coords unchanged, flag swapped.
  const TangentVector at_id{identity(GroupId::SO3), v3(0.3, -0.2, 0.9),
                            Frame::Body};
  const TangentVector sw = to_frame(at_id, Frame::Spatial);
  CHECK((sw.coords - at_id.coords).norm() == 0.0);

  // Ambient matrices: X hat(u) for Body, hat(s) X for Spatial; equal after
  // conversion.
  for (GroupId g : {GroupId::SO3, GroupId::SE3}) {
    const int n = descriptor(g).dim_algebra;
    for (int i = 0; i < 20; ++i) {
      const GroupElement z = random_element(rng, g);
      const TangentVector tb{z, rng.vector(n), Frame::Body};
      CHECK((ambient(tb) - z.matrix * hat(g, tb.coords)).norm() == 0.0);
      const TangentVector ts = to_frame(tb, Frame::Spatial);
      CHECK((ambient(ts) - hat(g, ts.coords) * z.matrix).norm() == 0.0);
      CHECK((ambient(ts) - ambient(tb)).norm() <= 1e-12);
      const TangentVector back = to_frame(ts, Frame::Body);
      CHECK((back.coords - tb.coords).norm() <= 1e-12);
    }
  }
}

TEST_CASE("metric_inner values") {
  const Metric euclid = make_metric(GroupId::SO3, Matrix::Identity(3, 3),
                                    Invariance::Left);
  CHECK(metric_inner(euclid, Vector::Zero(3), v3(4, 5, 6)) == 0.0);
  CHECK(metric_inner(euclid, v3(1, 1, 1), v3(1, 1, 1)) == 3.0);

  const Metric frob = make_metric(GroupId::SO3, 2.0 * Matrix::Identity(3, 3),
                                  Invariance::Bi);
  CHECK(metric_inner(frob, v3(1, 0, 0), v3(1, 0, 0)) == 2.0);
  // ... which is exactly tr(hat(v)^T hat(v)) for v = e1.
  const Matrix h = hat(GroupId::SO3, v3(1, 0, 0));
  CHECK((h.transpose() * h).trace() == 2.0);
}

TEST_CASE("make_metric validation") {
  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS((void)make_metric(GroupId::SO3, asym, Invariance::Left),
                  UsageError);

  Matrix neg = Matrix::Identity(3, 3);
  neg(2, 2) = -1.0;
  CHECK_THROWS_AS((void)make_metric(GroupId::SO3, neg, Invariance::Left),
                  UsageError);

  // A non-isotropic gram cannot be bi-invariant on so(3).
  Matrix aniso = Matrix::Identity(3, 3);
  aniso(0, 0) = 2.0;
  CHECK_THROWS_AS((void)make_metric(GroupId::SO3, aniso, Invariance::Bi),
                  UsageError);
  CHECK_NOTHROW((void)make_metric(GroupId::SO3, aniso, Invariance::Left));
}

TEST_CASE("bi-invariant metric is Ad-invariant") {
  const Metric m = make_metric(GroupId::SO3, 2.0 * Matrix::Identity(3, 3),
                               Invariance::Bi);
  NormalSampler rng(206);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const GroupElement x = random_element(rng, GroupId::SO3);
    const Vector u = rng.vector(3), v = rng.vector(3);
    worst = std::max(worst, std::abs(metric_inner(m, adjoint(x, u),
                                                  adjoint(x, v)) -
                                     metric_inner(m, u, v)));
  }
  CHECK(worst <= 1e-10);
}
