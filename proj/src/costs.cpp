#include "gobs/costs.hpp"

#include <cmath>
#include <utility>

#include "gobs/groups.hpp"

namespace gobs {

namespace {

Frame metric_frame(const Metric& m) {
  return m.invariance == Invariance::Right ? Frame::Spatial : Frame::Body;
}

void require_pair(const CostFunction& f, const GroupElement& xhat,
                  const GroupElement& y, const char* op) {
  if (!f.value) {
    throw UsageError(std::string(op) + ": cost '" + f.name + "' has no value");
  }
  if (xhat.group != y.group) {
    throw UsageError(std::string(op) + ": arguments live in different groups");
  }
}

// Spatial covector of the pose cost: (2 vee(skew(Rhat Y^T)); phat - Rhat Y^T y).
Vector se3_pose_spatial_diff(const GroupElement& xhat, const GroupElement& y) {
  const Matrix rhat = xhat.matrix.topLeftCorner(3, 3);
  const Matrix ry = y.matrix.topLeftCorner(3, 3);
  const Vector phat = xhat.matrix.topRightCorner(3, 1);
  const Vector py = y.matrix.topRightCorner(3, 1);
  const Matrix rel = rhat * ry.transpose();
  Vector d(6);
  d.head(3) = 2.0 * vee(GroupId::SO3, skew_project(rel));
  d.tail(3) = phat - rel * py;
  return d;
}

}  // namespace

double eval_cost(const CostFunction& f, const GroupElement& xhat,
                 const GroupElement& y) {
  require_pair(f, xhat, y, "eval_cost");
  return f.value(xhat, y);
}

CostFunction lift_right_invariant(
    GroupId g, std::string name,
    std::function<double(const GroupElement&)> error_cost,
    std::function<Vector(const GroupElement&)> error_cost_diff,
    bool morse_bott) {
  if (!error_cost) throw UsageError("lift_right_invariant: no error cost");
  CostFunction f;
  f.name = std::move(name);
  f.invariance = Invariance::Right;
  f.morse_bott = morse_bott;
  f.value = [g, error_cost](const GroupElement& xhat, const GroupElement& y) {
    if (xhat.group != g || y.group != g) {
      throw UsageError("lifted cost: wrong group");
    }
    return error_cost(compose(xhat, invert(y)));
  };
  if (error_cost_diff) {
    // xhat exp(s u) y^-1 = E exp(s Ad_y u), so the lifted body covector is
    // Ad_y^T applied to the error-cost covector at E.
    f.body_diff1 = [g, error_cost_diff](const GroupElement& xhat,
                                        const GroupElement& y) -> Vector {
      const GroupElement e = compose(xhat, invert(y));
      return adjoint_matrix(y).transpose() * error_cost_diff(e);
    };
  }
  return f;
}

CostFunction mirror_invariance(const CostFunction& f) {
  if (!f.value) throw UsageError("mirror_invariance: no value");
  CostFunction out;
  out.name = f.name + "_mirrored";
  switch (f.invariance) {
    case Invariance::Left: out.invariance = Invariance::Right; break;
    case Invariance::Right: out.invariance = Invariance::Left; break;
    default: out.invariance = f.invariance; break;
  }
  out.morse_bott = f.morse_bott;
  auto value = f.value;
  out.value = [value](const GroupElement& xhat, const GroupElement& y) {
    return value(invert(xhat), invert(y));
  };
  if (f.body_diff1) {
    // Body perturbation of xhat becomes a spatial perturbation of xhat^-1
    // with flipped sign; pull the mirrored covector back through Ad_xhat^T.
    auto diff = f.body_diff1;
    out.body_diff1 = [diff](const GroupElement& xhat,
                            const GroupElement& y) -> Vector {
      return -adjoint_matrix(xhat).transpose() * diff(invert(xhat), invert(y));
    };
  }
  return out;
}

CostFunction so3_frobenius_cost(double gain) {
  if (!(gain > 0.0)) throw UsageError("so3_frobenius_cost: gain must be > 0");
  CostFunction f;
  f.name = "so3_frobenius";
  f.invariance = Invariance::Bi;
  f.morse_bott = true;
  f.value = [gain](const GroupElement& xhat, const GroupElement& y) {
    if (xhat.group != GroupId::SO3) throw UsageError("so3_frobenius: wrong group");
    return 0.5 * gain * (xhat.matrix - y.matrix).squaredNorm();
  };
  f.body_diff1 = [gain](const GroupElement& xhat, const GroupElement& y) -> Vector {
    if (xhat.group != GroupId::SO3) throw UsageError("so3_frobenius: wrong group");
    const Matrix rel = xhat.matrix.transpose() * y.matrix;
    return -2.0 * gain * vee(GroupId::SO3, skew_project(rel));
  };
  return f;
}

CostFunction se3_pose_cost() {
  CostFunction f;
  f.name = "se3_pose";
  f.invariance = Invariance::Right;
  f.morse_bott = true;
  f.value = [](const GroupElement& xhat, const GroupElement& y) {
    if (xhat.group != GroupId::SE3) throw UsageError("se3_pose: wrong group");
    const Matrix rel = xhat.matrix.topLeftCorner(3, 3) *
                       y.matrix.topLeftCorner(3, 3).transpose();
    const Vector dp = xhat.matrix.topRightCorner(3, 1) -
                      rel * y.matrix.topRightCorner(3, 1);
    return 0.5 * (rel - Matrix::Identity(3, 3)).squaredNorm() +
           0.5 * dp.squaredNorm();
  };
  f.body_diff1 = [](const GroupElement& xhat, const GroupElement& y) -> Vector {
    if (xhat.group != GroupId::SE3) throw UsageError("se3_pose: wrong group");
    return adjoint_matrix(xhat).transpose() * se3_pose_spatial_diff(xhat, y);
  };
  return f;
}

Metric canonical_metric(GroupId g) {
  if (g == GroupId::SO3) {
    return make_metric(g, 2.0 * Matrix::Identity(3, 3), Invariance::Bi);
  }
  Vector diag(6);
  diag << 2.0, 2.0, 2.0, 1.0, 1.0, 1.0;
  return make_metric(g, diag.asDiagonal(), Invariance::Right);
}

TangentVector fd_grad1(const CostFunction& f, const Metric& m,
                       const GroupElement& xhat, const GroupElement& y,
                       double eps) {
  require_pair(f, xhat, y, "fd_grad1");
  if (!(eps > 0.0)) throw UsageError("fd_grad1: eps must be > 0");
  const GroupId g = xhat.group;
  const int n = descriptor(g).dim_algebra;
  if (m.gram.rows() != n) throw UsageError("fd_grad1: metric dimension mismatch");
  const Frame frame = metric_frame(m);
  Vector d(n);
  Vector e = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    e(i) = eps;
    const GroupElement step = exp_group(g, e);
    const bool body = frame == Frame::Body;
    const GroupElement fwd = body ? compose(xhat, step) : compose(step, xhat);
    const GroupElement bwd =
        body ? compose(xhat, invert(step)) : compose(invert(step), xhat);
    d(i) = (f.value(fwd, y) - f.value(bwd, y)) / (2.0 * eps);
    e(i) = 0.0;
  }
  return TangentVector{xhat, m.gram.ldlt().solve(d), frame};
}

TangentVector grad1(const CostFunction& f, const Metric& m,
                    const GroupElement& xhat, const GroupElement& y,
                    double eps) {
  if (!f.body_diff1) return fd_grad1(f, m, xhat, y, eps);
  require_pair(f, xhat, y, "grad1");
  const int n = descriptor(xhat.group).dim_algebra;
  if (m.gram.rows() != n) throw UsageError("grad1: metric dimension mismatch");
  Vector d = f.body_diff1(xhat, y);
  const Frame frame = metric_frame(m);
  if (frame == Frame::Spatial) {
    d = adjoint_matrix(invert(xhat)).transpose() * d;
  }
  return TangentVector{xhat, m.gram.ldlt().solve(d), frame};
}

}  // namespace gobs
