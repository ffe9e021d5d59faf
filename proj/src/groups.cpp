#include "gobs/groups.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <string>

namespace gobs {

namespace {

const GroupDescriptor kSo3{GroupId::SO3, 3, 3};
const GroupDescriptor kSe3{GroupId::SE3, 6, 4};

Matrix hat3(const Vector& w) {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 1) = -w(2);
  m(0, 2) = w(1);
  m(1, 0) = w(2);
  m(1, 2) = -w(0);
  m(2, 0) = -w(1);
  m(2, 1) = w(0);
  return m;
}

Vector vee3(const Matrix& m) {
  Vector w(3);
  w << m(2, 1), m(0, 2), m(1, 0);
  return w;
}

// sin(t)/t, (1-cos t)/t^2, (t-sin t)/t^3 with series fallbacks near zero.
// Shared by the exponential on both groups.
struct TrigCoeffs {
  double a, b, c;
};

TrigCoeffs trig_coeffs(double theta_sq) {
  TrigCoeffs k;
  if (theta_sq < 1e-8) {
    k.a = 1.0 - theta_sq / 6.0 + theta_sq * theta_sq / 120.0;
    k.b = 0.5 - theta_sq / 24.0 + theta_sq * theta_sq / 720.0;
    k.c = 1.0 / 6.0 - theta_sq / 120.0 + theta_sq * theta_sq / 5040.0;
  } else {
    const double theta = std::sqrt(theta_sq);
    k.a = std::sin(theta) / theta;
    k.b = (1.0 - std::cos(theta)) / theta_sq;
    k.c = (theta - std::sin(theta)) / (theta_sq * theta);
  }
  return k;
}

Matrix rodrigues(const Vector& w) {
  const double theta_sq = w.squaredNorm();
  const TrigCoeffs k = trig_coeffs(theta_sq);
  const Matrix wx = hat3(w);
  return Matrix::Identity(3, 3) + k.a * wx + k.b * wx * wx;
}

// Left Jacobian of the SO(3) exponential; maps the translational coordinate
// of se(3) to the translation of the SE(3) exponential.
Matrix left_jacobian(const Vector& w) {
  const double theta_sq = w.squaredNorm();
  const TrigCoeffs k = trig_coeffs(theta_sq);
  const Matrix wx = hat3(w);
  return Matrix::Identity(3, 3) + k.b * wx + k.c * wx * wx;
}

Vector log_so3(const Matrix& r) {
  const double tr = r.trace();
  if (tr <= -1.0 + 1e-9) {
    throw SingularityError(
        "log_group: rotation within 1e-9 of the angle-pi cut locus (tr(R) = " +
        std::to_string(tr) + ")");
  }
  const Vector skew = vee3(r - r.transpose());
  // sin(theta) read off the skew part and cos(theta) off the trace keep the
  // angle well conditioned all the way to the cut-locus guard; recovering
  // theta through acos alone loses ~1/sin^2 digits near pi.
  const double sin_theta = 0.5 * skew.norm();
  const double cos_theta = std::min(1.0, std::max(-1.0, (tr - 1.0) / 2.0));
  const double theta = std::atan2(sin_theta, cos_theta);
  double scale;  // theta / (2 sin theta)
  if (theta < 1e-4) {
    const double theta_sq = theta * theta;
    scale = 0.5 + theta_sq / 12.0 + 7.0 * theta_sq * theta_sq / 720.0;
  } else {
    scale = theta / (2.0 * sin_theta);
  }
  return scale * skew;
}

void require_dim(GroupId g, const Vector& coords) {
  const int want = descriptor(g).dim_algebra;
  if (coords.size() != want) {
    throw UsageError("algebra coordinates for " + std::string(group_name(g)) +
                     " must have dimension " + std::to_string(want) + ", got " +
                     std::to_string(coords.size()));
  }
}

void require_size(GroupId g, const Matrix& m) {
  const int want = descriptor(g).matrix_size;
  if (m.rows() != want || m.cols() != want) {
    throw UsageError("matrix for " + std::string(group_name(g)) + " must be " +
                     std::to_string(want) + "x" + std::to_string(want));
  }
}

}  // namespace

const GroupDescriptor& descriptor(GroupId g) {
  return g == GroupId::SO3 ? kSo3 : kSe3;
}

Matrix hat(GroupId g, const Vector& coords) {
  require_dim(g, coords);
  if (g == GroupId::SO3) return hat3(coords);
  Matrix m = Matrix::Zero(4, 4);
  m.topLeftCorner(3, 3) = hat3(coords.head(3));
  m.topRightCorner(3, 1) = coords.tail(3);
  return m;
}

Vector vee(GroupId g, const Matrix& m) {
  require_size(g, m);
  const Matrix rot = m.topLeftCorner(3, 3);
  if ((rot + rot.transpose()).norm() > 1e-9 * std::max(1.0, rot.norm())) {
    throw UsageError("vee: rotation block is not skew symmetric");
  }
  if (g == GroupId::SO3) return vee3(m);
  if (m.row(3).norm() > 1e-9 * std::max(1.0, m.norm())) {
    throw UsageError("vee: se(3) element must have a zero bottom row");
  }
  Vector coords(6);
  coords.head(3) = vee3(rot);
  coords.tail(3) = m.topRightCorner(3, 1);
  return coords;
}

Matrix skew_project(const Matrix& m) {
  if (m.rows() != m.cols()) throw UsageError("skew_project: matrix must be square");
  return 0.5 * (m - m.transpose());
}

GroupElement exp_group(GroupId g, const Vector& coords) {
  require_dim(g, coords);
  if (!coords.allFinite()) throw UsageError("exp_group: non-finite coordinates");
  if (g == GroupId::SO3) {
    return GroupElement{g, rodrigues(coords)};
  }
  Matrix m = Matrix::Identity(4, 4);
  m.topLeftCorner(3, 3) = rodrigues(coords.head(3));
  m.topRightCorner(3, 1) = left_jacobian(coords.head(3)) * coords.tail(3);
  return GroupElement{g, m};
}

Vector log_group(const GroupElement& x) {
  if (x.group == GroupId::SO3) {
    return log_so3(x.matrix);
  }
  const Vector w = log_so3(x.matrix.topLeftCorner(3, 3));
  Vector coords(6);
  coords.head(3) = w;
  // V solves J(w) V = p; J is invertible for |w| < pi so an LU solve beats
  // carrying a second closed form around.
  coords.tail(3) =
      left_jacobian(w).partialPivLu().solve(x.matrix.topRightCorner(3, 1).eval());
  return coords;
}

double membership_residual(GroupId g, const Matrix& m) {
  require_size(g, m);
  if (!m.allFinite()) return std::numeric_limits<double>::infinity();
  const Matrix r = m.topLeftCorner(3, 3);
  double res = (r.transpose() * r - Matrix::Identity(3, 3)).norm() +
               std::abs(r.determinant() - 1.0);
  if (g == GroupId::SE3) {
    Eigen::RowVector4d affine_row(0.0, 0.0, 0.0, 1.0);
    res += (m.row(3) - affine_row).norm();
  }
  return res;
}

Matrix project_to_group(GroupId g, const Matrix& m) {
  require_size(g, m);
  if (!m.allFinite()) throw UsageError("project_to_group: non-finite input");
  const Matrix block = m.topLeftCorner(3, 3);
  Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix u = svd.matrixU();
  const Matrix v = svd.matrixV();
  Matrix d = Matrix::Identity(3, 3);
  d(2, 2) = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Matrix r = u * d * v.transpose();
  if (g == GroupId::SO3) return r;
  Matrix out = Matrix::Identity(4, 4);
  out.topLeftCorner(3, 3) = r;
  out.topRightCorner(3, 1) = m.topRightCorner(3, 1);
  return out;
}

Matrix adjoint_matrix(const GroupElement& x) {
  if (x.group == GroupId::SO3) return x.matrix;
  const Matrix r = x.matrix.topLeftCorner(3, 3);
  const Vector p = x.matrix.topRightCorner(3, 1);
  Matrix ad = Matrix::Zero(6, 6);
  ad.topLeftCorner(3, 3) = r;
  ad.bottomLeftCorner(3, 3) = hat3(p) * r;
  ad.bottomRightCorner(3, 3) = r;
  return ad;
}

Matrix ad_matrix(GroupId g, const Vector& u) {
  require_dim(g, u);
  if (g == GroupId::SO3) return hat3(u);
  Matrix ad = Matrix::Zero(6, 6);
  ad.topLeftCorner(3, 3) = hat3(u.head(3));
  ad.bottomLeftCorner(3, 3) = hat3(u.tail(3));
  ad.bottomRightCorner(3, 3) = hat3(u.head(3));
  return ad;
}

Vector bracket(GroupId g, const Vector& a, const Vector& b) {
  return ad_matrix(g, a) * b;
}

}  // namespace gobs
