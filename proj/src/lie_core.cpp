#include "gobs/lie_core.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "gobs/groups.hpp"

namespace gobs {

namespace {

void require_same_group(const GroupElement& a, const GroupElement& b,
                        const char* op) {
  if (a.group != b.group) {
    throw UsageError(std::string(op) + ": group tags do not match (" +
                     group_name(a.group) + " vs " + group_name(b.group) + ")");
  }
}

void require_coord_dim(GroupId g, const Vector& v, const char* op) {
  const int want = descriptor(g).dim_algebra;
  if (v.size() != want) {
    throw UsageError(std::string(op) + ": expected " + std::to_string(want) +
                     " coordinates for " + group_name(g) + ", got " +
                     std::to_string(v.size()));
  }
}

}  // namespace

const char* group_name(GroupId g) {
  return g == GroupId::SO3 ? "SO3" : "SE3";
}

const char* invariance_name(Invariance inv) {
  switch (inv) {
    case Invariance::None: return "none";
    case Invariance::Left: return "left";
    case Invariance::Right: return "right";
    case Invariance::Bi: return "bi";
  }
  return "?";
}

GroupElement identity(GroupId g) {
  const int n = descriptor(g).matrix_size;
  return GroupElement{g, Matrix::Identity(n, n)};
}

GroupElement group_element(GroupId g, const Matrix& m) {
  const double res = membership_residual(g, m);
  if (res <= kMembershipSnap) {
    return GroupElement{g, m};
  }
  if (res <= kMembershipHard) {
    return GroupElement{g, project_to_group(g, m)};
  }
  throw MembershipError("matrix is not in " + std::string(group_name(g)) +
                        " (membership residual " + std::to_string(res) + ")");
}

GroupElement compose(const GroupElement& a, const GroupElement& b) {
  require_same_group(a, b, "compose");
  return group_element(a.group, a.matrix * b.matrix);
}

GroupElement invert(const GroupElement& x) {
  if (x.group == GroupId::SO3) {
    return GroupElement{x.group, x.matrix.transpose()};
  }
  const Matrix r = x.matrix.topLeftCorner(3, 3);
  Matrix m = Matrix::Identity(4, 4);
  m.topLeftCorner(3, 3) = r.transpose();
  m.topRightCorner(3, 1) = -r.transpose() * x.matrix.topRightCorner(3, 1);
  return GroupElement{x.group, m};
}

Vector adjoint(const GroupElement& x, const Vector& v) {
  require_coord_dim(x.group, v, "adjoint");
  return adjoint_matrix(x) * v;
}

TangentVector to_frame(const TangentVector& t, Frame target) {
  require_coord_dim(t.base.group, t.coords, "to_frame");
  if (t.frame == target) return t;
  if (target == Frame::Spatial) {
    return TangentVector{t.base, adjoint_matrix(t.base) * t.coords, target};
  }
  return TangentVector{t.base, adjoint_matrix(invert(t.base)) * t.coords, target};
}

Matrix ambient(const TangentVector& t) {
  require_coord_dim(t.base.group, t.coords, "ambient");
  const Matrix h = hat(t.base.group, t.coords);
  return t.frame == Frame::Body ? Matrix(t.base.matrix * h)
                                : Matrix(h * t.base.matrix);
}

Metric make_metric(GroupId g, const Matrix& gram, Invariance invariance) {
  const int n = descriptor(g).dim_algebra;
  if (gram.rows() != n || gram.cols() != n) {
    throw UsageError("make_metric: gram must be " + std::to_string(n) + "x" +
                     std::to_string(n) + " for " + group_name(g));
  }
  if (invariance == Invariance::None) {
    throw UsageError("make_metric: a metric must carry an invariance tag");
  }
  if ((gram - gram.transpose()).norm() > 1e-12 * std::max(1.0, gram.norm())) {
    throw UsageError("make_metric: gram is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw UsageError("make_metric: gram is not positive definite");
  }
  if (invariance == Invariance::Bi) {
    // Ad-invariance spot check on a fixed sample of group elements.
    Vector probe = Vector::Zero(n);
    for (int k = 0; k < 4; ++k) {
      for (int i = 0; i < n; ++i) {
        probe(i) = std::cos(1.7 * k + 0.9 * i) * 0.8;
      }
      const Matrix ad = adjoint_matrix(exp_group(g, probe));
      if ((ad.transpose() * gram * ad - gram).norm() > 1e-10) {
        throw UsageError(
            "make_metric: gram is not Ad-invariant; Bi tag rejected");
      }
    }
  }
  return Metric{gram, invariance};
}

double metric_inner(const Metric& m, const Vector& v, const Vector& w) {
  if (v.size() != m.gram.rows() || w.size() != m.gram.rows()) {
    throw UsageError("metric_inner: coordinate dimension does not match gram");
  }
  return v.dot(m.gram * w);
}

}  // namespace gobs
