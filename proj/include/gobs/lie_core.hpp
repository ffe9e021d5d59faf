#pragma once

#include <Eigen/Dense>

#include "gobs/exceptions.hpp"

namespace gobs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class GroupId { SO3, SE3 };

const char* group_name(GroupId g);

// Embedded matrix representative plus the tag saying which group it lives in.
// Construct through group_element() / identity() so membership is enforced.
struct GroupElement {
  GroupId group;
  Matrix matrix;
};

// Matrices with membership residual in (snap, hard] are silently reprojected;
// beyond hard they are rejected. Values from the numerics design notes.
inline constexpr double kMembershipHard = 1e-9;
inline constexpr double kMembershipSnap = 1e-12;

GroupElement identity(GroupId g);

// Validates (and if needed repairs) m before wrapping it.
// Throws MembershipError when the residual exceeds kMembershipHard.
GroupElement group_element(GroupId g, const Matrix& m);

GroupElement compose(const GroupElement& a, const GroupElement& b);
GroupElement invert(const GroupElement& x);

// Ad_X acting on algebra coordinates.
Vector adjoint(const GroupElement& x, const Vector& v);

enum class Frame { Body, Spatial };

// Tangent vector at `base`, stored as algebra coordinates in one of the two
// trivializations: Body coords u mean X*hat(u), Spatial coords s mean hat(s)*X.
struct TangentVector {
  GroupElement base;
  Vector coords;
  Frame frame = Frame::Body;
};

TangentVector to_frame(const TangentVector& t, Frame target);

// The embedded matrix the tangent vector represents.
Matrix ambient(const TangentVector& t);

enum class Invariance { None, Left, Right, Bi };

const char* invariance_name(Invariance inv);

// Inner product on the algebra (coordinates of the identity trivialization)
// plus the tag describing how it is transported over the group.
struct Metric {
  Matrix gram;
  Invariance invariance = Invariance::Left;
};

// Checks symmetry and positive definiteness; for Bi also spot-checks
// Ad-invariance of the gram on sampled group elements.
Metric make_metric(GroupId g, const Matrix& gram, Invariance invariance);

double metric_inner(const Metric& m, const Vector& v, const Vector& w);

}  // namespace gobs
