#pragma once

#include "gobs/lie_core.hpp"

namespace gobs {

struct GroupDescriptor {
  GroupId name;
  int dim_algebra;   // 3 for so(3), 6 for se(3)
  int matrix_size;   // embedded square size
};

const GroupDescriptor& descriptor(GroupId g);

// Canonical bases. so(3): coordinates w give the usual cross-product matrix.
// se(3): coordinates (w; V), top-left block hat(w), top-right column V.
Matrix hat(GroupId g, const Vector& coords);
Vector vee(GroupId g, const Matrix& m);

// Skew part (M - M^T)/2; the projection onto so(3) used all over the costs.
Matrix skew_project(const Matrix& m);

// Closed-form exponential (Rodrigues on SO(3), rotation + left Jacobian
// on SE(3)), exact up to roundoff for any input.
GroupElement exp_group(GroupId g, const Vector& coords);

// Principal logarithm. Throws SingularityError within 1e-9 of the cut locus
// (rotation angle pi, detected as tr(R) <= -1 + 1e-9).
Vector log_group(const GroupElement& x);

// Distance of m from the embedded group: for SO(3) the Frobenius defect of
// orthonormality plus the determinant defect, for SE(3) the same on the
// rotation block plus the defect of the last row. Translation is free.
double membership_residual(GroupId g, const Matrix& m);

// Nearest group element: polar projection of the rotation block via SVD with
// determinant correction, translation kept, affine row reset.
Matrix project_to_group(GroupId g, const Matrix& m);

// Matrix of Ad_X on algebra coordinates. SO(3): R. SE(3): [[R,0],[hat(p)R,R]].
Matrix adjoint_matrix(const GroupElement& x);

// Matrix of ad_u = [hat(u), .] on algebra coordinates.
Matrix ad_matrix(GroupId g, const Vector& u);

// Lie bracket in coordinates, vee(hat(a)hat(b) - hat(b)hat(a)).
Vector bracket(GroupId g, const Vector& a, const Vector& b);

}  // namespace gobs
