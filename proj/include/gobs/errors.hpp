#pragma once

#include <span>

#include "gobs/lie_core.hpp"

namespace gobs {

// Which canonical estimation error to track. Right: E = Xhat X^-1 (invariant
// under right translation of both arguments), Left: E = X^-1 Xhat.
enum class ErrorSide { Right, Left };

const char* error_side_name(ErrorSide side);

GroupElement canonical_error(ErrorSide side, const GroupElement& xhat,
                             const GroupElement& x);

// |log(a b^-1)| in algebra coordinates; +inf when the log is at the cut locus.
double group_distance(const GroupElement& a, const GroupElement& b);

// How far the error trajectory is from being frozen: max_k of the distance
// between E_k and E_0 over paired state/estimate samples. Zero (up to the
// integrator) exactly when the estimator is synchronous on that side.
double synchrony_defect(ErrorSide side, std::span<const GroupElement> xhat,
                        std::span<const GroupElement> x);

// The left-synchronous companion of Xdot = X hat(u): F(Xhat) = Xhat hat(Ad_{E_l^-1} u)
// with E_l = X^-1 Xhat. Needs the true state, so it is an analysis device,
// not an implementable observer.
TangentVector left_synchronous_field(const GroupElement& xhat,
                                     const GroupElement& x, const Vector& u);

// Mirror for Xdot = hat(v) X: F(Xhat) = hat(Ad_{E_r} v) Xhat, E_r = Xhat X^-1.
TangentVector right_synchronous_field(const GroupElement& xhat,
                                      const GroupElement& x, const Vector& v);

}  // namespace gobs
