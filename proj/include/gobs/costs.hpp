#pragma once

#include <functional>
#include <string>

#include "gobs/lie_core.hpp"

namespace gobs {

// Two-argument cost f(xhat, y) >= 0 with f(y, y) = 0. The optional
// body_diff1 is the differential in the first slot as a body-frame covector:
// body_diff1(xhat, y) . u = d/ds f(xhat exp(s hat(u)), y) at s = 0.
// Gradients fall back to finite differences when it is absent.
struct CostFunction {
  std::string name;
  Invariance invariance = Invariance::None;
  bool morse_bott = false;  // nondegenerate over the zero set (claimed, not checked)
  std::function<double(const GroupElement&, const GroupElement&)> value;
  std::function<Vector(const GroupElement&, const GroupElement&)> body_diff1;
};

double eval_cost(const CostFunction& f, const GroupElement& xhat,
                 const GroupElement& y);

// f(xhat, y) = g(xhat y^-1) for a one-argument error cost g with g(I) = 0.
// Right invariant by construction. If g ships a body-frame covector dg the
// lift gets a closed-form differential too (chain rule through Ad_y).
CostFunction lift_right_invariant(
    GroupId g, std::string name,
    std::function<double(const GroupElement&)> error_cost,
    std::function<Vector(const GroupElement&)> error_cost_diff = nullptr,
    bool morse_bott = false);

// f~(xhat, y) = f(xhat^-1, y^-1). Swaps Left and Right invariance and turns
// right gradient observers into left ones; minima mirror along inversion.
CostFunction mirror_invariance(const CostFunction& f);

// k/2 |R - Y|_F^2 on SO(3). Bi-invariant, Morse-Bott, global minimum at R = Y.
CostFunction so3_frobenius_cost(double gain);

// 1/2 |R - Y|_F^2 + 1/2 |p - R Y^T y|^2 on SE(3) for measurements (Y, y).
// Right invariant; equals g(xhat y^-1) with g(R, p) = 1/2 |R - I|^2 + 1/2 |p|^2.
CostFunction se3_pose_cost();

// The metric each shipped cost was designed against: 2*I (Bi) on so(3),
// diag(2,2,2,1,1,1) (Right) on se(3).
Metric canonical_metric(GroupId g);

// Riemannian gradient in the first argument. Uses the closed-form
// differential when present, otherwise central differences with step eps.
// The result frame matches the metric: Body for Left/Bi, Spatial for Right.
TangentVector grad1(const CostFunction& f, const Metric& m,
                    const GroupElement& xhat, const GroupElement& y,
                    double eps = 1e-5);

// Finite-difference gradient, always available. Same frame convention.
TangentVector fd_grad1(const CostFunction& f, const Metric& m,
                       const GroupElement& xhat, const GroupElement& y,
                       double eps = 1e-5);

}  // namespace gobs
