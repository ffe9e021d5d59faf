#pragma once

#include <functional>
#include <optional>

#include "gobs/costs.hpp"
#include "gobs/errors.hpp"
#include "gobs/systems.hpp"

namespace gobs {

enum class ObserverKind { Synchronous, Gradient, GradientLike, Custom };

const char* observer_kind_name(ObserverKind k);

// Estimator xhatdot = field(xhat, y, w, t) driven by the measured state y and
// measured velocity w. All shipped fields split as internal model + innovation,
// with the innovation depending on (xhat, y) only.
struct Observer {
  ObserverKind kind = ObserverKind::Synchronous;
  Handedness handedness = Handedness::Left;
  std::optional<CostFunction> cost;
  std::optional<Metric> metric;
  std::function<TangentVector(const GroupElement& xhat, const GroupElement& y,
                              const Vector& w, double t)>
      field;
};

// Internal model alone: xhatdot = xhat hat(w) (Left) or hat(w) xhat (Right).
// Freezes the canonical error of the matching side.
TangentVector synchronous_term(Handedness h, const GroupElement& xhat,
                               const Vector& w);

Observer synchronous_observer(Handedness h);

// xhatdot = xhat hat(w) - grad1 f(xhat, y) (Left), mirrored for Right.
Observer gradient_observer(Handedness h, CostFunction cost, Metric metric);

// Gradient-like: the innovation is the gradient of the error cost
// E -> f(E, I) evaluated at the measured error, translated back to xhat:
//   Left:  xhatdot = xhat hat(w) - (grad1 f(xhat y^-1, I)) y
//   Right: xhatdot = hat(w) xhat - y (grad1 f(y^-1 xhat, I))
// Coincides with the gradient observer when cost and metric invariance match
// the translation side; otherwise it is the implementable fallback.
Observer gradient_like_observer(Handedness h, CostFunction cost, Metric metric);

// Wraps a user field after probing it on sample points: the returned tangent
// must sit at the queried base point with finite coordinates of the right
// dimension (the tangency condition an estimator field has to satisfy).
Observer custom_observer(GroupId g, Handedness h,
                         std::function<TangentVector(const GroupElement&,
                                                     const GroupElement&,
                                                     const Vector&, double)>
                             field);

// Evaluate the observer field; validates argument groups and dimensions.
TangentVector observer_field(const Observer& obs, const GroupElement& xhat,
                             const GroupElement& y, const Vector& w, double t);

// field minus the internal-model term, in the field's frame. Zero exactly for
// synchronous observers; independent of w for every shipped kind.
TangentVector innovation_of(const Observer& obs, const GroupElement& xhat,
                            const GroupElement& y, const Vector& w, double t);

// Autonomous flow the invariant error obeys under a matching gradient
// observer: Edot = -grad1 f(E, I).
TangentVector error_flow_field(const CostFunction& cost, const Metric& metric,
                               const GroupElement& e);

// Error flow when cost/metric invariance and observer side do not match:
// Edot = (E hat(u) - hat(u) E) - grad1 f(E, I), input-dependent through the
// commutator. u is the system input in the frame of its handedness.
TangentVector skew_error_field(const CostFunction& cost, const Metric& metric,
                               const GroupElement& e, const Vector& u);

}  // namespace gobs
