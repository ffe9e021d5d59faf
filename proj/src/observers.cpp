#include "gobs/observers.hpp"

#include <cmath>
#include <utility>

#include "gobs/groups.hpp"

namespace gobs {

namespace {

Vector grad_body_coords(const CostFunction& cost, const Metric& metric,
                        const GroupElement& at, const GroupElement& y) {
  return to_frame(grad1(cost, metric, at, y), Frame::Body).coords;
}

void require_inputs(const GroupElement& xhat, const GroupElement& y,
                    const Vector& w) {
  if (xhat.group != y.group) {
    throw UsageError("observer field: xhat and y live in different groups");
  }
  if (w.size() != descriptor(xhat.group).dim_algebra) {
    throw UsageError("observer field: velocity dimension mismatch");
  }
}

}  // namespace

const char* observer_kind_name(ObserverKind k) {
  switch (k) {
    case ObserverKind::Synchronous: return "synchronous";
    case ObserverKind::Gradient: return "gradient";
    case ObserverKind::GradientLike: return "gradient_like";
    case ObserverKind::Custom: return "custom";
  }
  return "?";
}

TangentVector synchronous_term(Handedness h, const GroupElement& xhat,
                               const Vector& w) {
  if (w.size() != descriptor(xhat.group).dim_algebra) {
    throw UsageError("synchronous_term: velocity dimension mismatch");
  }
  return TangentVector{
      xhat, w, h == Handedness::Left ? Frame::Body : Frame::Spatial};
}

Observer synchronous_observer(Handedness h) {
  Observer obs;
  obs.kind = ObserverKind::Synchronous;
  obs.handedness = h;
  obs.field = [h](const GroupElement& xhat, const GroupElement& y,
                  const Vector& w, double) {
    require_inputs(xhat, y, w);
    return synchronous_term(h, xhat, w);
  };
  return obs;
}

Observer gradient_observer(Handedness h, CostFunction cost, Metric metric) {
  if (!cost.value) throw UsageError("gradient_observer: cost has no value");
  Observer obs;
  obs.kind = ObserverKind::Gradient;
  obs.handedness = h;
  obs.cost = std::move(cost);
  obs.metric = std::move(metric);
  const CostFunction& f = *obs.cost;
  const Metric& m = *obs.metric;
  if (h == Handedness::Left) {
    obs.field = [f, m](const GroupElement& xhat, const GroupElement& y,
                       const Vector& w, double) {
      require_inputs(xhat, y, w);
      const Vector g = to_frame(grad1(f, m, xhat, y), Frame::Body).coords;
      return TangentVector{xhat, w - g, Frame::Body};
    };
  } else {
    obs.field = [f, m](const GroupElement& xhat, const GroupElement& y,
                       const Vector& w, double) {
      require_inputs(xhat, y, w);
      const Vector g = to_frame(grad1(f, m, xhat, y), Frame::Spatial).coords;
      return TangentVector{xhat, w - g, Frame::Spatial};
    };
  }
  return obs;
}

Observer gradient_like_observer(Handedness h, CostFunction cost, Metric metric) {
  if (!cost.value) throw UsageError("gradient_like_observer: cost has no value");
  Observer obs;
  obs.kind = ObserverKind::GradientLike;
  obs.handedness = h;
  obs.cost = std::move(cost);
  obs.metric = std::move(metric);
  const CostFunction& f = *obs.cost;
  const Metric& m = *obs.metric;
  if (h == Handedness::Left) {
    // Innovation ambient form -(grad1 f(E, I)) y with E = xhat y^-1 collapses
    // to body coordinates -Ad_{y^-1} g_b(E): translate the gradient at the
    // measured error back under the right action of y.
    obs.field = [f, m](const GroupElement& xhat, const GroupElement& y,
                       const Vector& w, double) {
      require_inputs(xhat, y, w);
      const GroupElement e = compose(xhat, invert(y));
      const Vector g = grad_body_coords(f, m, e, identity(e.group));
      return TangentVector{xhat, w - adjoint(invert(y), g), Frame::Body};
    };
  } else {
    // -y (grad1 f(E, I)) with E = y^-1 xhat: body coordinates are just -g_b(E),
    // spatial ones -Ad_xhat g_b(E).
    obs.field = [f, m](const GroupElement& xhat, const GroupElement& y,
                       const Vector& w, double) {
      require_inputs(xhat, y, w);
      const GroupElement e = compose(invert(y), xhat);
      const Vector g = grad_body_coords(f, m, e, identity(e.group));
      return TangentVector{xhat, w - adjoint(xhat, g), Frame::Spatial};
    };
  }
  return obs;
}

Observer custom_observer(GroupId g, Handedness h,
                         std::function<TangentVector(const GroupElement&,
                                                     const GroupElement&,
                                                     const Vector&, double)>
                             field) {
  if (!field) throw UsageError("custom_observer: empty field");
  // Probe the field on a handful of generic points; reject anything that is
  // not a finite tangent vector attached to the queried base.
  const int n = descriptor(g).dim_algebra;
  for (int k = 0; k < 3; ++k) {
    Vector a(n), b(n), w(n);
    for (int i = 0; i < n; ++i) {
      a(i) = 0.4 * std::sin(1.0 + k + i);
      b(i) = 0.3 * std::cos(2.0 + 0.5 * k + i);
      w(i) = std::sin(0.7 * k + 0.3 * i);
    }
    const GroupElement xhat = exp_group(g, a);
    const GroupElement y = exp_group(g, b);
    const TangentVector out = field(xhat, y, w, 0.25 * k);
    if (out.base.group != g ||
        (out.base.matrix - xhat.matrix).norm() > 1e-12 ||
        out.coords.size() != n || !out.coords.allFinite()) {
      throw UsageError(
          "custom_observer: field output is not a tangent vector at xhat");
    }
  }
  Observer obs;
  obs.kind = ObserverKind::Custom;
  obs.handedness = h;
  obs.field = std::move(field);
  return obs;
}

TangentVector observer_field(const Observer& obs, const GroupElement& xhat,
                             const GroupElement& y, const Vector& w, double t) {
  if (!obs.field) throw UsageError("observer_field: observer has no field");
  return obs.field(xhat, y, w, t);
}

TangentVector innovation_of(const Observer& obs, const GroupElement& xhat,
                            const GroupElement& y, const Vector& w, double t) {
  const TangentVector full = observer_field(obs, xhat, y, w, t);
  const TangentVector sync =
      to_frame(synchronous_term(obs.handedness, xhat, w), full.frame);
  return TangentVector{xhat, full.coords - sync.coords, full.frame};
}

TangentVector error_flow_field(const CostFunction& cost, const Metric& metric,
                               const GroupElement& e) {
  const TangentVector g = grad1(cost, metric, e, identity(e.group));
  return TangentVector{e, -g.coords, g.frame};
}

TangentVector skew_error_field(const CostFunction& cost, const Metric& metric,
                               const GroupElement& e, const Vector& u) {
  if (u.size() != descriptor(e.group).dim_algebra) {
    throw UsageError("skew_error_field: input dimension mismatch");
  }
  const Vector g = grad_body_coords(cost, metric, e, identity(e.group));
  const Vector commutator = u - adjoint(invert(e), u);
  return TangentVector{e, commutator - g, Frame::Body};
}

}  // namespace gobs
