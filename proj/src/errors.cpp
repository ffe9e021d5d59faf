#include "gobs/errors.hpp"

#include <algorithm>
#include <limits>

#include "gobs/groups.hpp"

namespace gobs {

const char* error_side_name(ErrorSide side) {
  return side == ErrorSide::Right ? "right" : "left";
}

GroupElement canonical_error(ErrorSide side, const GroupElement& xhat,
                             const GroupElement& x) {
  if (xhat.group != x.group) {
    throw UsageError("canonical_error: group tags do not match");
  }
  return side == ErrorSide::Right ? compose(xhat, invert(x))
                                  : compose(invert(x), xhat);
}

double group_distance(const GroupElement& a, const GroupElement& b) {
  try {
    return log_group(compose(a, invert(b))).norm();
  } catch (const SingularityError&) {
    return std::numeric_limits<double>::infinity();
  }
}

double synchrony_defect(ErrorSide side, std::span<const GroupElement> xhat,
                        std::span<const GroupElement> x) {
  if (xhat.size() != x.size()) {
    throw UsageError("synchrony_defect: sample lists differ in length");
  }
  if (xhat.empty()) {
    throw UsageError("synchrony_defect: no samples");
  }
  const GroupElement e0 = canonical_error(side, xhat[0], x[0]);
  double defect = 0.0;
  for (size_t k = 1; k < x.size(); ++k) {
    defect = std::max(defect,
                      group_distance(canonical_error(side, xhat[k], x[k]), e0));
  }
  return defect;
}

TangentVector left_synchronous_field(const GroupElement& xhat,
                                     const GroupElement& x, const Vector& u) {
  const GroupElement e_l = canonical_error(ErrorSide::Left, xhat, x);
  return TangentVector{xhat, adjoint(invert(e_l), u), Frame::Body};
}

TangentVector right_synchronous_field(const GroupElement& xhat,
                                      const GroupElement& x, const Vector& v) {
  const GroupElement e_r = canonical_error(ErrorSide::Right, xhat, x);
  return TangentVector{xhat, adjoint(e_r, v), Frame::Spatial};
}

}  // namespace gobs
