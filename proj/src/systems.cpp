#include "gobs/systems.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gobs/groups.hpp"

namespace gobs {

const char* handedness_name(Handedness h) {
  return h == Handedness::Left ? "left" : "right";
}

InputSignal constant_input(const Vector& value) {
  if (value.size() == 0) throw UsageError("constant_input: empty value");
  InputSignal s;
  s.kind = InputSignal::Kind::Constant;
  s.constant = value;
  return s;
}

InputSignal sinusoid_input(const Vector& offset,
                           std::vector<std::vector<InputSignal::Term>> terms) {
  if (offset.size() == 0) throw UsageError("sinusoid_input: empty offset");
  if (terms.size() != static_cast<size_t>(offset.size())) {
    throw UsageError("sinusoid_input: need one term list per coordinate");
  }
  InputSignal s;
  s.kind = InputSignal::Kind::SinusoidSum;
  s.offset = offset;
  s.terms = std::move(terms);
  return s;
}

InputSignal piecewise_input(std::vector<std::pair<double, Vector>> pieces) {
  if (pieces.empty()) throw UsageError("piecewise_input: no pieces");
  const Eigen::Index dim = pieces.front().second.size();
  if (dim == 0) throw UsageError("piecewise_input: empty value");
  for (size_t i = 0; i < pieces.size(); ++i) {
    if (pieces[i].second.size() != dim) {
      throw UsageError("piecewise_input: inconsistent value dimensions");
    }
    if (i > 0 && !(pieces[i - 1].first < pieces[i].first)) {
      throw UsageError("piecewise_input: times must be strictly increasing");
    }
  }
  InputSignal s;
  s.kind = InputSignal::Kind::PiecewiseConstant;
  s.pieces = std::move(pieces);
  return s;
}

int input_dim(const InputSignal& s) {
  switch (s.kind) {
    case InputSignal::Kind::Constant: return static_cast<int>(s.constant.size());
    case InputSignal::Kind::SinusoidSum: return static_cast<int>(s.offset.size());
    case InputSignal::Kind::PiecewiseConstant:
      return static_cast<int>(s.pieces.front().second.size());
  }
  return 0;
}

Vector eval_input(const InputSignal& s, double t) {
  switch (s.kind) {
    case InputSignal::Kind::Constant:
      return s.constant;
    case InputSignal::Kind::SinusoidSum: {
      Vector v = s.offset;
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        for (const auto& term : s.terms[static_cast<size_t>(i)]) {
          v(i) += term.amplitude *
                  std::sin(term.angular_frequency * t + term.phase);
        }
      }
      return v;
    }
    case InputSignal::Kind::PiecewiseConstant: {
      // Last piece whose start time is <= t; before the first piece we hold
      // the first value.
      auto it = std::upper_bound(
          s.pieces.begin(), s.pieces.end(), t,
          [](double lhs, const auto& piece) { return lhs < piece.first; });
      if (it == s.pieces.begin()) return s.pieces.front().second;
      return std::prev(it)->second;
    }
  }
  throw UsageError("eval_input: unknown signal kind");
}

std::vector<double> input_breakpoints(const InputSignal& s, double t0, double t1) {
  std::vector<double> out;
  if (s.kind != InputSignal::Kind::PiecewiseConstant) return out;
  // The first piece time is not a switch: the signal holds its value there.
  for (std::size_t i = 1; i < s.pieces.size(); ++i) {
    const double t = s.pieces[i].first;
    if (t > t0 && t < t1) out.push_back(t);
  }
  return out;
}

InvariantSystem make_system(GroupId g, Handedness h, InputSignal input) {
  if (input_dim(input) != descriptor(g).dim_algebra) {
    throw UsageError("make_system: input dimension does not match " +
                     std::string(group_name(g)));
  }
  return InvariantSystem{g, h, std::move(input)};
}

TangentVector vector_field(const InvariantSystem& sys, const GroupElement& x,
                           double t) {
  if (x.group != sys.group) {
    throw UsageError("vector_field: state group does not match the system");
  }
  const Frame frame =
      sys.handedness == Handedness::Left ? Frame::Body : Frame::Spatial;
  return TangentVector{x, eval_input(sys.input, t), frame};
}

Vector convert_input(const InvariantSystem& sys, const GroupElement& x, double t) {
  const TangentVector v = vector_field(sys, x, t);
  const Frame other =
      sys.handedness == Handedness::Left ? Frame::Spatial : Frame::Body;
  return to_frame(v, other).coords;
}

}  // namespace gobs
