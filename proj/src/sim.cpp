#include "gobs/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gobs/groups.hpp"

namespace gobs {

namespace {

using Json = nlohmann::json;

}  // namespace

RateReport fit_exponential_rate(std::span<const double> times,
                                std::span<const double> values,
                                double tail_fraction) {
  if (times.size() != values.size()) {
    throw UsageError("fit_exponential_rate: times and values differ in length");
  }
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0) {
    throw UsageError("fit_exponential_rate: tail_fraction must be in (0, 1]");
  }
  if (times.size() < 2) {
    throw UsageError("fit_exponential_rate: need at least 2 samples");
  }
  const double t_end = times.back();
  const double t_start = times.front();
  const double window_start = t_end - tail_fraction * (t_end - t_start);

  std::vector<double> ts, ys;
  for (size_t i = 0; i < times.size(); ++i) {
    if (times[i] < window_start) continue;
    if (!(values[i] > 0.0)) break;  // floating floor reached: stop the window
    ts.push_back(times[i]);
    ys.push_back(std::log(values[i]));
  }
  if (ts.size() < 10) {
    throw UsageError(
        "fit_exponential_rate: fewer than 10 positive samples in the tail "
        "window; shorten the horizon or the tail fraction");
  }

  const auto n = static_cast<double>(ts.size());
  double st = 0.0, sy = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
  }
  const double mt = st / n, my = sy / n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    const double dt = ts[i] - mt, dy = ys[i] - my;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  if (stt <= 0.0) {
    throw UsageError("fit_exponential_rate: degenerate time window");
  }
  double slope = sty / stt;
  double r2 = 1.0;
  // A tail whose ln-values vary only at double rounding scale has nothing to
  // fit: report an exactly flat line instead of amplifying last-bit jitter.
  const double rounding_floor = n * 1e-28 * (1.0 + my * my);
  if (syy <= rounding_floor) {
    slope = 0.0;
  } else {
    double ss_res = 0.0;
    for (size_t i = 0; i < ts.size(); ++i) {
      const double resid = (ys[i] - my) - slope * (ts[i] - mt);
      ss_res += resid * resid;
    }
    r2 = 1.0 - ss_res / syy;
  }
  RateReport rep;
  rep.window_start = ts.front();
  rep.window_end = ts.back();
  rep.points = static_cast<int>(ts.size());
  rep.rate = -slope;
  rep.r_squared = r2;
  rep.final_value = std::exp(ys.back());
  return rep;
}

// ---------------------------------------------------------------------------
// scenario parsing

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

const Json& member(const Json& j, const std::string& where, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

void check_keys(const Json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (item.key() == a) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(where, "unknown field '" + item.key() + "'");
  }
}

double get_double(const Json& j, const std::string& where, const char* key) {
  const Json& v = member(j, where, key);
  if (!v.is_number()) fail(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

double get_double_or(const Json& j, const std::string& where, const char* key,
                     double fallback) {
  if (!j.contains(key)) return fallback;
  return get_double(j, where, key);
}

std::string get_string(const Json& j, const std::string& where, const char* key) {
  const Json& v = member(j, where, key);
  if (!v.is_string()) fail(where, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::uint64_t get_seed(const Json& j, const std::string& where, const char* key) {
  const Json& v = member(j, where, key);
  if (!v.is_number_unsigned()) {
    fail(where, std::string("'") + key + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

Vector parse_vector(const Json& j, const std::string& where, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    fail(where, "expected an array of " + std::to_string(dim) + " numbers");
  }
  Vector v(dim);
  for (int i = 0; i < dim; ++i) {
    if (!j[i].is_number()) fail(where, "entries must be numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

Matrix parse_matrix(const Json& j, const std::string& where, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    fail(where, "expected " + std::to_string(n) + " rows");
  }
  Matrix m(n, n);
  for (int r = 0; r < n; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != n) {
      fail(where, "row " + std::to_string(r) + " must have " +
                      std::to_string(n) + " entries");
    }
    for (int c = 0; c < n; ++c) {
      if (!j[r][c].is_number()) fail(where, "entries must be numbers");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

GroupId parse_group(const Json& j, const std::string& where) {
  const std::string s = j.get<std::string>();
  if (s == "SO3") return GroupId::SO3;
  if (s == "SE3") return GroupId::SE3;
  fail(where, "unknown group '" + s + "' (expected SO3 or SE3)");
}

InputSignal parse_input(const Json& j, const std::string& where, int dim) {
  check_keys(j, where, {"kind", "value", "offset", "terms", "pieces"});
  const std::string kind = get_string(j, where, "kind");
  if (kind == "constant") {
    check_keys(j, where, {"kind", "value"});
    return constant_input(parse_vector(member(j, where, "value"),
                                       where + ".value", dim));
  }
  if (kind == "sinusoid_sum") {
    check_keys(j, where, {"kind", "offset", "terms"});
    const Vector offset =
        parse_vector(member(j, where, "offset"), where + ".offset", dim);
    const Json& terms = member(j, where, "terms");
    if (!terms.is_array() || static_cast<int>(terms.size()) != dim) {
      fail(where + ".terms", "need one term list per coordinate");
    }
    std::vector<std::vector<InputSignal::Term>> parsed(terms.size());
    for (size_t i = 0; i < terms.size(); ++i) {
      if (!terms[i].is_array()) fail(where + ".terms", "each entry must be a list");
      for (const Json& tj : terms[i]) {
        const std::string tw = where + ".terms[" + std::to_string(i) + "]";
        check_keys(tj, tw, {"amplitude", "angular_frequency", "phase"});
        InputSignal::Term term;
        term.amplitude = get_double(tj, tw, "amplitude");
        term.angular_frequency = get_double(tj, tw, "angular_frequency");
        term.phase = get_double_or(tj, tw, "phase", 0.0);
        parsed[i].push_back(term);
      }
    }
    return sinusoid_input(offset, std::move(parsed));
  }
  if (kind == "piecewise_constant") {
    check_keys(j, where, {"kind", "pieces"});
    const Json& pieces = member(j, where, "pieces");
    if (!pieces.is_array() || pieces.empty()) {
      fail(where + ".pieces", "need a nonempty list");
    }
    std::vector<std::pair<double, Vector>> parsed;
    for (size_t i = 0; i < pieces.size(); ++i) {
      const std::string pw = where + ".pieces[" + std::to_string(i) + "]";
      check_keys(pieces[i], pw, {"t", "value"});
      parsed.emplace_back(get_double(pieces[i], pw, "t"),
                          parse_vector(member(pieces[i], pw, "value"),
                                       pw + ".value", dim));
    }
    try {
      return piecewise_input(std::move(parsed));
    } catch (const UsageError& e) {
      fail(where + ".pieces", e.what());
    }
  }
  fail(where, "unknown input kind '" + kind + "'");
}

GroupElement parse_element(const Json& j, const std::string& where, GroupId g) {
  check_keys(j, where, {"algebra", "matrix"});
  const bool has_alg = j.contains("algebra");
  const bool has_mat = j.contains("matrix");
  if (has_alg == has_mat) {
    fail(where, "give exactly one of 'algebra' or 'matrix'");
  }
  if (has_alg) {
    return exp_group(g, parse_vector(j["algebra"], where + ".algebra",
                                     descriptor(g).dim_algebra));
  }
  try {
    return group_element(
        g, parse_matrix(j["matrix"], where + ".matrix", descriptor(g).matrix_size));
  } catch (const MembershipError& e) {
    fail(where + ".matrix", e.what());
  }
}

CostFunction parse_cost(const Json& j, const std::string& where, GroupId g) {
  const std::string name = get_string(j, where, "name");
  if (name == "so3_frobenius") {
    if (g != GroupId::SO3) fail(where, "so3_frobenius needs group SO3");
    check_keys(j, where, {"name", "gain"});
    const double gain = get_double_or(j, where, "gain", 1.0);
    if (!(gain > 0.0)) fail(where, "gain must be > 0");
    return so3_frobenius_cost(gain);
  }
  if (name == "se3_pose") {
    if (g != GroupId::SE3) fail(where, "se3_pose needs group SE3");
    check_keys(j, where, {"name"});
    return se3_pose_cost();
  }
  fail(where, "unknown cost '" + name + "'");
}

Metric parse_metric(const Json& j, const std::string& where, GroupId g) {
  if (j.is_string()) {
    if (j.get<std::string>() == "canonical") return canonical_metric(g);
    fail(where, "the only string form is \"canonical\"");
  }
  check_keys(j, where, {"invariance", "gram"});
  const std::string inv_s = get_string(j, where, "invariance");
  Invariance inv;
  if (inv_s == "left") inv = Invariance::Left;
  else if (inv_s == "right") inv = Invariance::Right;
  else if (inv_s == "bi") inv = Invariance::Bi;
  else fail(where, "invariance must be left, right or bi");
  const Json& gram_j = member(j, where, "gram");
  Matrix gram;
  if (gram_j.is_string() && gram_j.get<std::string>() == "canonical") {
    gram = canonical_metric(g).gram;
  } else {
    gram = parse_matrix(gram_j, where + ".gram", descriptor(g).dim_algebra);
  }
  try {
    return make_metric(g, gram, inv);
  } catch (const UsageError& e) {
    fail(where, e.what());
  }
}

void parse_state_noise(const Json& j, const std::string& where, GroupId g,
                       NoiseSpec& spec) {
  check_keys(j, where, {"kind", "amplitude", "seed", "trace"});
  const std::string kind = get_string(j, where, "kind");
  if (kind == "none") {
    check_keys(j, where, {"kind"});
    return;
  }
  if (kind == "left_multiplicative") spec.state_kind = StateNoiseKind::LeftMultiplicative;
  else if (kind == "right_multiplicative") spec.state_kind = StateNoiseKind::RightMultiplicative;
  else fail(where, "kind must be none, left_multiplicative or right_multiplicative");
  const bool has_trace = j.contains("trace");
  if (has_trace) {
    check_keys(j, where, {"kind", "trace"});
    const Json& trace = j["trace"];
    if (!trace.is_array() || trace.empty()) fail(where + ".trace", "need a nonempty list");
    for (size_t i = 0; i < trace.size(); ++i) {
      spec.state_trace.push_back(parse_vector(
          trace[i], where + ".trace[" + std::to_string(i) + "]",
          descriptor(g).dim_algebra));
    }
    return;
  }
  spec.state_amplitude = get_double(j, where, "amplitude");
  if (!(spec.state_amplitude >= 0.0)) fail(where, "amplitude must be >= 0");
  spec.state_seed = get_seed(j, where, "seed");
}

void parse_input_noise(const Json& j, const std::string& where, GroupId g,
                       NoiseSpec& spec) {
  check_keys(j, where, {"kind", "amplitude", "seed", "trace"});
  const std::string kind = get_string(j, where, "kind");
  if (kind == "none") {
    check_keys(j, where, {"kind"});
    return;
  }
  if (kind != "additive") fail(where, "kind must be none or additive");
  spec.input_kind = InputNoiseKind::Additive;
  if (j.contains("trace")) {
    check_keys(j, where, {"kind", "trace"});
    const Json& trace = j["trace"];
    if (!trace.is_array() || trace.empty()) fail(where + ".trace", "need a nonempty list");
    for (size_t i = 0; i < trace.size(); ++i) {
      spec.input_trace.push_back(parse_vector(
          trace[i], where + ".trace[" + std::to_string(i) + "]",
          descriptor(g).dim_algebra));
    }
    return;
  }
  spec.input_amplitude = get_double(j, where, "amplitude");
  if (!(spec.input_amplitude >= 0.0)) fail(where, "amplitude must be >= 0");
  spec.input_seed = get_seed(j, where, "seed");
}

}  // namespace

Scenario parse_scenario(const std::string& json_text,
                        const std::string& name_hint) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  check_keys(j, "scenario",
             {"version", "name", "group", "system", "observer", "initial",
              "channel", "integrator", "horizon", "output"});
  const Json& version = member(j, "scenario", "version");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    fail("scenario.version", "this build reads schema version 1");
  }

  Scenario sc;
  sc.name = j.contains("name") ? get_string(j, "scenario", "name") : name_hint;
  if (sc.name.empty()) fail("scenario.name", "empty name");

  const GroupId g = parse_group(member(j, "scenario", "group"), "scenario.group");
  const int dim = descriptor(g).dim_algebra;

  const Json& system = member(j, "scenario", "system");
  check_keys(system, "scenario.system", {"handedness", "input"});
  const std::string hand = get_string(system, "scenario.system", "handedness");
  if (hand != "left" && hand != "right") {
    fail("scenario.system.handedness", "must be left or right");
  }
  const Handedness handedness =
      hand == "left" ? Handedness::Left : Handedness::Right;
  sc.system = make_system(
      g, handedness,
      parse_input(member(system, "scenario.system", "input"),
                  "scenario.system.input", dim));

  const Json& observer = member(j, "scenario", "observer");
  check_keys(observer, "scenario.observer", {"kind", "cost", "metric"});
  const std::string okind = get_string(observer, "scenario.observer", "kind");
  if (okind == "synchronous") {
    sc.observer_kind = ObserverKind::Synchronous;
    check_keys(observer, "scenario.observer", {"kind"});
  } else if (okind == "gradient" || okind == "gradient_like") {
    sc.observer_kind = okind == "gradient" ? ObserverKind::Gradient
                                           : ObserverKind::GradientLike;
    sc.cost = parse_cost(member(observer, "scenario.observer", "cost"),
                         "scenario.observer.cost", g);
    sc.metric = observer.contains("metric")
                    ? parse_metric(observer["metric"],
                                   "scenario.observer.metric", g)
                    : canonical_metric(g);
  } else {
    fail("scenario.observer.kind",
         "must be synchronous, gradient or gradient_like");
  }

  const Json& initial = member(j, "scenario", "initial");
  check_keys(initial, "scenario.initial", {"state", "estimate"});
  sc.initial_state = parse_element(member(initial, "scenario.initial", "state"),
                                   "scenario.initial.state", g);
  sc.initial_estimate =
      parse_element(member(initial, "scenario.initial", "estimate"),
                    "scenario.initial.estimate", g);

  if (j.contains("channel")) {
    const Json& channel = j["channel"];
    check_keys(channel, "scenario.channel", {"state_noise", "input_noise"});
    if (channel.contains("state_noise")) {
      parse_state_noise(channel["state_noise"], "scenario.channel.state_noise",
                        g, sc.noise);
    }
    if (channel.contains("input_noise")) {
      parse_input_noise(channel["input_noise"], "scenario.channel.input_noise",
                        g, sc.noise);
    }
  }

  if (j.contains("integrator")) {
    const Json& integ = j["integrator"];
    check_keys(integ, "scenario.integrator", {"scheme", "step", "reproject"});
    if (integ.contains("scheme")) {
      const std::string s = get_string(integ, "scenario.integrator", "scheme");
      if (s == "rkmk4") sc.integrator.scheme = Scheme::RKMK4;
      else if (s == "lie_euler") sc.integrator.scheme = Scheme::LieEuler;
      else fail("scenario.integrator.scheme", "must be rkmk4 or lie_euler");
    }
    sc.integrator.step =
        get_double_or(integ, "scenario.integrator", "step", sc.integrator.step);
    if (!(sc.integrator.step > 0.0)) {
      fail("scenario.integrator.step", "must be > 0");
    }
    if (integ.contains("reproject")) {
      if (!integ["reproject"].is_boolean()) {
        fail("scenario.integrator.reproject", "must be a boolean");
      }
      sc.integrator.reproject = integ["reproject"].get<bool>();
    }
  }

  sc.horizon = get_double(j, "scenario", "horizon");
  if (!(sc.horizon >= 0.0) || !std::isfinite(sc.horizon)) {
    fail("scenario.horizon", "must be a finite number >= 0");
  }

  sc.error_side = primary_error_side(handedness);
  if (j.contains("output")) {
    const Json& output = j["output"];
    check_keys(output, "scenario.output", {"error_side"});
    if (output.contains("error_side")) {
      const std::string s = get_string(output, "scenario.output", "error_side");
      if (s == "right") sc.error_side = ErrorSide::Right;
      else if (s == "left") sc.error_side = ErrorSide::Left;
      else fail("scenario.output.error_side", "must be right or left");
    }
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), std::filesystem::path(path).stem().string());
}

Observer make_observer(const Scenario& sc) {
  switch (sc.observer_kind) {
    case ObserverKind::Synchronous:
      return synchronous_observer(sc.system.handedness);
    case ObserverKind::Gradient:
      return gradient_observer(sc.system.handedness, *sc.cost, *sc.metric);
    case ObserverKind::GradientLike:
      return gradient_like_observer(sc.system.handedness, *sc.cost, *sc.metric);
    case ObserverKind::Custom:
      break;
  }
  throw UsageError("make_observer: custom observers are API-only");
}

MeasurementChannel make_channel(const Scenario& sc, std::size_t n_intervals) {
  const NoiseSpec& ns = sc.noise;
  if (ns.state_kind == StateNoiseKind::None &&
      ns.input_kind == InputNoiseKind::None) {
    return exact_channel();
  }
  if (!ns.state_trace.empty() || !ns.input_trace.empty()) {
    if (ns.state_kind != StateNoiseKind::None &&
        ns.state_trace.size() < n_intervals) {
      throw ValidationError("state noise trace has " +
                            std::to_string(ns.state_trace.size()) +
                            " entries but the grid needs " +
                            std::to_string(n_intervals));
    }
    if (ns.input_kind != InputNoiseKind::None &&
        ns.input_trace.size() < n_intervals) {
      throw ValidationError("input noise trace has " +
                            std::to_string(ns.input_trace.size()) +
                            " entries but the grid needs " +
                            std::to_string(n_intervals));
    }
    // Mixed explicit/sampled channels are not a thing: a trace on one source
    // forces a trace (or silence) on the other.
    if ((ns.state_kind != StateNoiseKind::None && ns.state_trace.empty()) ||
        (ns.input_kind != InputNoiseKind::None && ns.input_trace.empty())) {
      throw ValidationError(
          "give explicit traces for every active noise source or none");
    }
    return trace_channel(sc.system.group, ns.state_kind, ns.state_trace,
                         ns.input_kind, ns.input_trace);
  }
  MeasurementChannel ch;
  if (ns.state_kind != StateNoiseKind::None &&
      ns.input_kind != InputNoiseKind::None) {
    // Two independent streams; seeds may coincide, that is the caller's call.
    MeasurementChannel st = sampled_channel(
        sc.system.group, ns.state_kind, ns.state_amplitude, ns.state_seed,
        InputNoiseKind::None, 0.0, 0, n_intervals);
    MeasurementChannel in = sampled_channel(
        sc.system.group, StateNoiseKind::None, 0.0, 0, ns.input_kind,
        ns.input_amplitude, ns.input_seed, n_intervals);
    ch = std::move(st);
    ch.input_kind = in.input_kind;
    ch.input_coords = std::move(in.input_coords);
    return ch;
  }
  return sampled_channel(sc.system.group, ns.state_kind, ns.state_amplitude,
                         ns.state_seed, ns.input_kind, ns.input_amplitude,
                         ns.input_seed, n_intervals);
}

// ---------------------------------------------------------------------------
// outputs

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Json json_finite(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;  // inf/nan have no JSON literal; null marks "off the chart"
}

void write_matrix_row(std::ostream& os, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      os << ',' << fmt17(m(r, c));
    }
  }
}

// Ambient matrix of grad1 f(e, at) for the noisy-error-field prediction.
Matrix grad_ambient(const CostFunction& f, const Metric& m,
                    const GroupElement& e, const GroupElement& at) {
  return ambient(grad1(f, m, e, at));
}

// Predicted d/dt of the canonical error under held per-interval noise, as an
// ambient matrix at E. Covers gradient observers (matching invariance) and
// gradient-like observers (any cost). Returns false when no closed form
// applies to this observer/noise combination.
bool predicted_error_derivative(const Scenario& sc, const Observer& obs,
                                const MeasurementChannel& ch, std::size_t k,
                                const GroupElement& x, const GroupElement& xhat,
                                Matrix& out) {
  const GroupId g = sc.system.group;
  const ErrorSide side = primary_error_side(sc.system.handedness);
  if (!obs.cost || !obs.metric) return false;
  const Vector delta = input_noise_coords(ch, k, g);
  const Vector eta = state_noise_coords(ch, k, g);
  const GroupElement n = exp_group(g, eta);
  const GroupElement e = canonical_error(side, xhat, x);
  const GroupElement id = identity(g);

  if (obs.kind == ObserverKind::Gradient) {
    const bool left = sc.system.handedness == Handedness::Left;
    // The collapse grad f(xhat, N x) -> grad f(E, N) needs the cost and the
    // metric to be invariant on the translation side.
    const Invariance want = left ? Invariance::Right : Invariance::Left;
    auto fits = [&](Invariance inv) {
      return inv == want || inv == Invariance::Bi;
    };
    if (!fits(obs.cost->invariance) || !fits(obs.metric->invariance)) {
      return false;
    }
    if (left) {
      if (ch.state_kind == StateNoiseKind::RightMultiplicative) return false;
      // Edot_r = hat(Ad_xhat delta) E_r - grad1 f(E_r, N_l)
      out = hat(g, adjoint(xhat, delta)) * e.matrix -
            grad_ambient(*obs.cost, *obs.metric, e, n);
    } else {
      if (ch.state_kind == StateNoiseKind::LeftMultiplicative) return false;
      // Edot_l = hat(Ad_{x^-1} delta) E_l - grad1 f(E_l, N_r)
      out = hat(g, adjoint(invert(x), delta)) * e.matrix -
            grad_ambient(*obs.cost, *obs.metric, e, n);
    }
    return true;
  }

  if (obs.kind == ObserverKind::GradientLike) {
    if (sc.system.handedness == Handedness::Left) {
      // Noise enters through M = N_l (left mult) or x N_r x^-1 (right mult):
      // Edot_r = hat(Ad_xhat delta) E_r - grad1 f(E_r M^-1, I) M
      GroupElement m_elem = id;
      if (ch.state_kind == StateNoiseKind::LeftMultiplicative) {
        m_elem = n;
      } else if (ch.state_kind == StateNoiseKind::RightMultiplicative) {
        m_elem = compose(compose(x, n), invert(x));
      }
      const GroupElement arg = compose(e, invert(m_elem));
      out = hat(g, adjoint(xhat, delta)) * e.matrix -
            grad_ambient(*obs.cost, *obs.metric, arg, id) * m_elem.matrix;
    } else {
      // Mirror: M = x^-1 N_l x or N_r;
      // Edot_l = hat(Ad_{x^-1} delta) E_l - M grad1 f(M^-1 E_l, I)
      GroupElement m_elem = id;
      if (ch.state_kind == StateNoiseKind::LeftMultiplicative) {
        m_elem = compose(compose(invert(x), n), x);
      } else if (ch.state_kind == StateNoiseKind::RightMultiplicative) {
        m_elem = n;
      }
      const GroupElement arg = compose(invert(m_elem), e);
      out = hat(g, adjoint(invert(x), delta)) * e.matrix -
            m_elem.matrix * grad_ambient(*obs.cost, *obs.metric, arg, id);
    }
    return true;
  }
  return false;
}

}  // namespace

RunArtifacts run_scenario(const Scenario& sc, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const Observer obs = make_observer(sc);
  const std::vector<double> grid =
      build_grid(0.0, sc.horizon, sc.integrator.step,
                 input_breakpoints(sc.system.input, 0.0, sc.horizon));
  const std::size_t n_intervals = grid.size() > 1 ? grid.size() - 1 : 1;
  const MeasurementChannel ch = make_channel(sc, n_intervals);

  const SimResult sim =
      simulate_coupled(sc.system, obs, ch, sc.initial_state,
                       sc.initial_estimate, sc.integrator, 0.0, sc.horizon);

  // Column cost: the observer's when it has one, else the group's canonical
  // cost as a pure diagnostic.
  const bool diagnostic_cost = !sc.cost.has_value();
  const CostFunction cost =
      sc.cost ? *sc.cost
              : (sc.system.group == GroupId::SO3 ? so3_frobenius_cost(1.0)
                                                 : se3_pose_cost());
  const GroupElement id = identity(sc.system.group);

  fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw UsageError("cannot create output directory " + dir.string() + ": " +
                     ec.message());
  }

  RunArtifacts art;
  art.csv_path = (dir / (sc.name + ".csv")).string();
  art.diagnostics_path = (dir / (sc.name + ".diag.json")).string();

  const std::size_t npts = grid.size();
  std::vector<double> cost_trace(npts);
  std::vector<double> res_truth(npts), res_est(npts);
  for (std::size_t i = 0; i < npts; ++i) {
    const GroupElement e =
        canonical_error(sc.error_side, sim.estimate.states[i], sim.truth.states[i]);
    cost_trace[i] = eval_cost(cost, e, id);
    res_truth[i] =
        membership_residual(sc.system.group, sim.truth.states[i].matrix);
    res_est[i] =
        membership_residual(sc.system.group, sim.estimate.states[i].matrix);
  }

  {
    std::ofstream csv(art.csv_path);
    if (!csv) throw UsageError("cannot write " + art.csv_path);
    const int n = descriptor(sc.system.group).matrix_size;
    csv << "t";
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) csv << ",x_" << r << c;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) csv << ",xhat_" << r << c;
    csv << ",f,res_x,res_xhat\n";
    for (std::size_t i = 0; i < npts; ++i) {
      csv << fmt17(grid[i]);
      write_matrix_row(csv, sim.truth.states[i].matrix);
      write_matrix_row(csv, sim.estimate.states[i].matrix);
      csv << ',' << fmt17(cost_trace[i]) << ',' << fmt17(res_truth[i]) << ','
          << fmt17(res_est[i]) << '\n';
    }
  }

  // Diagnostics. The violation count ignores increases at rounding scale
  // (<= 1e-12) so constant-cost runs report zero; the raw maximum increase is
  // reported alongside.
  int violations = 0;
  double max_increase = 0.0;
  for (std::size_t i = 1; i < npts; ++i) {
    const double inc = cost_trace[i] - cost_trace[i - 1];
    max_increase = std::max(max_increase, inc);
    if (inc > 1e-12) ++violations;
  }
  max_increase = std::max(max_increase, 0.0);
  const double defect_r = synchrony_defect(ErrorSide::Right, sim.estimate.states,
                                           sim.truth.states);
  const double defect_l = synchrony_defect(ErrorSide::Left, sim.estimate.states,
                                           sim.truth.states);

  Json diag;
  diag["scenario"] = sc.name;
  diag["group"] = group_name(sc.system.group);
  diag["handedness"] = handedness_name(sc.system.handedness);
  diag["observer"] = observer_kind_name(sc.observer_kind);
  diag["scheme"] = scheme_name(sc.integrator.scheme);
  diag["step"] = sc.integrator.step;
  diag["horizon"] = sc.horizon;
  diag["grid_points"] = npts;
  diag["error_side"] = error_side_name(sc.error_side);
  diag["cost_name"] = cost.name;
  diag["cost_is_diagnostic_default"] = diagnostic_cost;
  diag["initial_cost"] = json_finite(cost_trace.front());
  diag["final_cost"] = json_finite(cost_trace.back());
  diag["monotonicity_violations"] = violations;
  diag["max_cost_increase"] = json_finite(max_increase);
  diag["synchrony_defect"] = {{"right", json_finite(defect_r)},
                              {"left", json_finite(defect_l)}};
  diag["membership"] = {
      {"max_residual_truth",
       json_finite(*std::max_element(res_truth.begin(), res_truth.end()))},
      {"max_residual_estimate",
       json_finite(*std::max_element(res_est.begin(), res_est.end()))}};

  try {
    const RateReport rep = fit_exponential_rate(grid, cost_trace, 0.5);
    diag["rate"] = {{"window_start", rep.window_start},
                    {"window_end", rep.window_end},
                    {"points", rep.points},
                    {"rate", json_finite(rep.rate)},
                    {"r_squared", json_finite(rep.r_squared)},
                    {"final_value", json_finite(rep.final_value)}};
  } catch (const UsageError&) {
    diag["rate"] = nullptr;  // trace too short or already on the floor
  }

  if (channel_is_exact(ch)) {
    diag["noise"] = nullptr;
  } else {
    Json noise;
    noise["state_kind"] =
        ch.state_kind == StateNoiseKind::None ? "none"
        : ch.state_kind == StateNoiseKind::LeftMultiplicative
            ? "left_multiplicative"
            : "right_multiplicative";
    noise["input_kind"] =
        ch.input_kind == InputNoiseKind::None ? "none" : "additive";

    // Residual of the predicted noisy error field against the forward
    // difference of the recorded error, per interval.
    Matrix predicted;
    double max_resid = 0.0, sum_resid = 0.0;
    std::size_t count = 0;
    bool have_formula = true;
    for (std::size_t k = 0; k + 1 < npts && have_formula; ++k) {
      have_formula = predicted_error_derivative(
          sc, obs, ch, k, sim.truth.states[k], sim.estimate.states[k], predicted);
      if (!have_formula) break;
      const ErrorSide side = primary_error_side(sc.system.handedness);
      const GroupElement e0 =
          canonical_error(side, sim.estimate.states[k], sim.truth.states[k]);
      const GroupElement e1 = canonical_error(side, sim.estimate.states[k + 1],
                                              sim.truth.states[k + 1]);
      const double h = grid[k + 1] - grid[k];
      const double resid =
          ((e1.matrix - e0.matrix) / h - predicted).norm();
      max_resid = std::max(max_resid, resid);
      sum_resid += resid;
      ++count;
    }
    if (count > 0 && have_formula) {
      noise["error_field_residual"] = {
          {"max", json_finite(max_resid)},
          {"mean", json_finite(sum_resid / static_cast<double>(count))},
          {"intervals", count}};
    } else {
      noise["error_field_residual"] = nullptr;
    }
    diag["noise"] = noise;

    // Dump the traces so the run can be replayed with explicit noise.
    art.noise_path = (dir / (sc.name + ".noise.json")).string();
    Json dump;
    dump["state_kind"] = noise["state_kind"];
    dump["input_kind"] = noise["input_kind"];
    Json st = Json::array();
    for (const Vector& v : ch.state_coords) {
      Json row = Json::array();
      for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v(i));
      st.push_back(row);
    }
    Json it = Json::array();
    for (const Vector& v : ch.input_coords) {
      Json row = Json::array();
      for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v(i));
      it.push_back(row);
    }
    dump["state_trace"] = st;
    dump["input_trace"] = it;
    std::ofstream nf(art.noise_path);
    if (!nf) throw UsageError("cannot write " + art.noise_path);
    nf << dump.dump(1) << '\n';
  }

  std::ofstream df(art.diagnostics_path);
  if (!df) throw UsageError("cannot write " + art.diagnostics_path);
  df << diag.dump(1) << '\n';
  return art;
}

int run_scenario_file(const std::string& path, const std::string& out_dir,
                      std::string& err, RunArtifacts* artifacts) {
  try {
    const Scenario sc = load_scenario(path);
    const RunArtifacts art = run_scenario(sc, out_dir);
    if (artifacts) *artifacts = art;
    return 0;
  } catch (const DivergenceError& e) {
    err = std::string("divergence: ") + e.what();
    return 3;
  } catch (const ValidationError& e) {
    err = std::string("invalid scenario: ") + e.what();
    return 2;
  } catch (const std::exception& e) {
    err = e.what();
    return 2;
  }
}

std::pair<std::vector<double>, std::vector<double>> read_cost_trace(
    const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw UsageError("cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw UsageError(csv_path + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  long t_col = -1, f_col = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "t") t_col = static_cast<long>(i);
    if (header[i] == "f") f_col = static_cast<long>(i);
  }
  if (t_col < 0 || f_col < 0) {
    throw UsageError(csv_path + ": need 't' and 'f' columns");
  }
  std::vector<double> ts, fs;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    long col = 0;
    double tv = 0.0, fv = 0.0;
    long seen = 0;
    while (std::getline(ss, cell, ',')) {
      if (col == t_col || col == f_col) {
        try {
          const double v = std::stod(cell);
          if (col == t_col) tv = v;
          else fv = v;
        } catch (const std::exception&) {
          throw UsageError(csv_path + ":" + std::to_string(line_no) +
                           ": malformed number '" + cell + "'");
        }
        ++seen;
      }
      ++col;
    }
    if (seen != 2) {
      throw UsageError(csv_path + ":" + std::to_string(line_no) +
                       ": row too short");
    }
    ts.push_back(tv);
    fs.push_back(fv);
  }
  return {std::move(ts), std::move(fs)};
}

}  // namespace gobs
