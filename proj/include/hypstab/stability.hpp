#pragma once

// Binary64 probes of the representation radius of each model and of how a
// single gradient step near the boundary survives rounding. Every expected
// value is computed from a closed-form expansion, never typed in.

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hypstab/geometry.hpp"
#include "hypstab/optim.hpp"
#include "json.hpp"

namespace hypstab {

struct ProbeValue {
  std::string name;
  double measured = 0.0;
  std::optional<double> expected;
};

struct ProbeReport {
  std::string probe;
  double k = std::numeric_limits<double>::quiet_NaN();
  std::vector<ProbeValue> values;
  bool passed = false;
  std::string notes;

  void add(std::string name, double measured, std::optional<double> expected = std::nullopt) {
    values.push_back({std::move(name), measured, expected});
  }

  /// Measured value by name; throws std::out_of_range if absent.
  double get(const std::string& name) const {
    for (const auto& v : values) {
      if (v.name == name) return v.measured;
    }
    throw std::out_of_range("ProbeReport: no value named " + name);
  }
};

inline nlohmann::ordered_json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline nlohmann::ordered_json to_json(const ProbeReport& r) {
  nlohmann::ordered_json j;
  j["probe"] = r.probe;
  j["k"] = finite_or_null(r.k);
  auto& vals = j["values"] = nlohmann::ordered_json::array();
  for (const auto& v : r.values) {
    nlohmann::ordered_json e;
    e["name"] = v.name;
    e["measured"] = finite_or_null(v.measured);
    e["expected"] = v.expected ? finite_or_null(*v.expected) : nlohmann::ordered_json(nullptr);
    vals.push_back(std::move(e));
  }
  j["verdict"] = r.passed ? "pass" : "fail";
  j["notes"] = r.notes;
  return j;
}

inline std::string to_table(const std::vector<ProbeReport>& reports) {
  std::ostringstream os;
  os << std::setprecision(10);
  for (const auto& r : reports) {
    os << "[" << (r.passed ? "PASS" : "FAIL") << "] " << r.probe;
    if (std::isfinite(r.k)) os << " (k=" << r.k << ")";
    os << "\n";
    for (const auto& v : r.values) {
      os << "    " << std::left << std::setw(34) << v.name << std::right << std::setw(20) << v.measured;
      if (v.expected) os << "   expected " << *v.expected;
      os << "\n";
    }
    if (!r.notes.empty()) os << "    note: " << r.notes << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Radius formulas

struct RadiusEstimate {
  double exact = 0.0;    ///< closed-form distance from the origin
  double leading = 0.0;  ///< ln(10) k + ln 2
  double gap = 0.0;      ///< exact - leading, evaluated without cancellation
};

/// d(0, x) on the ball for |x| = 1 - 10^-k.
inline RadiusEstimate poincare_radius(double k) {
  const double delta = std::pow(10.0, -k);
  RadiusEstimate r;
  r.exact = std::log(2.0 - delta) - std::log(delta);
  r.leading = std::log(10.0) * k + std::log(2.0);
  r.gap = std::log1p(-0.5 * delta);
  return r;
}

/// d(0, x) on the hyperboloid for x0 = 10^k.
inline RadiusEstimate lorentz_radius(double k) {
  const double x0 = std::pow(10.0, k);
  const double u = std::pow(10.0, -2.0 * k);
  RadiusEstimate r;
  r.exact = std::acosh(x0);
  r.leading = std::log(10.0) * k + std::log(2.0);
  // ln((1 + sqrt(1 - u)) / 2) with sqrt(1 - u) - 1 = -u / (1 + sqrt(1 - u))
  r.gap = std::log1p(-u / (2.0 * (1.0 + std::sqrt(1.0 - u))));
  return r;
}

/// Empirical decay order p of |gap(k)| ~ 10^{-p k} between k1 and k2.
inline double gap_order(double gap_k1, double gap_k2, double k1, double k2) {
  return -std::log10(std::abs(gap_k2) / std::abs(gap_k1)) / (k2 - k1);
}

inline ProbeReport probe_radius(double k) {
  ProbeReport rep;
  rep.probe = "radius";
  rep.k = k;
  const RadiusEstimate p = poincare_radius(k);
  const RadiusEstimate l = lorentz_radius(k);
  rep.add("poincare_exact", p.exact);
  rep.add("poincare_leading", p.leading);
  rep.add("poincare_gap", p.gap, -0.5 * std::pow(10.0, -k));
  rep.add("lorentz_exact", l.exact);
  rep.add("lorentz_leading", l.leading);
  rep.add("lorentz_gap", l.gap, -0.25 * std::pow(10.0, -2.0 * k));

  double worst_p = 0.0;
  double worst_l = 0.0;
  const double ks[] = {2.0, 4.0, 6.0};
  for (int i = 0; i + 1 < 3; ++i) {
    const double op = gap_order(poincare_radius(ks[i]).gap, poincare_radius(ks[i + 1]).gap, ks[i], ks[i + 1]);
    const double ol = gap_order(lorentz_radius(ks[i]).gap, lorentz_radius(ks[i + 1]).gap, ks[i], ks[i + 1]);
    worst_p = std::max(worst_p, std::abs(op - 1.0));
    worst_l = std::max(worst_l, std::abs(ol - 2.0));
    rep.add("poincare_gap_order_k" + std::to_string(int(ks[i])), op, 1.0);
    rep.add("lorentz_gap_order_k" + std::to_string(int(ks[i])), ol, 2.0);
  }
  const bool bounds = std::abs(p.gap) <= std::pow(10.0, -k) && std::abs(l.gap) <= std::pow(10.0, -2.0 * k);
  rep.passed = bounds && worst_p <= 0.1 && worst_l <= 0.1;
  rep.notes = "gap = exact - (ln(10) k + ln 2); orders fitted over k in {2,4,6}";
  return rep;
}

// ---------------------------------------------------------------------------
// Boundary and constraint probes

/// Largest integer k with fl(1 - 10^-k) != 1.
inline int max_distinguishable_k(int k_max = 40) {
  int best = 0;
  for (int k = 1; k <= k_max; ++k) {
    volatile double delta = std::pow(10.0, -k);
    volatile double x = 1.0 - delta;
    if (x != 1.0) best = k;
  }
  return best;
}

/// Smallest binary64 t > 0 with pred(t) true, for pred monotone on [lo, hi].
template <typename Pred>
double first_true(Pred pred, double lo, double hi) {
  while (true) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid)) hi = mid; else lo = mid;
  }
  return hi;
}

inline ProbeReport probe_poincare_boundary() {
  ProbeReport rep;
  rep.probe = "boundary";
  const int measured = max_distinguishable_k();
  // fl(1 - d) != 1 iff d exceeds half the spacing below 1, i.e. 2^-(digits+1).
  const int expected =
      static_cast<int>(std::floor((std::numeric_limits<double>::digits + 1) * std::log10(2.0)));
  rep.k = measured;
  rep.add("max_k", measured, expected);
  const double x = 1.0 - std::pow(10.0, -measured);
  rep.add("radius_at_max_k", dist_poincare(PoincarePoint::origin(1), PoincarePoint({x})),
          poincare_radius(measured).exact);
  const double tanh_one = first_true([](double t) { return std::tanh(t) == 1.0; }, 0.0, 100.0);
  const double cosh_eq_sinh = first_true([](double t) { return std::cosh(t) == std::sinh(t); }, 0.0, 100.0);
  rep.add("tanh_saturation_t", tanh_one);
  rep.add("exp0_poincare_radius", 2.0 * tanh_one);
  rep.add("cosh_equals_sinh_t", cosh_eq_sinh);
  rep.passed = measured == expected;
  rep.notes = "saturation thresholds are measured from this platform's libm";
  return rep;
}

/// [x,x] in binary64 for x = (10^k, sqrt(10^{2k} - 1), 0).
inline double lorentz_self_product(double k) {
  const double x0 = std::pow(10.0, k);
  const double x1 = std::sqrt(x0 * x0 - 1.0);
  const double x[] = {x0, x1, 0.0};
  return minkowski_product(x, x);
}

inline ProbeReport probe_lorentz_constraint(double k) {
  ProbeReport rep;
  rep.probe = "constraint";
  rep.k = k;
  const double x0 = std::pow(10.0, k);
  const double q = lorentz_self_product(k);
  const double eps = std::numeric_limits<double>::epsilon();
  // x0^2 - 1 collapses onto x0^2 once the unit falls below half an ulp of x0^2.
  const bool collapse = x0 * x0 * eps / 2.0 >= 1.0;
  rep.add("self_product", q, collapse ? 0.0 : -1.0);
  rep.add("rounding_scale", 2.0 * x0 * x0 * eps);
  rep.passed = std::abs(q + 1.0) <= 2.0 * x0 * x0 * eps && (!collapse || q == 0.0);
  rep.notes = collapse ? "x0^2 + 1 rounds to x0^2; the constraint is unverifiable"
                       : "constraint still resolvable in binary64";
  return rep;
}

// ---------------------------------------------------------------------------
// One step near the boundary in all three charts

struct ChartStep {
  double start = 0.0;
  double end = 0.0;
  double displacement = 0.0;
  double prediction = 0.0;
  double residual = 0.0;
  double bound = 0.0;
  bool lost_to_rounding = false;
};

struct OneStepResult {
  double k = 0.0;
  double delta = 0.0;  ///< 1 - fl(1 - 10^-k), the boundary gap actually represented
  double eta = 0.0;
  double grad_norm = 0.0;
  ChartStep poincare;  ///< first ball coordinate
  ChartStep lorentz;   ///< time coordinate
  ChartStep param;     ///< first parameter coordinate
  double param_leading_residual = 0.0;  ///< end - ln(2/delta)
  double travelled_poincare = 0.0;
  double travelled_lorentz = 0.0;
  double travelled_param = 0.0;
  /// max relative disagreement of the three travelled distances
  double consistency = 0.0;
};

/// One step from x = (1 - 10^-k, 0) with grad f(x) = (-E, 0) in every chart.
inline OneStepResult one_step_comparison(double k, double eta, double E) {
  require_step_size(eta);
  const double eps = std::numeric_limits<double>::epsilon();
  OneStepResult r;
  r.k = k;
  r.eta = eta;
  r.grad_norm = std::abs(E);
  const PoincarePoint x({1.0 - std::pow(10.0, -k), 0.0});
  const double delta = 1.0 - x.coords()[0];
  r.delta = delta;
  const Objective f = linear_objective({-E, 0.0});
  const double etaE = eta * std::abs(E);

  const PoincarePoint x_new = rsgd_step(x, f, eta);
  r.poincare.start = x.coords()[0];
  r.poincare.end = x_new.coords()[0];
  r.poincare.prediction = r.poincare.start;
  r.poincare.bound = 2.0 * etaE * delta * delta + 2.0 * eps;

  const LorentzPoint y = poincare_to_lorentz(x);
  const LorentzPoint y_new = rsgd_step(y, f, eta);
  r.lorentz.start = y.time();
  r.lorentz.end = y_new.time();
  r.lorentz.prediction = 1.0 / delta - 0.5 + etaE;
  r.lorentz.bound = 2.0 * (1.0 + etaE) * delta + 8.0 * eps / (delta * delta);

  const EuclideanParam z = param_from_poincare(x);
  const EuclideanParam z_new = euclid_step(z, f, eta);
  r.param.start = z.z[0];
  r.param.end = z_new.z[0];
  const double leading = std::log(2.0 / delta);
  r.param.prediction = leading + (etaE - 0.5) * delta;
  r.param.bound = 2.0 * (1.0 + etaE) * delta * delta + 8.0 * eps * std::abs(r.param.end);
  r.param_leading_residual = r.param.end - leading;

  for (ChartStep* s : {&r.poincare, &r.lorentz, &r.param}) {
    s->displacement = s->end - s->start;
    s->residual = s->end - s->prediction;
    s->lost_to_rounding = s->displacement == 0.0;
  }

  r.travelled_poincare = dist_poincare(x, x_new);
  r.travelled_lorentz = dist_lorentz(y, y_new);
  r.travelled_param = norm(subtract(z_new.z, z.z));
  const double ref = std::max({r.travelled_poincare, r.travelled_lorentz, r.travelled_param});
  if (ref > 0.0) {
    const double lo = std::min({r.travelled_poincare, r.travelled_lorentz, r.travelled_param});
    r.consistency = (ref - lo) / ref;
  }
  return r;
}

inline ProbeReport probe_one_step(double k, double eta, double E) {
  const OneStepResult r = one_step_comparison(k, eta, E);
  ProbeReport rep;
  rep.probe = "one-step";
  rep.k = k;
  rep.add("delta", r.delta, std::pow(10.0, -k));
  rep.add("eta", r.eta);
  rep.add("grad_norm", r.grad_norm);
  const auto emit = [&rep](const std::string& name, const ChartStep& s) {
    rep.add(name + "_start", s.start);
    rep.add(name + "_end", s.end, s.prediction);
    rep.add(name + "_displacement", s.displacement);
    rep.add(name + "_residual", s.residual);
    rep.add(name + "_residual_bound", s.bound);
    rep.add(name + "_lost_to_rounding", s.lost_to_rounding ? 1.0 : 0.0);
  };
  emit("poincare", r.poincare);
  emit("lorentz", r.lorentz);
  emit("param", r.param);
  rep.add("param_leading_residual", r.param_leading_residual);
  rep.add("travelled_poincare", r.travelled_poincare);
  rep.add("travelled_lorentz", r.travelled_lorentz);
  rep.add("travelled_param", r.travelled_param);
  rep.passed = std::abs(r.poincare.residual) <= r.poincare.bound &&
               std::abs(r.lorentz.residual) <= r.lorentz.bound &&
               std::abs(r.param.residual) <= r.param.bound;
  std::ostringstream notes;
  notes << "poincare step " << (r.poincare.lost_to_rounding ? "lost to rounding" : "survived")
        << " (" << r.poincare.displacement / (0.5 * std::numeric_limits<double>::epsilon())
        << " ulp of the spacing below 1)";
  rep.notes = notes.str();
  return rep;
}

// ---------------------------------------------------------------------------
// Gradient-norm scaling near the boundary

struct ScalingRow {
  double delta = 0.0;
  double euclid_norm = 0.0;    ///< |grad f(x)|
  double poincare_norm = 0.0;  ///< |grad_D f(x)|
  double lorentz_norm = 0.0;   ///< |grad_L g(y)| (Euclidean norm of coordinates)
  double param_norm = 0.0;     ///< |grad h(z)|
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  double slope_poincare = std::numeric_limits<double>::quiet_NaN();
  double slope_lorentz = std::numeric_limits<double>::quiet_NaN();
  double slope_param = std::numeric_limits<double>::quiet_NaN();
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

inline ScalingResult gradient_scaling_sweep(const std::vector<double>& deltas, double E) {
  ScalingResult out;
  const Objective f = linear_objective({-E, 0.0});
  std::vector<double> ds, rp, rl, rh;
  for (double delta : deltas) {
    const PoincarePoint x({1.0 - delta, 0.0});
    ScalingRow row;
    row.delta = delta;
    row.euclid_norm = norm(f.gradient(x).components);
    row.poincare_norm = norm(riem_grad_poincare(x, f.gradient(x)).components);
    row.lorentz_norm = norm(riem_grad_lorentz(poincare_to_lorentz(x), f).components);
    row.param_norm = norm(grad_param(param_from_poincare(x), f).components);
    out.rows.push_back(row);
    if (row.euclid_norm > 0.0) {
      ds.push_back(delta);
      rp.push_back(row.poincare_norm / row.euclid_norm);
      rl.push_back(row.lorentz_norm / row.euclid_norm);
      rh.push_back(row.param_norm / row.euclid_norm);
    }
  }
  if (ds.size() >= 2) {
    out.slope_poincare = loglog_slope(ds, rp);
    out.slope_lorentz = loglog_slope(ds, rl);
    out.slope_param = loglog_slope(ds, rh);
  }
  return out;
}

inline ProbeReport probe_scaling(const std::vector<double>& deltas, double E) {
  const ScalingResult s = gradient_scaling_sweep(deltas, E);
  ProbeReport rep;
  rep.probe = "scaling";
  for (const auto& row : s.rows) {
    std::ostringstream tag;
    tag << std::setprecision(3) << row.delta;
    rep.add("poincare_norm@" + tag.str(), row.poincare_norm);
    rep.add("lorentz_norm@" + tag.str(), row.lorentz_norm);
    rep.add("param_norm@" + tag.str(), row.param_norm);
  }
  if (E == 0.0) {
    bool zeros = true;
    for (const auto& row : s.rows) {
      zeros = zeros && row.poincare_norm == 0.0 && row.lorentz_norm == 0.0 && row.param_norm == 0.0;
    }
    rep.passed = zeros;
    rep.notes = "zero gradient: every chart reports a zero Riemannian gradient";
    return rep;
  }
  rep.add("slope_poincare", s.slope_poincare, 2.0);
  rep.add("slope_lorentz", s.slope_lorentz, 0.0);
  rep.add("slope_param", s.slope_param, 1.0);
  rep.passed = std::abs(s.slope_poincare - 2.0) <= 0.1 && std::abs(s.slope_lorentz) <= 0.1 &&
               std::abs(s.slope_param - 1.0) <= 0.1;
  rep.notes = "log-log slopes of |gradient| / |grad f| against delta";
  return rep;
}

inline std::vector<double> default_scaling_deltas() { return {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

}  // namespace hypstab
