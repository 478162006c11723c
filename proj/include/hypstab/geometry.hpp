#pragma once

// Closed-form operations on the Poincare ball, the Lorentz hyperboloid and the
// Euclidean parametrization z -> exp_0(z), all at curvature -1.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "hypstab/linalg.hpp"

namespace hypstab {

enum class Chart { poincare, lorentz, param };

inline std::string_view to_string(Chart c) {
  switch (c) {
    case Chart::poincare: return "poincare";
    case Chart::lorentz: return "lorentz";
    case Chart::param: return "eparam";
  }
  return "unknown";
}

inline Chart chart_from_string(std::string_view s) {
  if (s == "poincare") return Chart::poincare;
  if (s == "lorentz") return Chart::lorentz;
  if (s == "param" || s == "eparam" || s == "euclid-param") return Chart::param;
  throw std::invalid_argument("unknown chart '" + std::string(s) + "'");
}

/// Relative tolerance on [x,x] = -1 for points with x0 <= kLorentzCheckLimit.
inline constexpr double kLorentzTol = 1e-9;
/// Above this time coordinate [x,x] cannot be checked in binary64.
inline constexpr double kLorentzCheckLimit = 1e8;
/// Relative tolerance for tangency / spacelike checks in Minkowski space.
inline constexpr double kTangentTol = 1e-9;
/// Vectors at or below this norm are treated as zero by v/|v| maps.
inline constexpr double kTinyNorm = 1e-15;

/// [u,v] = -u0 v0 + sum_i ui vi. The negative term enters the sum first.
inline double minkowski_product(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("minkowski_product: dimension mismatch");
  if (u.size() < 2) throw std::invalid_argument("minkowski_product: need at least 2 components");
  double s = -u[0] * v[0];
  for (std::size_t i = 1; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

/// Sum of |terms| of the Minkowski product; the natural scale for rounding error.
inline double minkowski_magnitude(std::span<const double> u, std::span<const double> v) {
  double s = std::abs(u[0] * v[0]);
  for (std::size_t i = 1; i < u.size(); ++i) s += std::abs(u[i] * v[i]);
  return s;
}

class PoincarePoint {
 public:
  PoincarePoint() = default;

  /// Throws std::domain_error unless |coords| < 1 and all entries are finite.
  explicit PoincarePoint(Vector coords) : coords_(std::move(coords)) {
    if (!all_finite(coords_)) throw std::domain_error("PoincarePoint: non-finite coordinate");
    if (hypstab::norm_sq(coords_) >= 1.0) {
      throw std::domain_error("PoincarePoint: norm must be < 1");
    }
  }

  static PoincarePoint origin(std::size_t dim) { return PoincarePoint(Vector(dim, 0.0)); }

  /// Accepts points that rounding pushed onto the unit sphere (|x| <= 1 + 1e-12).
  /// This is how the ball's representation limit shows up in results; such
  /// points report on_boundary() and most maps refuse them.
  static PoincarePoint saturating(Vector coords) {
    if (!all_finite(coords)) throw std::domain_error("PoincarePoint: non-finite coordinate");
    if (hypstab::norm(coords) > 1.0 + 1e-12) {
      throw std::domain_error("PoincarePoint: norm exceeds 1");
    }
    PoincarePoint p;
    p.coords_ = std::move(coords);
    return p;
  }

  std::span<const double> coords() const { return coords_; }
  const Vector& vec() const { return coords_; }
  std::size_t dim() const { return coords_.size(); }
  double norm_sq() const { return hypstab::norm_sq(coords_); }
  bool on_boundary() const { return norm_sq() >= 1.0; }

  /// Conformal factor 2 / (1 - |x|^2).
  double conformal_factor() const { return 2.0 / (1.0 - norm_sq()); }

 private:
  Vector coords_;
};

/// A point on the hyperboloid, stored by its spatial part x_r. The time
/// coordinate is always recomputed as sqrt(|x_r|^2 + 1), so a stored point
/// satisfies the constraint by construction even where binary64 can no longer
/// verify it.
class LorentzPoint {
 public:
  LorentzPoint() = default;

  static LorentzPoint from_spatial(Vector spatial) {
    if (spatial.empty()) throw std::invalid_argument("LorentzPoint: empty spatial part");
    if (!all_finite(spatial)) throw std::domain_error("LorentzPoint: non-finite coordinate");
    LorentzPoint p;
    p.spatial_ = std::move(spatial);
    return p;
  }

  /// Validates x0 > 0 and, while x0 <= 1e8, |[x,x] + 1| <= kLorentzTol * x0^2.
  static LorentzPoint from_ambient(std::span<const double> ambient) {
    if (ambient.size() < 2) throw std::invalid_argument("LorentzPoint: need n+1 >= 2 components");
    if (!all_finite(ambient)) throw std::domain_error("LorentzPoint: non-finite coordinate");
    const double x0 = ambient[0];
    if (!(x0 > 0.0)) throw std::domain_error("LorentzPoint: time coordinate must be positive");
    if (x0 <= kLorentzCheckLimit) {
      const double q = minkowski_product(ambient, ambient);
      if (std::abs(q + 1.0) > kLorentzTol * x0 * x0) {
        throw std::domain_error("LorentzPoint: [x,x] != -1");
      }
    }
    return from_spatial(Vector(ambient.begin() + 1, ambient.end()));
  }

  static LorentzPoint origin(std::size_t dim) { return from_spatial(Vector(dim, 0.0)); }

  double time() const { return std::sqrt(hypstab::norm_sq(spatial_) + 1.0); }
  std::span<const double> spatial() const { return spatial_; }
  std::size_t dim() const { return spatial_.size(); }

  Vector ambient() const {
    Vector out;
    out.reserve(spatial_.size() + 1);
    out.push_back(time());
    out.insert(out.end(), spatial_.begin(), spatial_.end());
    return out;
  }

 private:
  Vector spatial_;
};

/// Tangent vector in chart coordinates; the base point is passed alongside it.
/// Poincare tangents have n components, Lorentz tangents n+1.
struct TangentVector {
  Chart chart = Chart::poincare;
  Vector components;
};

/// Unconstrained coordinates z of the point exp_0(z) (Poincare: exp_0(z/2)).
struct EuclideanParam {
  Vector z;
};

inline bool is_lorentz_tangent(const LorentzPoint& x, const TangentVector& v) {
  const Vector xa = x.ambient();
  if (v.components.size() != xa.size()) return false;
  const double ip = minkowski_product(xa, v.components);
  return std::abs(ip) <= kTangentTol * std::max(1.0, minkowski_magnitude(xa, v.components));
}

inline double dist_poincare(const PoincarePoint& x, const PoincarePoint& y) {
  const Vector diff = subtract(x.coords(), y.coords());
  const double arg =
      1.0 + 2.0 * norm_sq(diff) / ((1.0 - x.norm_sq()) * (1.0 - y.norm_sq()));
  return std::acosh(std::max(1.0, arg));
}

inline double dist_lorentz(std::span<const double> x, std::span<const double> y) {
  return std::acosh(std::max(1.0, -minkowski_product(x, y)));
}

inline double dist_lorentz(const LorentzPoint& x, const LorentzPoint& y) {
  return dist_lorentz(x.ambient(), y.ambient());
}

/// phi: ball -> hyperboloid.
inline LorentzPoint poincare_to_lorentz(const PoincarePoint& x) {
  const double nx = x.norm_sq();
  if (!(nx < 1.0)) throw std::domain_error("poincare_to_lorentz: point on or outside the unit sphere");
  return LorentzPoint::from_spatial(scaled(x.coords(), 2.0 / (1.0 - nx)));
}

/// psi: hyperboloid -> ball.
inline PoincarePoint lorentz_to_poincare(const LorentzPoint& y) {
  return PoincarePoint::saturating(scaled(y.spatial(), 1.0 / (1.0 + y.time())));
}

/// Mobius addition x (+) y on the unit ball.
inline Vector mobius_add(std::span<const double> x, std::span<const double> y) {
  require_same_size(x, y, "mobius_add");
  const double xy = dot(x, y);
  const double nx = norm_sq(x);
  const double ny = norm_sq(y);
  const double den = 1.0 + 2.0 * xy + nx * ny;
  if (!(den >= 1e-15)) throw std::domain_error("mobius_add: degenerate (antipodal) configuration");
  const double a = 1.0 + 2.0 * xy + ny;
  const double b = 1.0 - nx;
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (a * x[i] + b * y[i]) / den;
  if (norm(out) > 1.0 + 1e-12) throw std::domain_error("mobius_add: result left the unit ball");
  return out;
}

/// exp_x(scale * v) on the ball.
inline PoincarePoint exp_poincare(const PoincarePoint& x, const TangentVector& v, double scale = 1.0) {
  if (v.components.size() != x.dim()) throw std::invalid_argument("exp_poincare: dimension mismatch");
  const Vector u = scaled(v.components, scale);
  const double nu = norm(u);
  if (nu <= kTinyNorm) return x;
  const double lambda = x.conformal_factor();
  const Vector step = scaled(u, std::tanh(0.5 * lambda * nu) / nu);
  return PoincarePoint::saturating(mobius_add(x.coords(), step));
}

/// Minkowski norm sqrt([v,v]) of a tangent vector. Small negative [v,v] from
/// rounding is clamped to zero; anything more negative is not spacelike.
inline double lorentz_tangent_norm(std::span<const double> v) {
  const double q = minkowski_product(v, v);
  if (q < -kTangentTol * std::max(1.0, minkowski_magnitude(v, v))) {
    throw std::domain_error("lorentz_tangent_norm: vector is not spacelike");
  }
  return std::sqrt(std::max(0.0, q));
}

inline double lorentz_tangent_norm(const TangentVector& v) { return lorentz_tangent_norm(v.components); }

/// Minkowski norm of the tangent vector at x with spatial part ur. The time
/// part is implied by tangency, u0 = <xr, ur> / x0, which gives
/// [u,u] = (|ur|^2 + sum_{i<j} (xi uj - xj ui)^2) / x0^2 with no cancellation.
/// The naive -u0^2 + |ur|^2 loses about x0^2 ulp, and that error leaves the
/// exp-map result off the hyperboloid by sinh(nu) x0 times as much.
inline double lorentz_tangent_norm_at(const LorentzPoint& x, std::span<const double> ur) {
  const auto xr = x.spatial();
  double q = norm_sq(ur);
  for (std::size_t i = 0; i < xr.size(); ++i) {
    for (std::size_t j = i + 1; j < xr.size(); ++j) {
      const double cross = xr[i] * ur[j] - xr[j] * ur[i];
      q += cross * cross;
    }
  }
  return std::sqrt(q) / x.time();
}

/// exp_x(scale * v) on the hyperboloid. v must be tangent; its length is taken
/// from the spatial part (see lorentz_tangent_norm_at) and the result's time
/// coordinate is re-derived from its spatial part.
inline LorentzPoint exp_lorentz(const LorentzPoint& x, const TangentVector& v, double scale = 1.0) {
  const Vector xa = x.ambient();
  if (v.components.size() != xa.size()) throw std::invalid_argument("exp_lorentz: dimension mismatch");
  if (!is_lorentz_tangent(x, v)) throw std::domain_error("exp_lorentz: vector is not tangent at the base point");
  const Vector u = scaled(v.components, scale);
  const std::span<const double> ur = std::span<const double>(u).subspan(1);
  const double nu = lorentz_tangent_norm_at(x, ur);
  if (nu <= kTinyNorm) return x;
  const double c = std::cosh(nu);
  const double s = std::sinh(nu) / nu;
  Vector spatial(x.dim());
  for (std::size_t i = 1; i < xa.size(); ++i) spatial[i - 1] = c * xa[i] + s * u[i];
  return LorentzPoint::from_spatial(std::move(spatial));
}

/// F_D(z) = tanh(|z|/2) z/|z|.
inline PoincarePoint param_to_poincare(const EuclideanParam& p) {
  const double r = norm(p.z);
  if (r <= kTinyNorm) return PoincarePoint::origin(p.z.size());
  return PoincarePoint::saturating(scaled(p.z, std::tanh(0.5 * r) / r));
}

/// F_L(z) = (cosh|z|, sinh|z| z/|z|).
inline LorentzPoint param_to_lorentz(const EuclideanParam& p) {
  const double r = norm(p.z);
  if (r <= kTinyNorm) return LorentzPoint::origin(p.z.size());
  return LorentzPoint::from_spatial(scaled(p.z, std::sinh(r) / r));
}

inline EuclideanParam param_from_poincare(const PoincarePoint& x) {
  const double r = std::sqrt(x.norm_sq());
  if (!(r < 1.0)) throw std::domain_error("param_from_poincare: point on the unit sphere");
  if (r <= kTinyNorm) return {Vector(x.dim(), 0.0)};
  return {scaled(x.coords(), 2.0 * std::atanh(r) / r)};
}

/// Uses asinh|y_r| for the radius, which equals arccosh(y0) on the hyperboloid
/// and stays accurate near the origin.
inline EuclideanParam param_from_lorentz(const LorentzPoint& y) {
  const double s = norm(y.spatial());
  if (s <= kTinyNorm) return {Vector(y.dim(), 0.0)};
  return {scaled(y.spatial(), std::asinh(s) / s)};
}

/// PT_{x->y}(v) = v + [y,v] / (1 - [x,y]) (x + y).
inline TangentVector parallel_transport_lorentz(const LorentzPoint& x, const LorentzPoint& y,
                                                const TangentVector& v) {
  const Vector xa = x.ambient();
  const Vector ya = y.ambient();
  if (v.components.size() != xa.size() || ya.size() != xa.size()) {
    throw std::invalid_argument("parallel_transport_lorentz: dimension mismatch");
  }
  const double den = 1.0 - minkowski_product(xa, ya);
  if (!(den >= 1e-15)) throw std::domain_error("parallel_transport_lorentz: degenerate pair");
  const double coef = minkowski_product(ya, v.components) / den;
  TangentVector out{Chart::lorentz, v.components};
  for (std::size_t i = 0; i < xa.size(); ++i) out.components[i] += coef * (xa[i] + ya[i]);
  return out;
}

}  // namespace hypstab
