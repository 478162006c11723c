#pragma once

// Riemannian gradients and single descent steps in the three coordinate
// systems. Every objective is defined once on the Poincare ball; the Lorentz
// view g = f o psi and the parametrized view h = f o F_D are derived from it,
// so the three optimizers always minimize the same function.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hypstab/geometry.hpp"
#include "hypstab/linalg.hpp"

namespace hypstab {

struct ValueGrad {
  double value = 0.0;
  Vector gradient;
};

/// Euclidean gradient in a chart's coordinates.
struct AmbientGradient {
  Chart chart = Chart::poincare;
  Vector components;
};

class Objective {
 public:
  using Fn = std::function<ValueGrad(std::span<const double>)>;

  explicit Objective(Fn fn) : fn_(std::move(fn)) {}

  ValueGrad evaluate(std::span<const double> x) const { return fn_(x); }
  ValueGrad operator()(const PoincarePoint& x) const { return fn_(x.coords()); }

  AmbientGradient gradient(const PoincarePoint& x) const {
    return {Chart::poincare, fn_(x.coords()).gradient};
  }

 private:
  Fn fn_;
};

/// f(x) = <c, x>.
inline Objective linear_objective(Vector c) {
  return Objective([c = std::move(c)](std::span<const double> x) {
    return ValueGrad{dot(c, x), c};
  });
}

/// Derivative of u -> arccosh(u) with the argument held at >= 1 + guard.
inline double acosh_derivative(double u, double guard = 1e-12) {
  const double a = std::max(u, 1.0 + guard);
  return 1.0 / std::sqrt((a - 1.0) * (a + 1.0));
}

/// Distance on the ball together with its Euclidean gradient in x.
inline double dist_poincare_with_grad(std::span<const double> x, std::span<const double> y,
                                      std::span<double> grad_x, double guard = 1e-12) {
  const double nx = norm_sq(x);
  const double ny = norm_sq(y);
  const double ax = 1.0 - nx;
  const double ay = 1.0 - ny;
  double diff_sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) diff_sq += (x[i] - y[i]) * (x[i] - y[i]);
  const double u = 1.0 + 2.0 * diff_sq / (ax * ay);
  const double d = std::acosh(std::max(1.0, u));
  const double dd = acosh_derivative(u, guard);
  // du/dx = 4/(ax ay) (x - y) + 4 |x-y|^2 / (ax^2 ay) x
  const double c1 = 4.0 / (ax * ay);
  const double c2 = 4.0 * diff_sq / (ax * ax * ay);
  for (std::size_t i = 0; i < x.size(); ++i) grad_x[i] = dd * (c1 * (x[i] - y[i]) + c2 * x[i]);
  return d;
}

/// f(x) = weight * d(x, target)^2.
inline Objective squared_distance_objective(PoincarePoint target, double weight = 1.0) {
  return Objective([target = std::move(target), weight](std::span<const double> x) {
    const auto t = target.coords();
    const double nx = norm_sq(x);
    const double ax = 1.0 - nx;
    const double ay = 1.0 - target.norm_sq();
    double diff_sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) diff_sq += (x[i] - t[i]) * (x[i] - t[i]);
    const double u = 1.0 + 2.0 * diff_sq / (ax * ay);
    const double d = std::acosh(std::max(1.0, u));
    // d(d^2)/du = 2 arccosh(u) / sqrt(u^2 - 1), which tends to 2 as u -> 1.
    const double w = u - 1.0;
    const double factor = w < 1e-12 ? 2.0 : 2.0 * d / std::sqrt(w * (u + 1.0));
    const double c1 = 4.0 / (ax * ay);
    const double c2 = 4.0 * diff_sq / (ax * ax * ay);
    ValueGrad out{weight * d * d, Vector(x.size())};
    for (std::size_t i = 0; i < x.size(); ++i) {
      out.gradient[i] = weight * factor * (c1 * (x[i] - t[i]) + c2 * x[i]);
    }
    return out;
  });
}

inline Objective sum_objectives(std::vector<Objective> parts) {
  return Objective([parts = std::move(parts)](std::span<const double> x) {
    ValueGrad out{0.0, Vector(x.size(), 0.0)};
    for (const auto& p : parts) {
      const ValueGrad vg = p.evaluate(x);
      out.value += vg.value;
      axpy(1.0, vg.gradient, out.gradient);
    }
    return out;
  });
}

/// lambda_x^{-2} grad f = (1 - |x|^2)^2 / 4 * grad f.
inline TangentVector riem_grad_poincare(const PoincarePoint& x, const AmbientGradient& g) {
  if (g.components.size() != x.dim()) throw std::invalid_argument("riem_grad_poincare: dimension mismatch");
  const double a = 1.0 - x.norm_sq();
  return {Chart::poincare, scaled(g.components, a * a / 4.0)};
}

/// Differential of phi at x applied to v, expressed through y = phi(x):
///   w0 = (1 + y0) <y_r, v>,  wi = (1 + y0) vi + <y_r, v> yi.
inline TangentVector pushforward_dphi(const PoincarePoint& x, const TangentVector& v) {
  if (v.components.size() != x.dim()) throw std::invalid_argument("pushforward_dphi: dimension mismatch");
  const LorentzPoint y = poincare_to_lorentz(x);
  const auto yr = y.spatial();
  const double y0 = y.time();
  const double s = dot(yr, v.components);
  TangentVector w{Chart::lorentz, Vector(x.dim() + 1)};
  w.components[0] = s * (1.0 + y0);
  for (std::size_t i = 0; i < x.dim(); ++i) {
    w.components[i + 1] = v.components[i] * (1.0 + y0) + s * yr[i];
  }
  return w;
}

/// Differential of psi at y: (D psi w)_i = (wi - yi w0 / (y0 + 1)) / (1 + y0).
inline TangentVector pushforward_dpsi(const LorentzPoint& y, const TangentVector& w) {
  if (w.components.size() != y.dim() + 1) throw std::invalid_argument("pushforward_dpsi: dimension mismatch");
  const auto yr = y.spatial();
  const double y0 = y.time();
  TangentVector v{Chart::poincare, Vector(y.dim())};
  for (std::size_t i = 0; i < y.dim(); ++i) {
    v.components[i] = (w.components[i + 1] - yr[i] * w.components[0] / (y0 + 1.0)) / (1.0 + y0);
  }
  return v;
}

/// Lorentz gradient of g = f o psi, routed as D phi(grad_D f(psi(y))).
inline TangentVector riem_grad_lorentz(const LorentzPoint& y, const Objective& f) {
  const PoincarePoint x = lorentz_to_poincare(y);
  return pushforward_dphi(x, riem_grad_poincare(x, f.gradient(x)));
}

/// Riemannian gradient on the hyperboloid from an ambient Euclidean gradient:
/// h = J grad, then h + [y,h] y (projection onto T_y). Used where a loss is
/// written natively in Lorentz coordinates.
inline Vector lorentz_riemannian_from_ambient(std::span<const double> y_ambient,
                                              std::span<const double> grad) {
  if (grad.size() != y_ambient.size()) {
    throw std::invalid_argument("lorentz_riemannian_from_ambient: dimension mismatch");
  }
  Vector h(grad.begin(), grad.end());
  h[0] = -h[0];
  const double c = minkowski_product(y_ambient, h);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] += c * y_ambient[i];
  return h;
}

inline void require_step_size(double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("step size must be finite and >= 0");
}

/// x <- exp_x(-eta grad_D f(x)).
inline PoincarePoint rsgd_step(const PoincarePoint& x, const Objective& f, double eta) {
  require_step_size(eta);
  return exp_poincare(x, riem_grad_poincare(x, f.gradient(x)), -eta);
}

/// y <- exp_y(-eta grad_L g(y)).
inline LorentzPoint rsgd_step(const LorentzPoint& y, const Objective& f, double eta) {
  require_step_size(eta);
  return exp_lorentz(y, riem_grad_lorentz(y, f), -eta);
}

/// Jacobian of F_D at z: (t/r)(I - u u^T) + (1 - t^2)/2 u u^T with r = |z|,
/// t = tanh(r/2), u = z/r. Tends to I/2 at the origin.
inline Matrix jacobian_param_to_poincare(const EuclideanParam& p) {
  const std::size_t n = p.z.size();
  const double r = norm(p.z);
  if (r <= kTinyNorm) return Matrix::identity(n, 0.5);
  const double t = std::tanh(0.5 * r);
  const double iso = t / r;
  const double radial = 0.5 * (1.0 - t * t);
  Matrix j = Matrix::identity(n, iso);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      j(i, k) += (radial - iso) * (p.z[i] / r) * (p.z[k] / r);
    }
  }
  return j;
}

/// Jacobian of F_L at z as an (n+1) x n matrix; row 0 is the time component.
inline Matrix jacobian_param_to_lorentz(const EuclideanParam& p) {
  const std::size_t n = p.z.size();
  Matrix j(n + 1, n);
  const double r = norm(p.z);
  if (r <= kTinyNorm) {
    for (std::size_t i = 0; i < n; ++i) j(i + 1, i) = 1.0;
    return j;
  }
  const double sh = std::sinh(r);
  const double iso = sh / r;
  const double radial = std::cosh(r);
  for (std::size_t k = 0; k < n; ++k) j(0, k) = sh * p.z[k] / r;
  for (std::size_t i = 0; i < n; ++i) {
    j(i + 1, i) = iso;
    for (std::size_t k = 0; k < n; ++k) j(i + 1, k) += (radial - iso) * (p.z[i] / r) * (p.z[k] / r);
  }
  return j;
}

/// Euclidean gradient of h = f o F_D: J_{F_D}(z)^T grad f(F_D(z)).
inline AmbientGradient grad_param(const EuclideanParam& z, const Objective& f) {
  const PoincarePoint x = param_to_poincare(z);
  const Matrix j = jacobian_param_to_poincare(z);
  return {Chart::param, j.transpose_times(f.gradient(x).components)};
}

/// z <- z - eta grad h(z); the exponential map of flat space is vector addition.
inline EuclideanParam euclid_step(const EuclideanParam& z, const Objective& f, double eta) {
  require_step_size(eta);
  const AmbientGradient g = grad_param(z, f);
  EuclideanParam out = z;
  axpy(-eta, g.components, out.z);
  return out;
}

/// Central differences, one coordinate at a time.
inline Vector finite_diff_grad(const std::function<double(std::span<const double>)>& fn,
                               std::span<const double> x, double step = 1e-6) {
  Vector probe(x.begin(), x.end());
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double fp = fn(probe);
    probe[i] = orig - step;
    const double fm = fn(probe);
    probe[i] = orig;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

}  // namespace hypstab
