#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hypstab/optim.hpp"
#include "oracle_values.hpp"

using namespace hypstab;

namespace {

Vector random_in_ball(std::mt19937_64& rng, double max_norm, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector v(dim);
  for (auto& c : v) c = g(rng);
  return scaled(v, max_norm * std::pow(u(rng), 1.0 / static_cast<double>(dim)) / norm(v));
}

double rel_err(std::span<const double> a, std::span<const double> b) {
  return max_abs_diff(a, b) / std::max(1e-300, std::max(norm(a), norm(b)));
}

}  // namespace

TEST(FiniteDiff, QuadraticAndLinear) {
  auto quad = [](std::span<const double> x) { return norm_sq(x); };
  const Vector g = finite_diff_grad(quad, Vector{1.0, 2.0});
  EXPECT_NEAR(g[0], 2.0, 1e-8);
  EXPECT_NEAR(g[1], 4.0, 1e-8);
  auto lin = [](std::span<const double> x) { return 3.0 * x[0] - 0.5 * x[1]; };
  const Vector h = finite_diff_grad(lin, Vector{0.25, -1.0});
  EXPECT_NEAR(h[0], 3.0, 1e-9);
  EXPECT_NEAR(h[1], -0.5, 1e-9);
}

TEST(Objective, SquaredDistanceGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const PoincarePoint target(random_in_ball(rng, 0.95, 3));
    const Objective f = squared_distance_objective(target, 0.7);
    const Vector x = random_in_ball(rng, 0.95, 3);
    const Vector fd = finite_diff_grad([&](std::span<const double> p) { return f.evaluate(p).value; }, x);
    EXPECT_LE(rel_err(f.evaluate(x).gradient, fd), 1e-5);
  }
}

TEST(Objective, DistanceGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const Vector x = random_in_ball(rng, 0.9, 2), y = random_in_ball(rng, 0.9, 2);
    Vector g(2);
    dist_poincare_with_grad(x, y, g);
    const Vector fd = finite_diff_grad(
        [&](std::span<const double> p) {
          Vector tmp(2);
          return dist_poincare_with_grad(p, y, tmp);
        },
        x);
    EXPECT_LE(rel_err(g, fd), 1e-5);
  }
}

TEST(RiemGradPoincare, Examples) {
  const TangentVector at0 = riem_grad_poincare(PoincarePoint::origin(2), {Chart::poincare, {2.0, -4.0}});
  EXPECT_EQ(at0.components[0], 0.5);
  EXPECT_EQ(at0.components[1], -1.0);
  const TangentVector zero = riem_grad_poincare(PoincarePoint(Vector{0.3, 0.1}), {Chart::poincare, {0.0, 0.0}});
  EXPECT_EQ(norm(zero.components), 0.0);
}

TEST(RiemGradPoincare, VanishesAsDeltaSquared) {
  for (double delta : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    const PoincarePoint x(Vector{1.0 - delta, 0.0});
    const TangentVector g = riem_grad_poincare(x, {Chart::poincare, {-1.0, 0.0}});
    const double ratio = norm(g.components) / (delta * delta);
    EXPECT_GE(ratio, 0.9);
    EXPECT_LE(ratio, 4.1);
  }
}

TEST(Pushforward, DphiAtOrigin) {
  const TangentVector w = pushforward_dphi(PoincarePoint::origin(2), {Chart::poincare, {0.3, -0.7}});
  EXPECT_EQ(w.components[0], 0.0);
  EXPECT_EQ(w.components[1], 0.6);
  EXPECT_EQ(w.components[2], -1.4);
}

TEST(Pushforward, DpsiAtOrigin) {
  const TangentVector v = pushforward_dpsi(LorentzPoint::origin(2), {Chart::lorentz, {0.0, 0.6, -1.4}});
  EXPECT_DOUBLE_EQ(v.components[0], 0.3);
  EXPECT_DOUBLE_EQ(v.components[1], -0.7);
}

TEST(Pushforward, InverseAndTangency) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const PoincarePoint x(random_in_ball(rng, 0.99, 3));
    const TangentVector v{Chart::poincare, random_in_ball(rng, 2.0, 3)};
    const TangentVector w = pushforward_dphi(x, v);
    const LorentzPoint y = poincare_to_lorentz(x);
    EXPECT_TRUE(is_lorentz_tangent(y, w));
    const TangentVector back = pushforward_dpsi(y, w);
    EXPECT_LE(rel_err(back.components, v.components), 1e-12);
    // and the other way round
    const TangentVector w2 = pushforward_dphi(x, pushforward_dpsi(y, w));
    EXPECT_LE(rel_err(w2.components, w.components), 1e-12);
  }
}

TEST(Pushforward, DphiMatchesFiniteDifferenceOfPhi) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 30; ++t) {
    const Vector x = random_in_ball(rng, 0.9, 2);
    const Vector v = random_in_ball(rng, 1.0, 2);
    const double h = 1e-7;
    const Vector xp = add(x, scaled(v, h)), xm = subtract(x, scaled(v, h));
    const Vector yp = poincare_to_lorentz(PoincarePoint(xp)).ambient();
    const Vector ym = poincare_to_lorentz(PoincarePoint(xm)).ambient();
    const Vector fd = scaled(subtract(yp, ym), 0.5 / h);
    const TangentVector w = pushforward_dphi(PoincarePoint(x), {Chart::poincare, v});
    EXPECT_LE(rel_err(w.components, fd), 1e-6);
  }
}

TEST(RiemGradLorentz, MatchesProjectionOracle) {
  const Objective f = linear_objective({0.8, -1.3});
  const LorentzPoint y = poincare_to_lorentz(PoincarePoint(Vector{0.3, 0.4}));
  const TangentVector g = riem_grad_lorentz(y, f);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(g.components[i], oracle::kLorentzGradLinear[i], 1e-14);
}

TEST(RiemGradLorentz, ZeroAndNormBound) {
  const TangentVector z = riem_grad_lorentz(LorentzPoint::from_spatial({1.0, 2.0}), linear_objective({0.0, 0.0}));
  EXPECT_EQ(norm(z.components), 0.0);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const Vector c = random_in_ball(rng, 3.0, 2);
    const LorentzPoint y = param_to_lorentz(EuclideanParam{random_in_ball(rng, 15.0, 2)});
    const TangentVector g = riem_grad_lorentz(y, linear_objective(c));
    const double y0 = y.time();
    EXPECT_LE(norm(g.components), std::sqrt(2.0 * y0 * y0 - 1.0) / (1.0 + y0) * norm(c) * (1.0 + 1e-12));
  }
}

TEST(RiemGradLorentz, AxisConfigurationMatchesExpansion) {
  // x = (1 - delta, 0), grad f = (d1, 0): gradient ((1-delta) d1, (2 - 2 delta + delta^2)/2 d1, 0)
  for (double delta : {1e-2, 1e-4}) {
    const double d1 = -1.0;
    const LorentzPoint y = poincare_to_lorentz(PoincarePoint(Vector{1.0 - delta, 0.0}));
    const TangentVector g = riem_grad_lorentz(y, linear_objective({d1, 0.0}));
    EXPECT_NEAR(g.components[0], (1.0 - delta) * d1, 1e-12);
    EXPECT_NEAR(g.components[1], (2.0 - 2.0 * delta + delta * delta) / 2.0 * d1, 1e-12);
    EXPECT_EQ(g.components[2], 0.0);
  }
}

TEST(RiemGradLorentz, AmbientProjectionRouteAgrees) {
  // For g = f o psi written on ambient coordinates, projection of the ambient
  // gradient equals the D phi route.
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    const Vector c = random_in_ball(rng, 2.0, 2);
    const LorentzPoint y = param_to_lorentz(EuclideanParam{random_in_ball(rng, 6.0, 2)});
    const Vector ya = y.ambient();
    // ambient gradient of y -> <c, y_r / (1 + y0)>
    const double s = 1.0 + ya[0];
    Vector amb(3);
    amb[0] = -(c[0] * ya[1] + c[1] * ya[2]) / (s * s);
    amb[1] = c[0] / s;
    amb[2] = c[1] / s;
    const Vector proj = lorentz_riemannian_from_ambient(ya, amb);
    const TangentVector dphi = riem_grad_lorentz(y, linear_objective(c));
    EXPECT_LE(rel_err(proj, dphi.components), 1e-10);
  }
}

TEST(Rsgd, ZeroStepIsIdentity) {
  const Objective f = linear_objective({1.0, -2.0});
  const PoincarePoint x(Vector{0.4, 0.2});
  EXPECT_EQ(rsgd_step(x, f, 0.0).vec(), x.vec());
  const LorentzPoint y = poincare_to_lorentz(x);
  EXPECT_EQ(rsgd_step(y, f, 0.0).ambient(), y.ambient());
  EXPECT_THROW(rsgd_step(x, f, -1.0), std::invalid_argument);
  EXPECT_THROW(rsgd_step(x, f, std::nan("")), std::invalid_argument);
}

TEST(Rsgd, ModelsAgreeThroughPsi) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> eta(0.01, 1.0);
  for (int t = 0; t < 300; ++t) {
    const PoincarePoint x(random_in_ball(rng, 0.999, 2));
    const Objective f = squared_distance_objective(PoincarePoint(random_in_ball(rng, 0.9, 2)), 0.5);
    const double e = eta(rng);
    const PoincarePoint a = rsgd_step(x, f, e);
    const PoincarePoint b = lorentz_to_poincare(rsgd_step(poincare_to_lorentz(x), f, e));
    EXPECT_LE(max_abs_diff(a.coords(), b.coords()), 1e-7);
  }
}

TEST(Rsgd, PoincareStallsNearBoundary) {
  const PoincarePoint x(Vector{1.0 - 1e-8, 0.0});
  const PoincarePoint next = rsgd_step(x, linear_objective({-1.0, 0.0}), 1.0);
  EXPECT_EQ(next.coords()[0], x.coords()[0]);
}

TEST(JacobianFD, Examples) {
  const Matrix j0 = jacobian_param_to_poincare(EuclideanParam{{0.0, 0.0, 0.0}});
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(j0(i, k), i == k ? 0.5 : 0.0);
  }
  const double w = 0.8;
  const Matrix j = jacobian_param_to_poincare(EuclideanParam{{2.0 * w, 0.0, 0.0}});
  EXPECT_NEAR(j(0, 0), 0.5 * (1.0 - std::tanh(w) * std::tanh(w)), 1e-15);
  EXPECT_NEAR(j(1, 1), std::tanh(w) / (2.0 * w), 1e-15);
  EXPECT_NEAR(j(2, 2), std::tanh(w) / (2.0 * w), 1e-15);
  EXPECT_EQ(j(0, 1), 0.0);
  EXPECT_EQ(j(1, 2), 0.0);
}

TEST(JacobianFD, MatchesOracle) {
  const Matrix j = jacobian_param_to_poincare(EuclideanParam{{0.7, -1.1}});
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(j(i, k), oracle::kJacobianFD[2 * i + k], 1e-14);
  }
}

TEST(JacobianFD, MatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 100; ++t) {
    const Vector z = random_in_ball(rng, 10.0, 3);
    const Matrix j = jacobian_param_to_poincare(EuclideanParam{z});
    for (std::size_t i = 0; i < 3; ++i) {
      const Vector row = finite_diff_grad(
          [&](std::span<const double> p) { return param_to_poincare(EuclideanParam{Vector(p.begin(), p.end())}).coords()[i]; },
          z);
      for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(j(i, k), row[k], 1e-6);
    }
  }
}

TEST(JacobianFL, MatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    const Vector z = random_in_ball(rng, 4.0, 2);
    const Matrix j = jacobian_param_to_lorentz(EuclideanParam{z});
    for (std::size_t i = 0; i < 3; ++i) {
      const Vector row = finite_diff_grad(
          [&](std::span<const double> p) { return param_to_lorentz(EuclideanParam{Vector(p.begin(), p.end())}).ambient()[i]; },
          z);
      for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(j(i, k), row[k], 1e-6 * std::max(1.0, std::abs(row[k])));
    }
  }
}

TEST(GradParam, Examples) {
  const AmbientGradient zero = grad_param(EuclideanParam{{0.4, 0.1}}, linear_objective({0.0, 0.0}));
  EXPECT_EQ(norm(zero.components), 0.0);
  const double w = 3.0, d1 = -1.7;
  const AmbientGradient g = grad_param(EuclideanParam{{2.0 * w, 0.0}}, linear_objective({d1, 0.0}));
  EXPECT_NEAR(g.components[0], d1 / 2.0 * (1.0 - std::tanh(w) * std::tanh(w)), 1e-16);
  EXPECT_EQ(g.components[1], 0.0);
}

TEST(GradParam, MatchesFiniteDifferences) {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 50; ++t) {
    const Objective f = squared_distance_objective(PoincarePoint(random_in_ball(rng, 0.8, 2)));
    const Vector z = random_in_ball(rng, 4.0, 2);
    const AmbientGradient g = grad_param(EuclideanParam{z}, f);
    const Vector fd = finite_diff_grad(
        [&](std::span<const double> p) {
          return f(param_to_poincare(EuclideanParam{Vector(p.begin(), p.end())})).value;
        },
        z);
    EXPECT_LE(rel_err(g.components, fd), 1e-5);
  }
}

TEST(EuclidStep, IdentityAndFirstOrderAgreement) {
  const Objective f = squared_distance_objective(PoincarePoint(Vector{0.2, -0.5}));
  const EuclideanParam z{{0.3, 0.9}};
  EXPECT_EQ(euclid_step(z, f, 0.0).z, z.z);
  // the descent direction of h = f o F_D matches the RSGD displacement to
  // first order once mapped through J_FD and the metric factor at x
  const PoincarePoint x = param_to_poincare(z);
  for (double eta : {1e-3, 1e-4}) {
    const Vector dz = subtract(euclid_step(z, f, eta).z, z.z);
    const Vector dx_rsgd = subtract(rsgd_step(x, f, eta).coords(), x.coords());
    const Matrix j = jacobian_param_to_poincare(z);
    Vector dx_param(2, 0.0);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t k = 0; k < 2; ++k) dx_param[i] += j(i, k) * dz[k];
    }
    // both are -eta times a positive-definite preconditioned gradient
    EXPECT_GT(dot(dx_param, dx_rsgd), 0.0);
    EXPECT_LE(norm(dx_rsgd), eta * 10.0);
  }
}
