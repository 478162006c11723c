#pragma once

// Large-margin classifiers on hyperbolic data: a Euclidean baseline on ball
// coordinates, the Lorentz SVM with projected subgradient descent, and the
// reparametrized variant that optimizes (z, a) without constraints.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hypstab/errors.hpp"
#include "hypstab/geometry.hpp"
#include "hypstab/linalg.hpp"

namespace hypstab {

struct LabeledDataset {
  std::vector<LorentzPoint> points;
  std::vector<int> labels;
  int classes = 0;

  std::size_t size() const { return points.size(); }
  std::size_t dim() const { return points.empty() ? 0 : points.front().dim(); }

  void validate() const {
    if (points.size() != labels.size()) throw std::invalid_argument("dataset: point/label count mismatch");
    if (classes < 1) throw std::invalid_argument("dataset: class count must be >= 1");
    for (int y : labels) {
      if (y < 0 || y >= classes) throw std::invalid_argument("dataset: label out of range");
    }
    for (const auto& p : points) {
      if (p.dim() != dim()) throw std::invalid_argument("dataset: inconsistent dimensions");
    }
  }
};

/// Gaussian mixture in R^2 (centroids ~ N(0, 1.5 I), per-point noise N(0, I)),
/// mapped onto the ball by F_D and lifted to the hyperboloid by phi.
inline LabeledDataset gen_gmm_poincare(int k, std::size_t n, std::uint64_t seed, std::size_t dim = 2,
                                       std::vector<Vector>* centroids_out = nullptr) {
  if (k < 1) throw std::invalid_argument("gen_gmm_poincare: k must be >= 1");
  if (n % static_cast<std::size_t>(k) != 0) throw std::invalid_argument("gen_gmm_poincare: n must be divisible by k");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double centroid_sd = std::sqrt(1.5);
  std::vector<Vector> centroids(static_cast<std::size_t>(k), Vector(dim));
  for (auto& c : centroids) {
    for (auto& v : c) v = centroid_sd * gauss(rng);
  }
  if (centroids_out) *centroids_out = centroids;
  LabeledDataset d;
  d.classes = k;
  const std::size_t per = n / static_cast<std::size_t>(k);
  for (int c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < per; ++i) {
      Vector z(dim);
      for (std::size_t j = 0; j < dim; ++j) z[j] = centroids[static_cast<std::size_t>(c)][j] + gauss(rng);
      d.points.push_back(poincare_to_lorentz(param_to_poincare(EuclideanParam{z})));
      d.labels.push_back(c);
    }
  }
  return d;
}

inline LabeledDataset subset(const LabeledDataset& d, const std::vector<std::size_t>& idx) {
  LabeledDataset out;
  out.classes = d.classes;
  for (std::size_t i : idx) {
    out.points.push_back(d.points.at(i));
    out.labels.push_back(d.labels.at(i));
  }
  return out;
}

/// Stratified split: per class, a seeded shuffle and the first
/// round(test_fraction * count) indices go to the test side.
inline std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& d, double test_fraction,
                                                                  std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::invalid_argument("test_fraction must be in (0,1)");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> train, test;
  for (int c = 0; c < d.classes; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.labels[i] == c) idx.push_back(i);
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
    test.insert(test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    train.insert(train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {subset(d, train), subset(d, test)};
}

// ---------------------------------------------------------------------------
// hyperplanes

struct HyperplaneParam {
  Vector z;
  double a = 0.0;
};

/// w = (sinh(a)|z|, cosh(a) z); [w, w] = |z|^2.
inline Vector normal_from_param(const HyperplaneParam& h) {
  const double nz = norm(h.z);
  Vector w(h.z.size() + 1);
  w[0] = std::sinh(h.a) * nz;
  const double ch = std::cosh(h.a);
  for (std::size_t i = 0; i < h.z.size(); ++i) w[i + 1] = ch * h.z[i];
  return w;
}

/// max(0, asinh(1) - asinh(m)).
inline double hinge_lorentz(double m) { return std::max(0.0, std::asinh(1.0) - std::asinh(m)); }

/// d/dm of hinge_lorentz; 0 on the flat side and at the kink.
inline double hinge_lorentz_slope(double m) { return m < 1.0 ? -1.0 / std::sqrt(1.0 + m * m) : 0.0; }

/// -[w, x]: positive on the side the +1 class is trained towards.
inline double decision_lsvm(std::span<const double> w, const LorentzPoint& x) {
  return -minkowski_product(w, x.ambient());
}

/// asinh(-[w,x] / |w|) |w| with |w| = |z|, the signed point-hyperplane
/// distance scaled back by the normal's length.
inline double decision_lsvmpp(const HyperplaneParam& h, const LorentzPoint& x) {
  const double nz = norm(h.z);
  if (!(nz > 1e-12)) throw std::domain_error("decision_lsvmpp: degenerate hyperplane (|z| ~ 0)");
  const auto xr = x.spatial();
  const double m = std::sinh(h.a) * nz * x.time() - std::cosh(h.a) * dot(h.z, xr);
  return std::asinh(m / nz) * nz;
}

/// Same normed decision for a raw Lorentz normal.
inline double decision_lsvm_arcsinh(std::span<const double> w, const LorentzPoint& x) {
  const double ww = minkowski_product(w, w);
  if (!(ww > 0.0)) throw std::domain_error("decision_lsvm_arcsinh: normal is not spacelike");
  const double nw = std::sqrt(ww);
  return std::asinh(decision_lsvm(w, x) / nw) * nw;
}

// ---------------------------------------------------------------------------
// objectives (binary labels are +1 / -1)

inline double lsvm_objective(std::span<const double> w, const std::vector<LorentzPoint>& x,
                             const std::vector<int>& y, double C, Vector* grad = nullptr) {
  double value = 0.5 * minkowski_product(w, w);
  if (grad) {
    grad->assign(w.begin(), w.end());
    (*grad)[0] = -w[0];
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Vector xa = x[i].ambient();
    const double m = -y[i] * minkowski_product(w, xa);
    value += C * hinge_lorentz(m);
    if (grad) {
      const double s = hinge_lorentz_slope(m);
      if (s != 0.0) {
        // dm/dw = -y J x with J = diag(-1, 1, ..., 1)
        const double c = C * s * -static_cast<double>(y[i]);
        (*grad)[0] += c * -xa[0];
        for (std::size_t j = 1; j < xa.size(); ++j) (*grad)[j] += c * xa[j];
      }
    }
  }
  return value;
}

/// Gradient layout: (dz_1 .. dz_n, da).
inline double lsvmpp_objective(const HyperplaneParam& h, const std::vector<LorentzPoint>& x,
                               const std::vector<int>& y, double C, Vector* grad = nullptr) {
  const std::size_t n = h.z.size();
  const double nz = norm(h.z);
  const double sh = std::sinh(h.a), ch = std::cosh(h.a);
  double value = 0.5 * nz * nz;
  if (grad) {
    grad->assign(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) (*grad)[j] = h.z[j];
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto xr = x[i].spatial();
    const double x0 = x[i].time();
    const double zx = dot(h.z, xr);
    const double m = y[i] * (sh * nz * x0 - ch * zx);
    value += C * hinge_lorentz(m);
    if (grad) {
      const double s = hinge_lorentz_slope(m);
      if (s != 0.0) {
        const double c = C * s * y[i];
        for (std::size_t j = 0; j < n; ++j) {
          const double radial = nz > 0.0 ? h.z[j] / nz : 0.0;
          (*grad)[j] += c * (sh * x0 * radial - ch * xr[j]);
        }
        (*grad)[n] += c * (ch * nz * x0 - sh * zx);
      }
    }
  }
  return value;
}

inline double esvm_objective(std::span<const double> w, double b, const std::vector<Vector>& x,
                             const std::vector<int>& y, double C, Vector* grad = nullptr) {
  double value = 0.5 * norm_sq(w);
  if (grad) {
    grad->assign(w.begin(), w.end());
    grad->push_back(0.0);
  }
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = y[i] * (dot(w, x[i]) + b);
    if (m < 1.0) {
      value += C * (1.0 - m);
      if (grad) {
        for (std::size_t j = 0; j < n; ++j) (*grad)[j] -= C * y[i] * x[i][j];
        (*grad)[n] -= C * y[i];
      }
    }
  }
  return value;
}

// ---------------------------------------------------------------------------
// trainers

struct SvmConfig {
  double C = 0.5;
  double lr = 0.0;  // <= 0 selects the default for the algorithm
  std::size_t epochs = 500;
  std::uint64_t seed = 0;
};

inline constexpr double kFeasibilityMargin = 1e-8;

/// Pull w back so that [w, w] >= margin by shrinking |w0| only.
inline void project_feasible(Vector& w, double margin = kFeasibilityMargin) {
  const double rr = norm_sq(std::span<const double>(w).subspan(1));
  if (minkowski_product(w, w) > margin) return;
  if (rr > margin) {
    w[0] = std::copysign(std::sqrt(rr - margin), w[0]);
  } else {
    w[0] = 0.0;
  }
}

inline double max_sq_ambient(const std::vector<LorentzPoint>& x) {
  double m = 0.0;
  for (const auto& p : x) m = std::max(m, norm_sq(p.ambient()));
  return m;
}

/// Default step for the Lorentz variants: 10 / max |x|^2 over the ambient
/// coordinates. The hinge gradients grow with x0, so the step must shrink
/// with the data's extent. Capped at 0.01 for data hugging the origin, where
/// every point sits inside the margin and the summed hinge steps overshoot.
inline double default_lorentz_lr(const std::vector<LorentzPoint>& x) {
  return std::min(0.01, 10.0 / std::max(1.0, max_sq_ambient(x)));
}

inline Vector initial_direction(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector z(n);
  for (auto& v : z) v = gauss(rng);
  const double nz = norm(z);
  return nz > 0.0 ? scaled(z, 1.0 / nz) : Vector(n, 0.0);
}

/// Starting hyperplane shared by both Lorentz trainers. In tangent coordinates
/// at the origin, z is the unit vector from the +1 mean to the -1 mean and a
/// puts the base point at the projection of the midpoint onto that axis.
/// Along the axis the decision is |z| sinh(a - t), so +1 ends up positive.
/// Falls back to a seeded random direction when a class is missing.
inline HyperplaneParam initial_hyperplane(const std::vector<LorentzPoint>& x, const std::vector<int>& y,
                                          std::uint64_t seed) {
  const std::size_t n = x.front().dim();
  Vector mp(n, 0.0), mn(n, 0.0);
  double np = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Vector t = param_from_lorentz(x[i]).z;
    if (y[i] > 0) {
      axpy(1.0, t, mp);
      np += 1.0;
    } else {
      axpy(1.0, t, mn);
      nn += 1.0;
    }
  }
  if (np == 0.0 || nn == 0.0) return {initial_direction(n, seed), 0.0};
  mp = scaled(mp, 1.0 / np);
  mn = scaled(mn, 1.0 / nn);
  Vector dir = subtract(mn, mp);
  const double len = norm(dir);
  if (!(len > 1e-12)) return {initial_direction(n, seed), 0.0};
  dir = scaled(dir, 1.0 / len);
  const Vector mid = scaled(add(mp, mn), 0.5);
  return {dir, dot(mid, dir)};
}

namespace detail {
inline void require_binary(const std::vector<LorentzPoint>& x, const std::vector<int>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("svm: point/label count mismatch");
  for (int v : y) {
    if (v != 1 && v != -1) throw std::invalid_argument("svm: binary labels must be +1 or -1");
  }
}
inline void require_finite(double v, std::size_t epoch, const char* algo) {
  if (!std::isfinite(v)) {
    throw NumericalAbort(std::string(algo) + ": non-finite objective at epoch " + std::to_string(epoch));
  }
}
}  // namespace detail

struct LsvmTrace {
  std::vector<double> objective;
  std::vector<double> self_product;  // [w, w] after each epoch
};

inline Vector train_lsvm(const std::vector<LorentzPoint>& x, const std::vector<int>& y, const SvmConfig& cfg,
                         LsvmTrace* trace = nullptr) {
  detail::require_binary(x, y);
  const std::size_t n = x.empty() ? 0 : x.front().dim();
  if (n == 0) throw std::invalid_argument("train_lsvm: empty data");
  const double lr = cfg.lr > 0.0 ? cfg.lr : default_lorentz_lr(x);
  Vector w = normal_from_param(initial_hyperplane(x, y, cfg.seed));
  Vector g;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double f = lsvm_objective(w, x, y, cfg.C, &g);
    detail::require_finite(f, epoch, "lsvm");
    if (trace) trace->objective.push_back(f);
    axpy(-lr, g, w);
    project_feasible(w);
    if (!all_finite(w)) throw NumericalAbort("lsvm: non-finite normal at epoch " + std::to_string(epoch));
    if (trace) trace->self_product.push_back(minkowski_product(w, w));
  }
  return w;
}

inline HyperplaneParam train_lsvmpp(const std::vector<LorentzPoint>& x, const std::vector<int>& y,
                                    const SvmConfig& cfg, std::vector<double>* trace = nullptr) {
  detail::require_binary(x, y);
  const std::size_t n = x.empty() ? 0 : x.front().dim();
  if (n == 0) throw std::invalid_argument("train_lsvmpp: empty data");
  const double lr = cfg.lr > 0.0 ? cfg.lr : default_lorentz_lr(x);
  HyperplaneParam h = initial_hyperplane(x, y, cfg.seed);
  std::mt19937_64 reseed(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1e-3);
  Vector g;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double f = lsvmpp_objective(h, x, y, cfg.C, &g);
    detail::require_finite(f, epoch, "lsvmpp");
    if (trace) trace->push_back(f);
    for (std::size_t j = 0; j < n; ++j) h.z[j] -= lr * g[j];
    h.a -= lr * g[n];
    if (!all_finite(h.z) || !std::isfinite(h.a)) {
      throw NumericalAbort("lsvmpp: non-finite parameters at epoch " + std::to_string(epoch));
    }
    if (norm(h.z) < 1e-12) {
      for (auto& v : h.z) v = gauss(reseed);
    }
  }
  return h;
}

struct EuclideanSvm {
  Vector w;
  double b = 0.0;
};

inline EuclideanSvm train_esvm(const std::vector<Vector>& x, const std::vector<int>& y, const SvmConfig& cfg,
                               std::vector<double>* trace = nullptr) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("train_esvm: bad data");
  for (int v : y) {
    if (v != 1 && v != -1) throw std::invalid_argument("svm: binary labels must be +1 or -1");
  }
  const double lr = cfg.lr > 0.0 ? cfg.lr : 1e-3;
  EuclideanSvm m{Vector(x.front().size(), 0.0), 0.0};
  Vector g;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double f = esvm_objective(m.w, m.b, x, y, cfg.C, &g);
    detail::require_finite(f, epoch, "esvm");
    if (trace) trace->push_back(f);
    for (std::size_t j = 0; j < m.w.size(); ++j) m.w[j] -= lr * g[j];
    m.b -= lr * g.back();
  }
  return m;
}

// ---------------------------------------------------------------------------
// Platt scaling

struct PlattCalibration {
  double A = 0.0;
  double B = 0.0;

  double probability(double f) const {
    // 1 / (1 + exp(A f + B)) evaluated without overflow
    const double t = A * f + B;
    return t >= 0.0 ? std::exp(-t) / (1.0 + std::exp(-t)) : 1.0 / (1.0 + std::exp(t));
  }
};

/// Newton's method with backtracking on the regularized-target likelihood.
inline PlattCalibration platt_fit(const std::vector<double>& f, const std::vector<int>& y,
                                  std::size_t max_iter = 100, double tol = 1e-10) {
  if (f.size() != y.size() || f.empty()) throw std::invalid_argument("platt_fit: bad input");
  double n_pos = 0.0, n_neg = 0.0;
  for (int v : y) (v > 0 ? n_pos : n_neg) += 1.0;
  const double hi = (n_pos + 1.0) / (n_pos + 2.0);
  const double lo = 1.0 / (n_neg + 2.0);
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) t[i] = y[i] > 0 ? hi : lo;

  auto nll = [&](double A, double B) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double fa = f[i] * A + B;
      s += fa >= 0.0 ? t[i] * fa + std::log1p(std::exp(-fa)) : (t[i] - 1.0) * fa + std::log1p(std::exp(fa));
    }
    return s;
  };
  constexpr double sigma = 1e-12;  // keeps the Hessian positive definite
  double A = 0.0;
  double B = std::log((n_neg + 1.0) / (n_pos + 1.0));
  double fval = nll(A, B);
  for (std::size_t it = 0; it < max_iter; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double fa = f[i] * A + B;
      double p, q;
      if (fa >= 0.0) {
        p = std::exp(-fa) / (1.0 + std::exp(-fa));
        q = 1.0 / (1.0 + std::exp(-fa));
      } else {
        p = 1.0 / (1.0 + std::exp(fa));
        q = std::exp(fa) / (1.0 + std::exp(fa));
      }
      const double d2 = p * q;
      h11 += f[i] * f[i] * d2;
      h22 += d2;
      h21 += f[i] * d2;
      const double d1 = t[i] - p;
      g1 += f[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < tol && std::abs(g2) < tol) break;
    const double det = h11 * h22 - h21 * h21;
    const double dA = -(h22 * g1 - h21 * g2) / det;
    const double dB = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * dA + g2 * dB;
    double step = 1.0;
    bool moved = false;
    while (step >= 1e-10) {
      const double nA = A + step * dA, nB = B + step * dB;
      const double nf = nll(nA, nB);
      if (nf < fval + 1e-4 * step * gd) {
        A = nA;
        B = nB;
        fval = nf;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {A, B};
}

// ---------------------------------------------------------------------------
// one-vs-all

enum class SvmAlgo { esvm, lsvm, lsvmpp };
enum class DecisionMode { raw, arcsinh };

inline SvmAlgo svm_algo_from_string(std::string_view s) {
  if (s == "esvm") return SvmAlgo::esvm;
  if (s == "lsvm") return SvmAlgo::lsvm;
  if (s == "lsvmpp") return SvmAlgo::lsvmpp;
  throw std::invalid_argument("unknown svm algorithm '" + std::string(s) + "'");
}

inline std::string_view to_string(SvmAlgo a) {
  switch (a) {
    case SvmAlgo::esvm: return "esvm";
    case SvmAlgo::lsvm: return "lsvm";
    case SvmAlgo::lsvmpp: return "lsvmpp";
  }
  return "?";
}

inline DecisionMode decision_mode_from_string(std::string_view s) {
  if (s == "raw") return DecisionMode::raw;
  if (s == "arcsinh") return DecisionMode::arcsinh;
  throw std::invalid_argument("unknown decision mode '" + std::string(s) + "'");
}

struct BinaryModel {
  SvmAlgo algo = SvmAlgo::lsvmpp;
  EuclideanSvm euclid;    // esvm
  Vector normal;          // lsvm
  HyperplaneParam param;  // lsvmpp
  PlattCalibration platt;

  double decision(const LorentzPoint& x, DecisionMode mode) const {
    switch (algo) {
      case SvmAlgo::esvm: {
        const PoincarePoint p = lorentz_to_poincare(x);
        return dot(euclid.w, p.coords()) + euclid.b;
      }
      case SvmAlgo::lsvm:
        return mode == DecisionMode::arcsinh ? decision_lsvm_arcsinh(normal, x) : decision_lsvm(normal, x);
      case SvmAlgo::lsvmpp:
        return mode == DecisionMode::arcsinh ? decision_lsvmpp(param, x)
                                             : decision_lsvm(normal_from_param(param), x);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
};

struct OneVsAll {
  SvmAlgo algo = SvmAlgo::lsvmpp;
  DecisionMode mode = DecisionMode::arcsinh;
  std::vector<BinaryModel> models;
};

inline BinaryModel train_binary(SvmAlgo algo, const LabeledDataset& d, int positive, const SvmConfig& cfg) {
  std::vector<int> y(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) y[i] = d.labels[i] == positive ? 1 : -1;
  BinaryModel m;
  m.algo = algo;
  switch (algo) {
    case SvmAlgo::esvm: {
      std::vector<Vector> xs;
      for (const auto& p : d.points) xs.push_back(lorentz_to_poincare(p).vec());
      m.euclid = train_esvm(xs, y, cfg);
      break;
    }
    case SvmAlgo::lsvm: m.normal = train_lsvm(d.points, y, cfg); break;
    case SvmAlgo::lsvmpp: m.param = train_lsvmpp(d.points, y, cfg); break;
  }
  return m;
}

/// Train k binary classifiers, then calibrate each on its training decisions.
inline OneVsAll train_one_vs_all(SvmAlgo algo, const LabeledDataset& d, const SvmConfig& cfg,
                                 DecisionMode mode = DecisionMode::arcsinh) {
  d.validate();
  OneVsAll model{algo, mode, {}};
  for (int c = 0; c < d.classes; ++c) {
    SvmConfig per = cfg;
    per.seed = cfg.seed + static_cast<std::uint64_t>(c);
    BinaryModel m = train_binary(algo, d, c, per);
    std::vector<double> f(d.size());
    std::vector<int> y(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      f[i] = m.decision(d.points[i], mode);
      y[i] = d.labels[i] == c ? 1 : -1;
    }
    m.platt = platt_fit(f, y);
    model.models.push_back(std::move(m));
  }
  return model;
}

struct MulticlassPrediction {
  int label = 0;
  std::vector<double> probabilities;
};

/// Argmax of the calibrated per-class probabilities; ties go to the lowest id.
inline MulticlassPrediction predict_multiclass(const OneVsAll& model, const LorentzPoint& x) {
  if (model.models.empty()) throw std::invalid_argument("predict_multiclass: no models");
  MulticlassPrediction out;
  for (const auto& m : model.models) out.probabilities.push_back(m.platt.probability(m.decision(x, model.mode)));
  out.label = static_cast<int>(std::max_element(out.probabilities.begin(), out.probabilities.end()) -
                               out.probabilities.begin());
  return out;
}

struct Evaluation {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

inline Evaluation evaluate(const std::vector<int>& predicted, const std::vector<int>& labels, int classes) {
  if (predicted.empty() || predicted.size() != labels.size()) throw std::invalid_argument("evaluate: bad input");
  if (classes < 1) throw std::invalid_argument("evaluate: class count must be >= 1");
  std::vector<double> tp(static_cast<std::size_t>(classes)), fp(tp.size()), fn(tp.size());
  double correct = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int p = predicted[i], t = labels[i];
    if (p < 0 || p >= classes || t < 0 || t >= classes) throw std::invalid_argument("evaluate: label out of range");
    if (p == t) {
      correct += 1.0;
      tp[static_cast<std::size_t>(p)] += 1.0;
    } else {
      fp[static_cast<std::size_t>(p)] += 1.0;
      fn[static_cast<std::size_t>(t)] += 1.0;
    }
  }
  double f1 = 0.0;
  for (std::size_t c = 0; c < tp.size(); ++c) {
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    f1 += denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
  }
  return {correct / static_cast<double>(labels.size()), f1 / static_cast<double>(classes)};
}

inline Evaluation evaluate(const OneVsAll& model, const LabeledDataset& d) {
  std::vector<int> pred;
  pred.reserve(d.size());
  for (const auto& p : d.points) pred.push_back(predict_multiclass(model, p).label);
  return evaluate(pred, d.labels, d.classes);
}

}  // namespace hypstab
