#pragma once

// Distortion-minimizing tree embeddings in the three charts.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypstab/errors.hpp"
#include "hypstab/geometry.hpp"
#include "hypstab/linalg.hpp"
#include "hypstab/optim.hpp"
#include "hypstab/tree.hpp"

namespace hypstab {

inline constexpr double kAcoshGuard = 1e-12;

/// Node coordinates in one chart. Poincare: ball coordinates. Lorentz:
/// ambient (x0, x1..xn). Param: the Euclidean vector z.
struct Embedding {
  Chart chart = Chart::poincare;
  std::vector<Vector> coords;

  std::size_t size() const { return coords.size(); }
};

struct DistortionMetrics {
  double delta = 0.0;
  double delta_max = 0.0;
  double diameter = 0.0;
};

struct LossResult {
  double value = 0.0;
  std::vector<Vector> gradients;  // Euclidean, same layout as the coordinates
};

/// Initial embedding of a planar layout: F_D / F_L for the hyperbolic charts,
/// the raw layout for the parametrized one.
inline Embedding initial_embedding(const std::vector<Point2>& layout, Chart chart) {
  Embedding e{chart, {}};
  e.coords.reserve(layout.size());
  for (const auto& p : layout) {
    EuclideanParam z{{p[0], p[1]}};
    switch (chart) {
      case Chart::poincare: e.coords.push_back(param_to_poincare(z).vec()); break;
      case Chart::lorentz: e.coords.push_back(param_to_lorentz(z).ambient()); break;
      case Chart::param: e.coords.push_back(z.z); break;
    }
  }
  return e;
}

/// Hyperbolic distance between nodes i and j read in the embedding's chart.
inline double embedded_distance(const Embedding& e, std::size_t i, std::size_t j) {
  switch (e.chart) {
    case Chart::poincare:
      return dist_poincare(PoincarePoint::saturating(e.coords[i]), PoincarePoint::saturating(e.coords[j]));
    case Chart::lorentz: return std::acosh(std::max(1.0, -minkowski_product(e.coords[i], e.coords[j])));
    case Chart::param:
      return dist_poincare(param_to_poincare(EuclideanParam{e.coords[i]}),
                           param_to_poincare(EuclideanParam{e.coords[j]}));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline DistanceTable embedded_distances(const Embedding& e) {
  DistanceTable d(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size(); ++j) d(i, j) = d(j, i) = embedded_distance(e, i, j);
  }
  return d;
}

/// Mean over unordered pairs of (dE/zE - dR/zR)^2 with its gradient.
inline LossResult embedding_loss(const Embedding& e, const DistanceTable& d_r) {
  const std::size_t n = e.size();
  if (n < 2) throw std::invalid_argument("embedding_loss needs at least 2 nodes");
  if (d_r.size() != n) throw std::invalid_argument("embedding_loss: distance table size mismatch");
  const std::size_t dim = e.coords[0].size();
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);

  // Poincare-ball images (Poincare and param charts) and, for param, the
  // Jacobians of F_D.
  std::vector<Vector> ball;
  std::vector<Matrix> jac;
  if (e.chart == Chart::poincare) {
    ball = e.coords;
  } else if (e.chart == Chart::param) {
    for (const auto& z : e.coords) {
      ball.push_back(param_to_poincare(EuclideanParam{z}).vec());
      jac.push_back(jacobian_param_to_poincare(EuclideanParam{z}));
    }
  }

  // per pair: distance and the gradients of that distance wrt both endpoints
  const std::size_t cdim = e.chart == Chart::param ? dim : e.coords[0].size();
  const std::size_t m = static_cast<std::size_t>(pairs);
  std::vector<double> dist(m);
  std::vector<Vector> gi(m, Vector(cdim)), gj(m, Vector(cdim));
  double mean_e = 0.0, mean_r = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      if (e.chart == Chart::lorentz) {
        const double u = -minkowski_product(e.coords[i], e.coords[j]);
        dist[k] = std::acosh(std::max(1.0, u));
        const double dd = acosh_derivative(u, kAcoshGuard);
        // d(-[x,y])/dx = (y0, -y1, ..., -yn)
        for (std::size_t c = 0; c < cdim; ++c) {
          const double s = c == 0 ? 1.0 : -1.0;
          gi[k][c] = dd * s * e.coords[j][c];
          gj[k][c] = dd * s * e.coords[i][c];
        }
      } else {
        dist[k] = dist_poincare_with_grad(ball[i], ball[j], gi[k], kAcoshGuard);
        dist_poincare_with_grad(ball[j], ball[i], gj[k], kAcoshGuard);
      }
      mean_e += dist[k];
      mean_r += d_r(i, j);
    }
  }
  mean_e /= pairs;
  mean_r /= pairs;
  if (!(mean_r > 0.0)) throw std::invalid_argument("embedding_loss: reference distances are all zero");

  LossResult out{0.0, std::vector<Vector>(n, Vector(cdim, 0.0))};
  std::vector<double> resid(m);
  double weighted = 0.0;  // sum a_ij d_ij
  k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      resid[k] = dist[k] / mean_e - d_r(i, j) / mean_r;
      out.value += resid[k] * resid[k];
      weighted += resid[k] * dist[k];
    }
  }
  out.value /= pairs;
  // dL/dd_kl = 2/P (a_kl / zE - sum(a d) / (P zE^2))
  const double shared = weighted / (pairs * mean_e * mean_e);
  k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const double w = 2.0 / pairs * (resid[k] / mean_e - shared);
      axpy(w, gi[k], out.gradients[i]);
      axpy(w, gj[k], out.gradients[j]);
    }
  }
  if (e.chart == Chart::param) {
    for (std::size_t i = 0; i < n; ++i) out.gradients[i] = jac[i].transpose_times(out.gradients[i]);
  }
  return out;
}

/// delta = mean(dR/dE) * mean(dE/dR); delta_max uses suprema; diameter = max dE.
inline DistortionMetrics distortion_metrics(const DistanceTable& d_e, const DistanceTable& d_r) {
  const std::size_t n = d_e.size();
  if (d_r.size() != n) throw std::invalid_argument("distortion_metrics: size mismatch");
  if (n < 2) throw std::invalid_argument("distortion_metrics needs at least 2 nodes");
  double contraction = 0.0, expansion = 0.0, sup_c = 0.0, sup_e = 0.0, diameter = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double de = d_e(i, j), dr = d_r(i, j);
      if (!(de > 0.0)) {
        throw std::domain_error("distortion_metrics: nodes " + std::to_string(i) + " and " + std::to_string(j) +
                                " coincide in the embedding");
      }
      if (!(dr > 0.0)) throw std::invalid_argument("distortion_metrics: reference distance must be positive");
      contraction += dr / de;
      expansion += de / dr;
      sup_c = std::max(sup_c, dr / de);
      sup_e = std::max(sup_e, de / dr);
      diameter = std::max(diameter, de);
      pairs += 1.0;
    }
  }
  // AM-GM gives delta >= 1 exactly; the product of two rounded means can land an ulp below.
  return {std::max(1.0, contraction / pairs * (expansion / pairs)), std::max(1.0, sup_c * sup_e), diameter};
}

struct EmbeddingConfig {
  double lr = 1.0;
  std::size_t epochs = 3000;
  std::uint64_t seed = 0;  // recorded only; training itself is deterministic
  std::size_t metrics_every = 100;
};

struct MetricsSnapshot {
  std::size_t epoch = 0;
  double loss = 0.0;
  DistortionMetrics metrics;
};

struct EmbeddingRun {
  Chart chart = Chart::poincare;
  EmbeddingConfig config;
  Embedding embedding;
  std::vector<double> loss_history;  // entry e = loss before update e (plus final)
  std::vector<MetricsSnapshot> history;
  DistortionMetrics final_metrics;
};

namespace detail {
inline void check_finite(const Embedding& e, std::size_t epoch, const char* what) {
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!all_finite(e.coords[i])) {
      std::ostringstream os;
      os << "non-finite " << what << " for node " << i << " at epoch " << epoch << " in chart "
         << to_string(e.chart);
      throw NumericalAbort(os.str());
    }
  }
}

inline void descend(Embedding& e, const LossResult& loss, double lr) {
  for (std::size_t i = 0; i < e.size(); ++i) {
    switch (e.chart) {
      case Chart::poincare: {
        const PoincarePoint x = PoincarePoint::saturating(e.coords[i]);
        const TangentVector v = riem_grad_poincare(x, {Chart::poincare, loss.gradients[i]});
        e.coords[i] = exp_poincare(x, v, -lr).vec();
        break;
      }
      case Chart::lorentz: {
        const LorentzPoint y = LorentzPoint::from_spatial(Vector(e.coords[i].begin() + 1, e.coords[i].end()));
        const Vector h = lorentz_riemannian_from_ambient(y.ambient(), loss.gradients[i]);
        e.coords[i] = exp_lorentz(y, {Chart::lorentz, h}, -lr).ambient();
        break;
      }
      case Chart::param: axpy(-lr, loss.gradients[i], e.coords[i]); break;
    }
  }
}
}  // namespace detail

inline EmbeddingRun train_embedding(const TreeInstance& t, Chart chart, const EmbeddingConfig& cfg) {
  t.validate();
  if (t.layout.size() != t.nodes) throw std::invalid_argument("train_embedding: tree has no layout");
  if (!(cfg.lr >= 0.0) || !std::isfinite(cfg.lr)) throw std::invalid_argument("learning rate must be finite and >= 0");
  const DistanceTable d_r = tree_metric(t);
  EmbeddingRun run{chart, cfg, initial_embedding(t.layout, chart), {}, {}, {}};
  const std::size_t every = cfg.metrics_every == 0 ? 100 : cfg.metrics_every;
  for (std::size_t epoch = 0;; ++epoch) {
    const LossResult loss = embedding_loss(run.embedding, d_r);
    if (!std::isfinite(loss.value)) {
      throw NumericalAbort("non-finite loss at epoch " + std::to_string(epoch) + " in chart " +
                           std::string(to_string(chart)));
    }
    run.loss_history.push_back(loss.value);
    if (epoch % every == 0 || epoch == cfg.epochs) {
      run.history.push_back({epoch, loss.value, distortion_metrics(embedded_distances(run.embedding), d_r)});
    }
    if (epoch == cfg.epochs) break;
    for (const auto& g : loss.gradients) {
      if (!all_finite(g)) {
        throw NumericalAbort("non-finite gradient at epoch " + std::to_string(epoch) + " in chart " +
                             std::string(to_string(chart)));
      }
    }
    try {
      detail::descend(run.embedding, loss, cfg.lr);
    } catch (const std::domain_error& err) {
      throw NumericalAbort("step failed at epoch " + std::to_string(epoch) + ": " + err.what());
    }
    detail::check_finite(run.embedding, epoch + 1, "coordinate");
  }
  run.final_metrics = run.history.back().metrics;
  return run;
}

}  // namespace hypstab
