// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "hypstab/hypstab.hpp"

using namespace hypstab;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_s;
  const bool ok = o.passed && in_time;
  if (!ok) ++failures;
  std::printf("%s criterion %d: %s (%.2f s, limit %.0f s)%s\n    %s\n", ok ? "PASS" : "FAIL", id, title, secs,
              limit_s, in_time ? "" : " [over time limit]", o.detail.c_str());
  std::fflush(stdout);
}

Vector random_ball_point(std::mt19937_64& rng, double max_dist) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector v{g(rng), g(rng)};
  const double r = max_dist * std::sqrt(u(rng));  // hyperbolic distance from the origin
  return scaled(v, std::tanh(r / 2.0) / norm(v));
}

double rel_diff(std::span<const double> a, std::span<const double> b) {
  return max_abs_diff(a, b) / std::max(1e-8, norm(b));
}

Outcome boundary() {
  const ProbeReport r = probe_poincare_boundary();
  const int k = static_cast<int>(r.get("max_k"));
  return {k == 16, "max representable k = " + std::to_string(k)};
}

Outcome constraint() {
  const double q8 = lorentz_self_product(8), q2 = lorentz_self_product(2);
  std::ostringstream os;
  os << "[x,x] at x0=1e8: " << q8 << ", at x0=1e2: " << q2;
  return {q8 == 0.0 && q2 == -1.0, os.str()};
}

Outcome radius() {
  const double p16 = poincare_radius(16).exact, l8 = lorentz_radius(8).exact;
  bool ok = std::abs(p16 - 37.0) <= 0.6 && std::abs(l8 - 18.0) <= 1.2;
  std::ostringstream os;
  os << "poincare r(16) = " << p16 << ", lorentz r(8) = " << l8 << "; orders:";
  const double ks[] = {2.0, 4.0, 6.0};
  for (int i = 0; i < 2; ++i) {
    const double op = gap_order(poincare_radius(ks[i]).gap, poincare_radius(ks[i + 1]).gap, ks[i], ks[i + 1]);
    const double ol = gap_order(lorentz_radius(ks[i]).gap, lorentz_radius(ks[i + 1]).gap, ks[i], ks[i + 1]);
    ok = ok && std::abs(op - 1.0) <= 0.1 && std::abs(ol - 2.0) <= 0.1;
    os << " [" << ks[i] << "->" << ks[i + 1] << ": " << op << ", " << ol << "]";
  }
  return {ok, os.str()};
}

Outcome one_step() {
  const OneStepResult r = one_step_comparison(8, 1.0, 1.0);
  bool ok = r.poincare.displacement == 0.0 && r.lorentz.displacement >= 0.5 && r.param.displacement >= 0.4e-8;
  std::ostringstream os;
  os << "k=8: poincare dx=" << r.poincare.displacement << ", lorentz dx0=" << r.lorentz.displacement
     << ", param dz=" << r.param.displacement << "; residual factors per halving of delta:";
  // k -> k + log10(2) halves delta
  const double step = std::log10(2.0);
  for (int i = 0; i < 2; ++i) {
    const double k = 3.0 + i * step;
    const OneStepResult a = one_step_comparison(k, 1.0, 1.0), b = one_step_comparison(k + step, 1.0, 1.0);
    const double fp = a.poincare.residual / b.poincare.residual;
    const double fl = a.lorentz.residual / b.lorentz.residual;
    const double fz = a.param_leading_residual / b.param_leading_residual;
    ok = ok && std::abs(fp - 4.0) <= 1.2 && std::abs(fl - 2.0) <= 0.6 && std::abs(fz - 2.0) <= 0.6;
    os << " [" << fp << ", " << fl << ", " << fz << "]";
  }
  return {ok, os.str()};
}

Outcome scaling() {
  const ScalingResult s = gradient_scaling_sweep(default_scaling_deltas(), 1.0);
  std::ostringstream os;
  os << "slopes poincare=" << s.slope_poincare << " lorentz=" << s.slope_lorentz << " param=" << s.slope_param;
  return {std::abs(s.slope_poincare - 2.0) <= 0.1 && std::abs(s.slope_lorentz) <= 0.1 &&
              std::abs(s.slope_param - 1.0) <= 0.1,
          os.str()};
}

Outcome gradients() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g(0.0, 1.0);
  const double tol = 1e-4;
  int n_embed = 0, n_lsvm = 0, n_pp = 0, n_jac = 0;
  double worst = 0.0;

  // embedding loss in each chart on random perturbations of random trees
  for (int t = 0; t < 20; ++t) {
    const TreeInstance tree = tree_from_spec("random:" + std::to_string(5 + t % 6), static_cast<std::uint64_t>(t));
    const DistanceTable d = tree_metric(tree);
    for (Chart c : {Chart::poincare, Chart::lorentz, Chart::param}) {
      Embedding base = initial_embedding(tree.layout, Chart::param);
      for (auto& z : base.coords) {
        z[0] += 0.2 * g(rng);
        z[1] += 0.2 * g(rng);
      }
      Embedding e{c, {}};
      for (const auto& z : base.coords) {
        e.coords.push_back(c == Chart::poincare  ? param_to_poincare(EuclideanParam{z}).vec()
                           : c == Chart::lorentz ? param_to_lorentz(EuclideanParam{z}).ambient()
                                                 : z);
      }
      const LossResult lr = embedding_loss(e, d);
      const std::size_t i = static_cast<std::size_t>(t) % e.size();
      const Vector fd = finite_diff_grad(
          [&](std::span<const double> p) {
            Embedding q = e;
            q.coords[i].assign(p.begin(), p.end());
            return embedding_loss(q, d).value;
          },
          e.coords[i]);
      worst = std::max(worst, rel_diff(lr.gradients[i], fd));
      ++n_embed;
    }
  }

  // SVM objectives away from hinge kinks
  std::vector<LorentzPoint> x;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(LorentzPoint::from_spatial({g(rng), g(rng)}));
    y.push_back(g(rng) > 0.0 ? 1 : -1);
  }
  while (n_pp < 60) {
    const HyperplaneParam h{{g(rng), g(rng)}, 0.5 * g(rng)};
    const Vector w = normal_from_param(h);
    bool kink = false;
    for (std::size_t i = 0; i < x.size(); ++i) kink = kink || std::abs(-y[i] * minkowski_product(w, x[i].ambient()) - 1.0) < 1e-4;
    if (kink) continue;
    Vector gpp, gw;
    lsvmpp_objective(h, x, y, 0.5, &gpp);
    Vector p = h.z;
    p.push_back(h.a);
    const Vector fpp = finite_diff_grad(
        [&](std::span<const double> v) { return lsvmpp_objective({Vector(v.begin(), v.end() - 1), v.back()}, x, y, 0.5); },
        p);
    worst = std::max(worst, rel_diff(gpp, fpp));
    ++n_pp;
    lsvm_objective(w, x, y, 0.5, &gw);
    const Vector fw = finite_diff_grad([&](std::span<const double> v) { return lsvm_objective(v, x, y, 0.5); }, w);
    worst = std::max(worst, rel_diff(gw, fw));
    ++n_lsvm;
  }

  // Jacobian of F_D, row by row
  for (int t = 0; t < 60; ++t) {
    const Vector z{3.0 * g(rng), 3.0 * g(rng)};
    const Matrix j = jacobian_param_to_poincare(EuclideanParam{z});
    for (std::size_t r = 0; r < 2; ++r) {
      const Vector fd = finite_diff_grad(
          [&](std::span<const double> v) {
            return param_to_poincare(EuclideanParam{Vector(v.begin(), v.end())}).coords()[r];
          },
          z);
      const Vector row{j(r, 0), j(r, 1)};
      worst = std::max(worst, rel_diff(row, fd));
    }
    ++n_jac;
  }
  std::ostringstream os;
  os << "instances: embedding " << n_embed << ", lsvm " << n_lsvm << ", lsvmpp " << n_pp << ", jacobian " << n_jac
     << "; worst relative error " << worst;
  return {worst <= tol && n_embed >= 50 && n_lsvm >= 50 && n_pp >= 50 && n_jac >= 50, os.str()};
}

Outcome equivalence() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    // f = d(., target)^2, eta in (0, 1]
    const PoincarePoint x(random_ball_point(rng, 7.0));
    const Objective f = squared_distance_objective(PoincarePoint(random_ball_point(rng, 3.0)));
    const double e = 1.0 - u(rng);
    const PoincarePoint a = rsgd_step(x, f, e);
    const PoincarePoint b = lorentz_to_poincare(rsgd_step(poincare_to_lorentz(x), f, e));
    worst = std::max(worst, max_abs_diff(a.coords(), b.coords()));
  }
  std::ostringstream os;
  os << "1000 trials, max coordinate difference " << worst;
  return {worst <= 1e-7, os.str()};
}

Outcome tree_ordering() {
  const std::pair<const char*, std::uint64_t> trees[] = {
      {"balanced:2:4", 0}, {"balanced:3:3", 0}, {"caterpillar:10:2", 0}, {"star:12", 0},
      {"path:12", 0},      {"random:40", 1},    {"random:60", 1},        {"caterpillar:8:4", 0}};
  int ordered = 0, diameter_ok = 0;
  std::ostringstream os;
  EmbeddingConfig cfg;
  cfg.epochs = 3000;
  cfg.lr = 1.0;
  for (const auto& [spec, seed] : trees) {
    const TreeInstance t = tree_from_spec(spec, seed);
    const DistortionMetrics p = train_embedding(t, Chart::poincare, cfg).final_metrics;
    const DistortionMetrics l = train_embedding(t, Chart::lorentz, cfg).final_metrics;
    const DistortionMetrics z = train_embedding(t, Chart::param, cfg).final_metrics;
    const bool ord = z.delta <= l.delta && l.delta <= p.delta + 1e-3;
    const bool dia = p.diameter < l.diameter;
    ordered += ord;
    diameter_ok += dia;
    char line[256];
    std::snprintf(line, sizeof line, "\n    %-17s delta P=%.9f L=%.9f E=%.9f  diam P=%.12f L=%.12f  %s%s", spec, p.delta,
                  l.delta, z.delta, p.diameter, l.diameter, ord ? "order" : "no-order", dia ? "" : " diam-fail");
    os << line;
  }
  std::ostringstream head;
  head << "ordering holds on " << ordered << "/8 (need 6), poincare diameter < lorentz on " << diameter_ok
       << "/8 (need 8)" << os.str();
  return {ordered >= 6 && diameter_ok == 8, head.str()};
}

Evaluation sim_run(SvmAlgo algo, int k, std::uint64_t seed) {
  const LabeledDataset d = gen_gmm_poincare(k, 1200, seed);
  const auto [train, test] = train_test_split(d, 0.2, seed);
  SvmConfig cfg;
  cfg.C = algo == SvmAlgo::esvm ? 5.0 : 0.5;
  cfg.epochs = 500;
  cfg.seed = seed;
  return evaluate(train_one_vs_all(algo, train, cfg, DecisionMode::arcsinh), test);
}

Outcome svm_reproduction() {
  const Evaluation s1 = sim_run(SvmAlgo::lsvmpp, 3, 21);
  const Evaluation s1e = sim_run(SvmAlgo::esvm, 3, 21);
  const Evaluation s2pp = sim_run(SvmAlgo::lsvmpp, 5, 13), s2l = sim_run(SvmAlgo::lsvm, 5, 13);
  const Evaluation s3pp = sim_run(SvmAlgo::lsvmpp, 10, 1199), s3l = sim_run(SvmAlgo::lsvm, 10, 1199);
  std::ostringstream os;
  os << "sim-1 lsvmpp " << s1.accuracy << " (esvm " << s1e.accuracy << "); sim-2 lsvmpp " << s2pp.accuracy
     << " vs lsvm " << s2l.accuracy << "; sim-3 lsvmpp " << s3pp.accuracy << " vs lsvm " << s3l.accuracy;
  return {s1.accuracy >= 0.92 && s1.accuracy <= 0.97 && s2pp.accuracy >= s2l.accuracy - 0.01 &&
              s3pp.accuracy >= s3l.accuracy - 0.01,
          os.str()};
}

Outcome objective_equivalence() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    std::vector<LorentzPoint> x;
    std::vector<int> y;
    const int n = 10 + t % 40;
    for (int i = 0; i < n; ++i) {
      x.push_back(LorentzPoint::from_spatial({g(rng), g(rng)}));
      y.push_back(g(rng) > 0.0 ? 1 : -1);
    }
    HyperplaneParam h{{g(rng), g(rng)}, g(rng)};
    if (norm(h.z) == 0.0) h.z[0] = 1.0;
    const double C = std::exp(g(rng));
    const double a = lsvmpp_objective(h, x, y, C), b = lsvm_objective(normal_from_param(h), x, y, C);
    worst = std::max(worst, std::abs(a - b));
  }
  std::ostringstream os;
  os << "500 configurations, max |difference| " << worst;
  return {worst <= 1e-10, os.str()};
}

}  // namespace

int main() {
  criterion(1, "boundary probe reports k = 16", 1, boundary);
  criterion(2, "constraint probe collapses at x0 = 1e8", 1, constraint);
  criterion(3, "radius formulas and residual orders", 1, radius);
  criterion(4, "one-step stall and residual factors", 5, one_step);
  criterion(5, "gradient-scaling slopes", 5, scaling);
  criterion(6, "analytic gradients match finite differences", 30, gradients);
  criterion(7, "Lorentz and Poincare RSGD steps agree", 10, equivalence);
  criterion(8, "tree-embedding distortion ordering", 180, tree_ordering);
  criterion(9, "SVM reproduction on regenerated sims", 120, svm_reproduction);
  criterion(10, "LSVMPP / LSVM objective equivalence", 5, objective_equivalence);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
