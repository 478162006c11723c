#pragma once

// Command-line front end. Exit codes: 0 success, 1 numerical abort (or a
// failed probe), 2 usage or IO error.

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hypstab/embedding.hpp"
#include "hypstab/errors.hpp"
#include "hypstab/io.hpp"
#include "hypstab/stability.hpp"
#include "hypstab/svm.hpp"
#include "hypstab/tree.hpp"
#include "json.hpp"

namespace hypstab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

namespace cli_detail {

using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

inline std::uint64_t default_seed() {
  const char* env = std::getenv("HYPSTAB_SEED");
  if (!env || !*env) return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("HYPSTAB_SEED is not an unsigned integer: '") + env + "'");
  }
}

inline void write_json(const Json& j, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << j.dump(2) << '\n';
    return;
  }
  auto f = io::open_out(path);
  f << j.dump(2) << '\n';
}

inline Json metrics_json(const DistortionMetrics& m) {
  return Json{{"delta", m.delta}, {"delta_max", m.delta_max}, {"diameter", m.diameter}};
}

struct ProbeArgs {
  std::string suite = "all";
  std::optional<double> k;
  double eta = 1.0;
  double grad = 1.0;
  std::string out;
};

inline int cmd_probe(const ProbeArgs& a, std::ostream& out) {
  std::vector<ProbeReport> reports;
  const bool all = a.suite == "all";
  if (all || a.suite == "radius") reports.push_back(probe_radius(a.k.value_or(8.0)));
  if (all || a.suite == "boundary") reports.push_back(probe_poincare_boundary());
  if (all || a.suite == "constraint") {
    if (a.k) {
      reports.push_back(probe_lorentz_constraint(*a.k));
    } else {
      reports.push_back(probe_lorentz_constraint(2.0));
      reports.push_back(probe_lorentz_constraint(8.0));
    }
  }
  if (all || a.suite == "one-step") reports.push_back(probe_one_step(a.k.value_or(8.0), a.eta, a.grad));
  if (all || a.suite == "scaling") reports.push_back(probe_scaling(default_scaling_deltas(), a.grad));
  bool passed = true;
  Json arr = Json::array();
  for (const auto& r : reports) {
    passed = passed && r.passed;
    arr.push_back(to_json(r));
  }
  out << to_table(reports);
  if (!a.out.empty()) {
    write_json(Json{{"suite", a.suite}, {"passed", passed}, {"reports", arr}}, a.out, out);
  }
  return passed ? kExitOk : kExitNumerical;
}

struct GenTreeArgs {
  std::string tree;
  std::uint64_t seed = 0;
  std::string out;
};

inline int cmd_gen_tree(const GenTreeArgs& a, std::ostream& out) {
  const TreeInstance t = tree_from_spec(a.tree, a.seed);
  if (a.out.empty() || a.out == "-") {
    write_tree_csv(out, t);
  } else {
    auto f = io::open_out(a.out);
    write_tree_csv(f, t);
  }
  return kExitOk;
}

struct GenGmmArgs {
  int k = 3;
  std::size_t n = 1200;
  std::size_t dim = 2;
  std::uint64_t seed = 0;
  std::string chart = "poincare";
  std::string out;
};

inline int cmd_gen_gmm(const GenGmmArgs& a, std::ostream& out) {
  const LabeledDataset d = gen_gmm_poincare(a.k, a.n, a.seed, a.dim);
  const Chart chart = chart_from_string(a.chart);
  if (a.out.empty() || a.out == "-") {
    write_dataset_csv(out, d, chart);
  } else {
    auto f = io::open_out(a.out);
    write_dataset_csv(f, d, chart);
  }
  return kExitOk;
}

struct EmbedArgs {
  std::string tree;
  std::string chart = "all";
  std::size_t epochs = 3000;
  double lr = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

inline TreeInstance load_tree(const std::string& spec, std::uint64_t seed) {
  if (std::filesystem::is_regular_file(spec)) {
    auto f = io::open_in(spec);
    return read_tree_csv(f);
  }
  if (spec.size() > 4 && spec.substr(spec.size() - 4) == ".csv") throw IoError("tree file not found: " + spec);
  return tree_from_spec(spec, seed);
}

inline int cmd_embed(const EmbedArgs& a, std::ostream& out) {
  const TreeInstance tree = load_tree(a.tree, a.seed);
  std::vector<Chart> charts;
  if (a.chart == "all") {
    charts = {Chart::poincare, Chart::lorentz, Chart::param};
  } else {
    charts = {chart_from_string(a.chart)};
  }
  std::error_code ec;
  std::filesystem::create_directories(a.out, ec);
  if (ec) throw IoError("cannot create output directory '" + a.out + "': " + ec.message());
  const std::filesystem::path dir(a.out);
  Json runs = Json::object();
  for (Chart c : charts) {
    EmbeddingConfig cfg;
    cfg.lr = a.lr;
    cfg.epochs = a.epochs;
    cfg.seed = a.seed;
    const EmbeddingRun run = train_embedding(tree, c, cfg);
    const std::string name(to_string(c));
    {
      auto f = io::open_out((dir / (name + "_loss.csv")).string());
      f << "epoch,loss\n";
      for (std::size_t e = 0; e < run.loss_history.size(); ++e) f << e << ',' << io::fmt(run.loss_history[e]) << '\n';
    }
    {
      auto f = io::open_out((dir / (name + "_coords.csv")).string());
      write_points_csv(f, c, run.embedding.coords);
    }
    if (c == Chart::lorentz) {
      std::vector<Vector> ball;
      for (const auto& y : run.embedding.coords) {
        ball.push_back(lorentz_to_poincare(LorentzPoint::from_spatial(Vector(y.begin() + 1, y.end()))).vec());
      }
      auto f = io::open_out((dir / (name + "_ball.csv")).string());
      write_points_csv(f, Chart::poincare, ball);
    }
    Json hist = Json::array();
    for (const auto& h : run.history) {
      Json row = metrics_json(h.metrics);
      row["epoch"] = h.epoch;
      row["loss"] = h.loss;
      hist.push_back(row);
    }
    Json rec = metrics_json(run.final_metrics);
    rec["final_loss"] = run.loss_history.back();
    rec["history"] = hist;
    runs[name] = rec;
    out << name << ": delta=" << io::fmt(run.final_metrics.delta) << " delta_max=" << io::fmt(run.final_metrics.delta_max)
        << " diameter=" << io::fmt(run.final_metrics.diameter) << '\n';
  }
  const Json j{{"tree", tree.name}, {"nodes", tree.nodes}, {"epochs", a.epochs}, {"lr", a.lr},
               {"seed", a.seed},    {"runs", runs}};
  write_json(j, (dir / "metrics.json").string(), out);
  return kExitOk;
}

struct SvmArgs {
  std::string data;
  std::string algo = "lsvmpp";
  std::optional<double> C;
  std::optional<double> lr;
  std::size_t epochs = 500;
  std::uint64_t seed = 0;
  std::string platt = "arcsinh";
  double test_fraction = 0.2;
  std::string out;
};

inline int cmd_svm(const SvmArgs& a, std::ostream& out) {
  auto f = io::open_in(a.data);
  const LabeledDataset d = read_dataset_csv(f);
  const SvmAlgo algo = svm_algo_from_string(a.algo);
  const DecisionMode mode = decision_mode_from_string(a.platt);
  auto [train, test] = train_test_split(d, a.test_fraction, a.seed);
  if (train.size() == 0 || test.size() == 0) throw UsageError("train/test split left an empty side");
  SvmConfig cfg;
  cfg.C = a.C.value_or(algo == SvmAlgo::esvm ? 5.0 : 0.5);
  cfg.lr = a.lr.value_or(algo == SvmAlgo::esvm ? 1e-3 : default_lorentz_lr(train.points));
  cfg.epochs = a.epochs;
  cfg.seed = a.seed;
  const OneVsAll model = train_one_vs_all(algo, train, cfg, mode);
  const Evaluation te = evaluate(model, test);
  const Evaluation tr = evaluate(model, train);
  const Json j{{"algo", a.algo},
               {"platt", a.platt},
               {"C", cfg.C},
               {"lr", cfg.lr},
               {"epochs", cfg.epochs},
               {"seed", a.seed},
               {"classes", d.classes},
               {"train_size", train.size()},
               {"test_size", test.size()},
               {"accuracy", te.accuracy},
               {"macro_f1", te.macro_f1},
               {"train_accuracy", tr.accuracy},
               {"train_macro_f1", tr.macro_f1}};
  out << a.algo << ": accuracy=" << io::fmt(te.accuracy) << " macro_f1=" << io::fmt(te.macro_f1) << '\n';
  if (!a.out.empty()) write_json(j, a.out, out);
  return kExitOk;
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli_detail;
  std::uint64_t seed = 0;
  try {
    seed = default_seed();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App app{"Hyperbolic numerics toolkit: stability probes, tree embeddings, hyperbolic SVMs", "hypstab"};
  app.require_subcommand(1);

  ProbeArgs probe;
  auto* p = app.add_subcommand("probe", "binary64 representation and gradient probes");
  p->add_option("--suite", probe.suite, "probe suite")
      ->check(CLI::IsMember({"radius", "boundary", "constraint", "one-step", "scaling", "all"}))
      ->capture_default_str();
  p->add_option("--k", probe.k, "distance exponent: points sit 10^-k from the boundary");
  p->add_option("--eta", probe.eta, "step size for the one-step comparison")->capture_default_str();
  p->add_option("--grad", probe.grad, "Euclidean gradient magnitude E")->capture_default_str();
  p->add_option("--out", probe.out, "JSON report path");

  GenTreeArgs gt;
  gt.seed = seed;
  auto* g = app.add_subcommand("gen-tree", "write a synthetic tree as CSV");
  g->add_option("--tree", gt.tree, "path:N | star:N | balanced:B:D | caterpillar:N:L | random:N")->required();
  g->add_option("--seed", gt.seed, "seed for random trees")->capture_default_str();
  g->add_option("--out", gt.out, "output CSV (stdout if omitted)");

  GenGmmArgs gm;
  gm.seed = seed;
  auto* m = app.add_subcommand("gen-gmm", "write a Gaussian-mixture dataset on the ball as CSV");
  m->add_option("--k", gm.k, "number of classes")->capture_default_str();
  m->add_option("--n", gm.n, "total number of points")->capture_default_str();
  m->add_option("--dim", gm.dim, "dimension")->capture_default_str();
  m->add_option("--seed", gm.seed, "seed")->capture_default_str();
  m->add_option("--chart", gm.chart, "feature chart")
      ->check(CLI::IsMember({"poincare", "lorentz", "eparam"}))
      ->capture_default_str();
  m->add_option("--out", gm.out, "output CSV (stdout if omitted)");

  EmbedArgs em;
  em.seed = seed;
  auto* e = app.add_subcommand("embed", "fit a tree embedding in one or all charts");
  e->add_option("--tree", em.tree, "tree spec or tree CSV file")->required();
  e->add_option("--chart", em.chart, "chart")
      ->check(CLI::IsMember({"poincare", "lorentz", "eparam", "all"}))
      ->capture_default_str();
  e->add_option("--epochs", em.epochs, "epochs")->capture_default_str();
  e->add_option("--lr", em.lr, "learning rate")->capture_default_str();
  e->add_option("--seed", em.seed, "seed (tree generation only)")->capture_default_str();
  e->add_option("--out", em.out, "output directory")->required();

  SvmArgs sv;
  sv.seed = seed;
  auto* s = app.add_subcommand("svm", "train and evaluate a one-vs-all classifier");
  s->add_option("--data", sv.data, "dataset CSV")->required();
  s->add_option("--algo", sv.algo, "algorithm")->check(CLI::IsMember({"esvm", "lsvm", "lsvmpp"}))->capture_default_str();
  s->add_option("--C", sv.C, "regularization constant (5 for esvm, 0.5 otherwise)");
  s->add_option("--lr", sv.lr, "learning rate (1e-3 for esvm, min(0.01, 10/max|x|^2) otherwise)");
  s->add_option("--epochs", sv.epochs, "epochs")->capture_default_str();
  s->add_option("--seed", sv.seed, "seed for the split and initial hyperplanes")->capture_default_str();
  s->add_option("--platt", sv.platt, "decision values fed to Platt scaling")
      ->check(CLI::IsMember({"raw", "arcsinh"}))
      ->capture_default_str();
  s->add_option("--test-fraction", sv.test_fraction, "held-out fraction per class")->capture_default_str();
  s->add_option("--out", sv.out, "metrics JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& pe) {
    err << "error: " << pe.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (p->parsed()) return cmd_probe(probe, out);
    if (g->parsed()) return cmd_gen_tree(gt, out);
    if (m->parsed()) return cmd_gen_gmm(gm, out);
    if (e->parsed()) return cmd_embed(em, out);
    if (s->parsed()) return cmd_svm(sv, out);
  } catch (const NumericalAbort& ex) {
    err << "numerical abort: " << ex.what() << '\n';
    return kExitNumerical;
  } catch (const std::domain_error& ex) {
    err << "numerical error: " << ex.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace hypstab
