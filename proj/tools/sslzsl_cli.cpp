// sslzsl: command-line front end.
//
//   sslzsl gen       synthetic dataset + ground-truth model
//   sslzsl train     fit V, b with the semantic softmax loss
//   sslzsl eval      zero-shot classification + retrieval report
//   sslzsl retrieve  retrieval mAP, per-class PR curves (CSV, optional SVG)
//   sslzsl gradcheck analytic vs finite-difference gradient
//   sslzsl baseline  LR / RLR / ESZSL closed-form baselines
//
// Exit codes: 0 success, 1 threshold or numerical failure, 2 usage or data error.
// Every subcommand accepts --config FILE (key=value, keys are long option
// names); options given on the command line win over the file.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sslzsl/sslzsl.hpp"

namespace fs = std::filesystem;
using namespace sslzsl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitThreshold = 1;
constexpr int kExitUsage = 2;

const char* kOutEnv = "SSLZSL_OUT";

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_file(path, j.dump(2) + "\n"); }

// Expands every "--config FILE" into "--key=value" tokens placed before the
// user's own arguments, so explicit flags take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> injected;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string file;
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    const auto kv = KeyValueFile::load(file);
    for (const auto& [k, v] : kv.entries()) injected.push_back("--" + k + "=" + v);
  }
  if (rest.empty()) return injected;
  // Keep the subcommand name first.
  std::vector<std::string> out{rest.front()};
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

struct DataOptions {
  std::string manifest;
  bool no_normalize_features = false;
  bool normalize_descriptors = false;

  void add(CLI::App* app) {
    app->add_option("--data", manifest, "Dataset manifest (key=value)")->required();
    app->add_flag("--no-normalize-features", no_normalize_features,
                  "Use feature rows as stored instead of unit-normalizing them");
    app->add_flag("--normalize-descriptors", normalize_descriptors,
                  "Unit-normalize class descriptor rows");
  }

  ZslDataset load() const {
    NormalizationOptions opts;
    if (no_normalize_features) opts.features = false;
    if (normalize_descriptors) opts.descriptors = true;
    ZslDataset d = load_dataset(manifest, opts);
    require_valid(d);
    return d;
  }
};

void add_hyperparams(CLI::App* app, Hyperparams& h, std::string& optimizer) {
  app->add_option("--lambda", h.lambda, "Frobenius weight on V")->capture_default_str();
  app->add_option("--beta", h.beta, "Hypersphere penalty weight (0 disables)")->capture_default_str();
  app->add_option("--alpha", h.alpha, "Hypersphere radius")->capture_default_str();
  app->add_option("--lr", h.lr, "Learning rate")->capture_default_str();
  app->add_option("--epochs", h.epochs, "Training epochs")->capture_default_str();
  app->add_option("--batch-size", h.batch_size, "Minibatch size")->capture_default_str();
  app->add_option("--seed", h.seed, "RNG seed")->capture_default_str();
  app->add_option("--optimizer", optimizer, "sgd | momentum | adam")->capture_default_str();
}

std::string default_out() {
  const char* env = std::getenv(kOutEnv);
  return env && *env ? env : ".";
}

// A loaded checkpoint is either an SSL model or a baseline.
struct AnyModel {
  std::optional<ModelParams> ssl;
  std::optional<BaselineModel> baseline;
};

AnyModel load_any_model(const fs::path& manifest) {
  const auto kind = KeyValueFile::load(manifest).get("kind").value_or("ssl");
  AnyModel m;
  if (kind == "ssl") {
    m.ssl = load_model(manifest).params;
  } else {
    m.baseline = load_baseline(manifest);
  }
  return m;
}

Matrix unseen_scores(const AnyModel& m, const ZslDataset& d, ScoreKind kind) {
  if (m.ssl) {
    if (m.ssl->V.rows() != d.descriptor_dim() || m.ssl->V.cols() != d.feature_dim()) {
      throw DimensionError("model V " + m.ssl->V.shape() + " does not fit dataset (d_a=" +
                           std::to_string(d.descriptor_dim()) +
                           ", d_f=" + std::to_string(d.feature_dim()) + ")");
    }
    return compatibility_scores(d.test_features, unseen_prototypes(*m.ssl, d), kind);
  }
  return baseline_scores(*m.baseline, d.test_features, d.unseen_descriptors);
}

void print_report(const EvalReport& r, bool classification) {
  if (classification) {
    std::printf("per-class top-1:");
    for (double a : r.per_class_accuracy) std::printf(" %.4f", a);
    std::printf("\nmean per-class top-1: %.6f\n", r.mean_accuracy);
  }
  std::printf("per-class AP:");
  for (double a : r.per_class_ap) std::printf(" %.4f", a);
  std::printf("\nmAP: %.6f\n", r.map);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot learning with a semantic softmax loss", "sslzsl"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  // gen ----------------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Generate a synthetic zero-shot dataset");
  SyntheticSpec spec;
  std::string gen_out = default_out();
  gen->add_option("--out", gen_out, "Output directory (env " + std::string(kOutEnv) + ")");
  gen->add_option("--feature-dim", spec.feature_dim)->capture_default_str();
  gen->add_option("--descriptor-dim", spec.descriptor_dim)->capture_default_str();
  gen->add_option("--seen", spec.seen_classes, "Seen classes")->capture_default_str();
  gen->add_option("--unseen", spec.unseen_classes, "Unseen classes")->capture_default_str();
  gen->add_option("--per-class", spec.per_class, "Instances per class")->capture_default_str();
  gen->add_option("--noise", spec.noise_sigma, "Gaussian noise sigma")->capture_default_str();
  gen->add_option("--seed", spec.seed)->capture_default_str();

  // train --------------------------------------------------------------------
  auto* tr = app.add_subcommand("train", "Train V and b on the seen classes");
  DataOptions tr_data;
  Hyperparams tr_h;
  std::string tr_opt = "adam";
  std::string tr_out = default_out();
  tr_data.add(tr);
  add_hyperparams(tr, tr_h, tr_opt);
  tr->add_option("--out", tr_out, "Output directory");

  // eval ---------------------------------------------------------------------
  auto* ev = app.add_subcommand("eval", "Zero-shot classification and retrieval report");
  DataOptions ev_data;
  std::string ev_model;
  std::string ev_out = default_out();
  std::string ev_score = "cosine";
  std::optional<double> ev_min_acc;
  ev_data.add(ev);
  ev->add_option("--model", ev_model, "Model manifest")->required();
  ev->add_option("--out", ev_out, "Output directory");
  ev->add_option("--score", ev_score, "cosine | inner (SSL models)")->capture_default_str();
  ev->add_option("--min-accuracy", ev_min_acc, "Exit 1 if mean per-class top-1 is below this");

  // retrieve -----------------------------------------------------------------
  auto* rt = app.add_subcommand("retrieve", "Zero-shot retrieval: mAP and PR curves");
  DataOptions rt_data;
  std::string rt_model;
  std::string rt_out = default_out();
  std::string rt_score = "cosine";
  bool rt_svg = false;
  rt_data.add(rt);
  rt->add_option("--model", rt_model, "Model manifest")->required();
  rt->add_option("--out", rt_out, "Output directory");
  rt->add_option("--score", rt_score, "cosine | inner (SSL models)")->capture_default_str();
  rt->add_flag("--svg", rt_svg, "Also write an SVG plot per class");

  // gradcheck ----------------------------------------------------------------
  auto* gc = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  Hyperparams gc_h;
  std::string gc_opt = "adam";
  std::string gc_manifest;
  std::size_t gc_batch = 16;
  double gc_step = 1e-6;
  double gc_threshold = 1e-5;
  double gc_scale = 0.3;
  add_hyperparams(gc, gc_h, gc_opt);
  gc->add_option("--data", gc_manifest, "Dataset manifest (default: small synthetic set)");
  gc->add_option("--batch", gc_batch, "Instances in the checked batch")->capture_default_str();
  gc->add_option("--step", gc_step, "Central-difference step")->capture_default_str();
  gc->add_option("--threshold", gc_threshold, "Maximum relative error")->capture_default_str();
  gc->add_option("--param-scale", gc_scale, "Std-dev of the random V and b")->capture_default_str();

  // baseline -----------------------------------------------------------------
  auto* bl = app.add_subcommand("baseline", "Fit and evaluate LR / RLR / ESZSL");
  DataOptions bl_data;
  std::string bl_kind = "lr";
  double bl_gamma = 1.0;
  double bl_lam = 1.0;
  std::string bl_encoding = "signed";
  std::string bl_score = "inner";
  bool bl_sweep = false;
  std::string bl_out = default_out();
  bl_data.add(bl);
  bl->add_option("--kind", bl_kind, "lr | rlr | eszsl")->capture_default_str();
  bl->add_option("--gamma", bl_gamma, "Ridge weight")->capture_default_str();
  bl->add_option("--lam", bl_lam, "ESZSL descriptor-side ridge weight")->capture_default_str();
  bl->add_option("--encoding", bl_encoding, "ESZSL targets: signed | binary")->capture_default_str();
  bl->add_option("--eszsl-score", bl_score, "ESZSL inference: inner | cosine")->capture_default_str();
  bl->add_flag("--sweep", bl_sweep, "Also report gamma (= lam) over powers of 10, 1e-3 .. 1e3");
  bl->add_option("--out", bl_out, "Output directory");

  try {
    const auto args = expand_config(argc, argv);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      const auto syn = make_synthetic(spec);
      for (const auto& w : syn.warnings) std::cerr << "warning: " << w << "\n";
      const fs::path dir = gen_out;
      const auto manifest = save_dataset(dir, syn.dataset);
      save_matrix(dir / "ground_truth_map.bin", syn.ground_truth);
      Hyperparams h;
      h.seed = spec.seed;
      h.epochs = 0;
      save_model(dir / "ground_truth",
                 ModelParams{syn.ground_truth, std::vector<double>(spec.seen_classes, 0.0)}, h, 0);
      std::printf("wrote %s\n", manifest.string().c_str());
      std::printf("train %zux%zu, test %zux%zu, seen %zu, unseen %zu, d_a %zu, noise %g, seed %llu\n",
                  syn.dataset.train_features.rows(), syn.dataset.train_features.cols(),
                  syn.dataset.test_features.rows(), syn.dataset.test_features.cols(),
                  spec.seen_classes, spec.unseen_classes, spec.descriptor_dim, spec.noise_sigma,
                  static_cast<unsigned long long>(spec.seed));
      std::printf("ground-truth model: %s\n", (dir / "ground_truth" / "model.txt").string().c_str());
      return kExitOk;
    }

    if (tr->parsed()) {
      tr_h.optimizer = parse_optimizer(tr_opt);
      tr_h.validate();
      const ZslDataset d = tr_data.load();
      const auto start = std::chrono::steady_clock::now();
      TrainResult res;
      try {
        res = train(d, tr_h);
      } catch (const NonFiniteLossError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitThreshold;
      }
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const fs::path dir = tr_out;
      const auto manifest = save_model(dir / "model", res.params, tr_h, res.history.epochs.size());
      write_file(dir / "history.csv", history_csv(res.history));

      const LossTerms final_loss =
          res.history.epochs.empty()
              ? ssl_loss_terms(res.params, d.train_features, d.train_labels, d.seen_descriptors, tr_h)
              : res.history.epochs.back().loss;
      nlohmann::json summary;
      summary["total"] = final_loss.total();
      summary["ce"] = final_loss.ce;
      summary["reg"] = final_loss.reg;
      summary["penalty"] = final_loss.penalty;
      summary["epochs"] = res.history.epochs.size();
      summary["seed"] = tr_h.seed;
      summary["seconds"] = seconds;
      summary["model"] = manifest.string();
      write_json(dir / "summary.json", summary);
      std::printf("epochs %zu  total %.6f  ce %.6f  reg %.6f  penalty %.6f  (%.2fs)\n",
                  res.history.epochs.size(), final_loss.total(), final_loss.ce, final_loss.reg,
                  final_loss.penalty, seconds);
      std::printf("model: %s\n", manifest.string().c_str());
      return kExitOk;
    }

    if (ev->parsed()) {
      const ZslDataset d = ev_data.load();
      const AnyModel m = load_any_model(ev_model);
      const EvalReport report = evaluate_scores(unseen_scores(m, d, parse_score_kind(ev_score)),
                                                d.test_labels);
      const fs::path dir = ev_out;
      fs::create_directories(dir);
      write_json(dir / "report.json", to_json(report));
      if (m.ssl) write_file(dir / "prototype_distances.csv", distances_csv(prototype_diagnostic(*m.ssl, d)));
      print_report(report, true);
      if (ev_min_acc && report.mean_accuracy < *ev_min_acc) {
        std::cerr << "mean accuracy below " << *ev_min_acc << "\n";
        return kExitThreshold;
      }
      return kExitOk;
    }

    if (rt->parsed()) {
      const ZslDataset d = rt_data.load();
      const AnyModel m = load_any_model(rt_model);
      EvalReport report;
      fill_retrieval(report, unseen_scores(m, d, parse_score_kind(rt_score)), d.test_labels);
      const fs::path dir = rt_out;
      fs::create_directories(dir / "pr");
      write_json(dir / "retrieval.json", to_json(report));
      for (std::size_t j = 0; j < report.pr_curves.size(); ++j) {
        const std::string stem = "class_" + std::to_string(j);
        write_file(dir / "pr" / (stem + ".csv"), pr_curve_csv(report.pr_curves[j]));
        if (rt_svg) {
          write_file(dir / "pr" / (stem + ".svg"),
                     pr_curve_svg(report.pr_curves[j], "unseen class " + std::to_string(j)));
        }
      }
      print_report(report, false);
      return kExitOk;
    }

    if (gc->parsed()) {
      gc_h.optimizer = parse_optimizer(gc_opt);
      gc_h.validate();
      ZslDataset d;
      if (gc_manifest.empty()) {
        d = make_synthetic({6, 4, 5, 2, 4, 0.3, gc_h.seed}).dataset;
      } else {
        d = load_dataset(gc_manifest);
        require_valid(d);
      }
      const std::size_t n = std::min(gc_batch, d.train_features.rows());
      Matrix batch(n, d.feature_dim());
      Labels labels(n);
      for (std::size_t i = 0; i < n; ++i) {
        auto src = d.train_features.row(i);
        std::copy(src.begin(), src.end(), batch.row(i).begin());
        labels[i] = d.train_labels[i];
      }
      Rng rng(gc_h.seed, 0x6C6BULL);
      ModelParams p{Matrix(d.descriptor_dim(), d.feature_dim()),
                    std::vector<double>(d.seen_classes())};
      for (double& v : p.V.values()) v = gc_scale * rng.gaussian();
      for (double& v : p.b) v = gc_scale * rng.gaussian();
      const auto res = grad_check_detailed(p, batch, labels, d.seen_descriptors, gc_h, gc_step);
      std::printf("max relative error: %.3e (at %s: analytic %.9e, numeric %.9e)\n",
                  res.max_rel_error, res.worst_entry.c_str(), res.analytic, res.numeric);
      return res.max_rel_error < gc_threshold ? kExitOk : kExitThreshold;
    }

    if (bl->parsed()) {
      const ZslDataset d = bl_data.load();
      const auto kind = parse_baseline(bl_kind);
      const auto encoding = parse_encoding(bl_encoding);
      const auto score = parse_score_kind(bl_score);
      auto fit = [&](double gamma, double lam) {
        BaselineModel m = fit_baseline(kind, d, gamma, lam, encoding);
        m.eszsl_score = score;
        return m;
      };
      if (bl_sweep) {
        std::printf("gamma      mean-top1  mAP\n");
        for (int e = -3; e <= 3; ++e) {
          const double g = std::pow(10.0, e);
          try {
            const auto r = evaluate_baseline(fit(g, g), d);
            std::printf("%-10g %.4f     %.4f\n", g, r.mean_accuracy, r.map);
          } catch (const SingularSystemError&) {
            std::printf("%-10g singular\n", g);
          }
        }
      }
      const BaselineModel m = fit(bl_gamma, bl_lam);
      const EvalReport report = evaluate_baseline(m, d);
      const double residual = stationarity_residual(
          [&](const Matrix& w) {
            return baseline_objective(kind, w, d.train_features, d.train_labels,
                                      d.seen_descriptors, bl_gamma, bl_lam, encoding);
          },
          m.weights);
      const fs::path dir = bl_out;
      save_baseline(dir / "model", m);
      nlohmann::json j = to_json(report);
      j["kind"] = to_string(kind);
      j["gamma"] = bl_gamma;
      j["lam"] = bl_lam;
      j["stationarity_residual"] = residual;
      write_json(dir / "report.json", j);
      std::printf("%s (gamma %g, lam %g)\n", to_string(kind).c_str(), bl_gamma, bl_lam);
      print_report(report, true);
      std::printf("stationarity residual: %.3e\n", residual);
      return kExitOk;
    }
  } catch (const NonFiniteLossError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitThreshold;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
