/*
 * Copyright 2026 The fraudgan Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// fraudgan command-line tool.
//
//   fraudgan synth-data --out data/
//   fraudgan train-gan --synth --framework wgan --preset table1 --out run/
//   fraudgan evaluate --data creditcard.csv --methods none ros smote wgan --out run/
//   fraudgan evaluate --config run/manifest.txt --out rerun/
//
// Every flag can also be given as `name=value` in a --config file; flags on
// the command line win. Each run leaves manifest.txt in the output directory
// with the resolved configuration and SHA-256 checksums of what it wrote.

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fraudgan/fraudgan.hpp"

namespace fs = std::filesystem;
using namespace fraudgan;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

// Raised when neither --data nor --synth says where rows come from.
struct UsageError : ParameterError {
  using ParameterError::ParameterError;
};

struct Options {
  // data source
  std::string data;
  bool synth = false;
  std::size_t synth_majority = 9900;
  std::size_t synth_minority = 100;
  std::size_t synth_dim = 10;
  double synth_separation = 2.5;
  double synth_spread = 1.0;

  std::string out = "out";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  // experiment
  std::vector<std::string> methods{"none"};
  std::string classifier = "lr";
  std::size_t folds = 10;
  double threshold = 0.5;
  std::size_t smote_k = 5;
  std::size_t adasyn_k = 5;
  std::vector<double> fractions{0.0, 0.2, 0.4, 0.6, 0.8};

  // classifiers
  double lr_rate = 0.1;
  std::size_t lr_epochs = 5000;
  double lr_l2 = 1e-3;
  std::size_t xgb_rounds = 100;
  std::size_t xgb_depth = 4;
  double xgb_shrinkage = 0.1;
  std::size_t probe_folds = 3;
  std::size_t probe_rounds = 100;

  // GAN; unset optionals keep the preset value
  std::string framework = "wgan";
  std::string preset = "table1";
  std::optional<double> learning_rate;
  std::optional<double> dropout;
  std::optional<std::size_t> hidden_nodes;
  std::optional<std::size_t> hidden_layers;
  std::optional<std::size_t> noise_dim;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> critic_steps;
  std::optional<double> clip_value;
  std::optional<std::size_t> condition_classes;
  std::optional<std::size_t> max_iterations;
  std::optional<std::size_t> probe_every;

  // generate / balance / report
  std::string model;
  std::size_t count = 100;
  std::optional<int> condition;
  std::string reports;
};

void add_options(CLI::App& app, Options& o) {
  const char* data = "Data";
  app.add_option("--data", o.data, "CSV file with a Class column")->group(data);
  app.add_flag("--synth", o.synth, "Use the synthetic generator instead of --data")->group(data);
  app.add_option("--synth-majority", o.synth_majority, "Synthetic majority rows")
      ->capture_default_str()->group(data);
  app.add_option("--synth-minority", o.synth_minority, "Synthetic minority rows")
      ->capture_default_str()->group(data);
  app.add_option("--synth-dim", o.synth_dim, "Synthetic feature count")
      ->capture_default_str()->group(data);
  app.add_option("--synth-separation", o.synth_separation, "Distance between class centres")
      ->capture_default_str()->group(data);
  app.add_option("--synth-spread", o.synth_spread, "Per-component standard deviation")
      ->capture_default_str()->group(data);

  const char* run = "Run";
  app.add_option("--out", o.out, "Output directory")->capture_default_str()->group(run);
  app.add_option("--seed", o.seed, "Master seed")->capture_default_str()->group(run);
  app.add_option("--jobs", o.jobs, "Worker threads for folds")
      ->capture_default_str()->check(CLI::PositiveNumber)->group(run);

  const char* exp = "Experiment";
  app.add_option("--methods", o.methods, "none ros smote adasyn gan cgan wgan wcgan")
      ->capture_default_str()->group(exp);
  app.add_option("--classifier", o.classifier, "lr or xgb")->capture_default_str()->group(exp);
  app.add_option("--folds", o.folds, "Cross-validation folds")->capture_default_str()->group(exp);
  app.add_option("--threshold", o.threshold, "Decision threshold")
      ->capture_default_str()->group(exp);
  app.add_option("--smote-k", o.smote_k, "SMOTE neighbours")->capture_default_str()->group(exp);
  app.add_option("--adasyn-k", o.adasyn_k, "ADASYN neighbours")->capture_default_str()->group(exp);
  app.add_option("--fractions", o.fractions, "Sweep fractions of the minority count")
      ->capture_default_str()->group(exp);

  const char* clf = "Classifiers";
  app.add_option("--lr-rate", o.lr_rate, "Logistic regression step size")
      ->capture_default_str()->group(clf);
  app.add_option("--lr-epochs", o.lr_epochs, "Logistic regression epochs")
      ->capture_default_str()->group(clf);
  app.add_option("--lr-l2", o.lr_l2, "Logistic regression L2 penalty")
      ->capture_default_str()->group(clf);
  app.add_option("--xgb-rounds", o.xgb_rounds, "Boosting rounds")->capture_default_str()->group(clf);
  app.add_option("--xgb-depth", o.xgb_depth, "Tree depth")->capture_default_str()->group(clf);
  app.add_option("--xgb-shrinkage", o.xgb_shrinkage, "Boosting shrinkage")
      ->capture_default_str()->group(clf);
  app.add_option("--probe-folds", o.probe_folds, "Probe cross-validation folds")
      ->capture_default_str()->group(clf);
  app.add_option("--probe-rounds", o.probe_rounds, "Probe boosting rounds")
      ->capture_default_str()->group(clf);

  const char* gan = "GAN";
  app.add_option("--framework", o.framework, "gan, cgan, wgan or wcgan")
      ->capture_default_str()->group(gan);
  app.add_option("--preset", o.preset, "table1 or none")->capture_default_str()->group(gan);
  app.add_option("--learning-rate", o.learning_rate)->group(gan);
  app.add_option("--dropout", o.dropout)->group(gan);
  app.add_option("--hidden-nodes", o.hidden_nodes)->group(gan);
  app.add_option("--hidden-layers", o.hidden_layers)->group(gan);
  app.add_option("--noise-dim", o.noise_dim)->group(gan);
  app.add_option("--batch-size", o.batch_size)->group(gan);
  app.add_option("--critic-steps", o.critic_steps, "Discriminator steps per generator step")
      ->group(gan);
  app.add_option("--clip-value", o.clip_value)->group(gan);
  app.add_option("--condition-classes", o.condition_classes)->group(gan);
  app.add_option("--max-iterations", o.max_iterations)->group(gan);
  app.add_option("--probe-every", o.probe_every)->group(gan);

  const char* io = "Artifacts";
  app.add_option("--model", o.model, "GAN model file (generate, balance)")->group(io);
  app.add_option("--count", o.count, "Rows to generate")->capture_default_str()->group(io);
  app.add_option("--condition", o.condition, "Condition class for conditional models")->group(io);
  app.add_option("--reports", o.reports, "reports.csv to aggregate (report)")->group(io);
}

// ---------------------------------------------------------------------------

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

// Owns the output directory: every artifact goes through put() so the
// manifest can list it.
class OutputDir {
 public:
  explicit OutputDir(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw ParameterError("cannot create output directory " + root_.string());
  }

  void put(const std::string& name, const std::string& bytes) {
    std::ofstream f(root_ / name, std::ios::binary);
    f << bytes;
    if (!f) throw DataError("cannot write " + (root_ / name).string());
    checksums_[name] = sha256_hex(bytes);
    std::cerr << "wrote " << (root_ / name).string() << '\n';
  }

  template <typename Fn>
  void write(const std::string& name, Fn&& fn) {
    std::ostringstream s;
    fn(s);
    put(name, s.str());
  }

  void manifest(const std::string& command, const std::string& resolved) {
    std::ostringstream s;
    s << "# fraudgan " << command << "\n"
      << "# rerun: fraudgan " << command << " --config manifest.txt\n"
      << resolved;
    for (const auto& [name, hex] : checksums_) s << "checksum." << name << "=\"" << hex << "\"\n";
    std::ofstream f(root_ / "manifest.txt", std::ios::binary);
    f << s.str();
    if (!f) throw DataError("cannot write manifest");
  }

 private:
  fs::path root_;
  std::map<std::string, std::string> checksums_;
};

// ---------------------------------------------------------------------------

SynthSpec synth_spec(const Options& o) {
  SynthSpec s = SynthSpec::standard(o.synth_majority, o.synth_minority, o.synth_dim, o.seed,
                                    o.synth_separation);
  s.spread = o.synth_spread;
  return s;
}

Dataset resolve_dataset(const Options& o) {
  if (!o.data.empty()) {
    Dataset ds = load_csv(o.data);
    std::cerr << "loaded " << ds.rows() << " rows, " << ds.width() << " features, "
              << ds.count(1) << " positive\n";
    return ds;
  }
  if (o.synth) return synth_dataset(synth_spec(o));
  throw UsageError("no data: pass --data <csv> or --synth");
}

GanConfig resolve_gan(const Options& o, Framework f) {
  GanConfig g;
  if (o.preset == "table1") {
    g = tuned_preset(f);
  } else if (o.preset == "none") {
    // Library defaults with the family conventions for k and Adam.
    const GanConfig family = tuned_preset(f);
    g.framework = f;
    g.critic_steps = family.critic_steps;
    g.adam_beta1 = family.adam_beta1;
    g.adam_beta2 = family.adam_beta2;
  } else {
    throw ParameterError("unknown preset '" + o.preset + "' (expected table1 or none)");
  }
  if (o.learning_rate) g.learning_rate = *o.learning_rate;
  if (o.dropout) g.dropout_rate = *o.dropout;
  if (o.hidden_nodes) g.hidden_nodes = *o.hidden_nodes;
  if (o.hidden_layers) g.hidden_layers = *o.hidden_layers;
  if (o.noise_dim) g.noise_dim = *o.noise_dim;
  if (o.batch_size) g.batch_size = *o.batch_size;
  if (o.critic_steps) g.critic_steps = *o.critic_steps;
  if (o.clip_value) g.clip_value = *o.clip_value;
  if (o.condition_classes) g.condition_classes = *o.condition_classes;
  if (o.max_iterations) g.max_iterations = *o.max_iterations;
  if (o.probe_every) g.probe_every = *o.probe_every;
  g.seed = o.seed;
  g.validate();
  return g;
}

ProbeConfig resolve_probe(const Options& o) {
  ProbeConfig p;
  p.folds = o.probe_folds;
  p.boost.rounds = o.probe_rounds;
  return p;
}

ExperimentConfig resolve_experiment(const Options& o) {
  ExperimentConfig c;
  c.folds = o.folds;
  c.seed = o.seed;
  c.classifier = parse_classifier(o.classifier);
  c.logistic.learning_rate = o.lr_rate;
  c.logistic.max_epochs = o.lr_epochs;
  c.logistic.l2 = o.lr_l2;
  c.boost.rounds = o.xgb_rounds;
  c.boost.max_depth = o.xgb_depth;
  c.boost.shrinkage = o.xgb_shrinkage;
  c.probe = resolve_probe(o);
  c.smote_k = o.smote_k;
  c.adasyn_k = o.adasyn_k;
  c.threshold = o.threshold;
  c.jobs = o.jobs;
  return c;
}

// Method-specific GAN config for the fold experiment: the per-method preset
// plus any explicit overrides.
ExperimentConfig for_method(const Options& o, ExperimentConfig c, Method m) {
  if (is_gan_method(m)) c.gan = resolve_gan(o, framework_of(m));
  return c;
}

std::vector<std::string> feature_names(std::size_t width) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < width; ++i) names.push_back("V" + std::to_string(i + 1));
  return names;
}

// A scaler that maps generator output straight into `outer`'s standardized
// space: inverse(inner) followed by transform(outer).
Scaler compose_into(const Scaler& inner, const Scaler& outer) {
  Scaler s = inner;
  for (std::size_t c = 0; c < s.mean.size(); ++c) {
    s.mean[c] = (inner.mean[c] - outer.mean[c]) / outer.stddev[c];
    s.stddev[c] = inner.stddev[c] / outer.stddev[c];
  }
  return s;
}

GanModel load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open model file " + path);
  return read_gan_model(f);
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_synth_data(Options o, OutputDir& out) {
  o.synth = true;
  const Dataset ds = resolve_dataset(o);
  out.write("data.csv", [&](std::ostream& s) { write_csv(s, ds); });
}

void cmd_train_gan(const Options& o, OutputDir& out) {
  const Dataset ds = resolve_dataset(o);
  const Framework f = parse_framework(o.framework);
  const GanConfig cfg = resolve_gan(o, f);
  // GANs learn from the training 80% of the minority class.
  const FoldSplit split = stratified_holdout(ds.labels, 0.2, o.seed);
  const Dataset train = ds.subset(split.train);
  const Matrix minority = take_rows(train.features, train.indices_of(1));
  std::cerr << "training " << to_string(f) << " on " << minority.rows() << " minority rows (lr "
            << cfg.learning_rate << ", dropout " << cfg.dropout_rate << ", " << cfg.hidden_nodes
            << " nodes)\n";
  const FittedGan fitted = fit_gan(cfg, minority, resolve_probe(o));
  if (fitted.log.best_iteration) std::cerr << "stop iteration " << *fitted.log.best_iteration << '\n';
  const std::string tag = to_string(f);
  out.write("trainlog_" + tag + ".csv", [&](std::ostream& s) { write_trainlog_csv(s, fitted.log); });
  out.write("gan_" + tag + ".model", [&](std::ostream& s) { write_gan_model(s, fitted.model); });
}

void cmd_generate(const Options& o, OutputDir& out) {
  if (o.model.empty()) throw ParameterError("generate needs --model");
  const GanModel model = load_model(o.model);
  Dataset ds;
  ds.features = o.condition ? generate(model, o.count, o.condition, o.seed)
                            : generate_mixed(model, o.count, o.seed);
  ds.labels.assign(ds.features.rows(), 1);
  ds.columns = feature_names(model.data_width);
  out.write("generated.csv", [&](std::ostream& s) { write_csv(s, ds); });
}

void cmd_balance(const Options& o, OutputDir& out) {
  if (o.methods.size() != 1) throw ParameterError("balance takes exactly one method");
  const Method method = parse_method(o.methods.front());
  const Dataset ds = resolve_dataset(o);
  const Standardized st = standardize(ds);
  BalancePlan plan;
  plan.method = method;
  plan.seed = o.seed;
  plan.smote_k = o.smote_k;
  plan.adasyn_k = o.adasyn_k;
  std::optional<GanModel> gan;
  if (is_gan_method(method)) {
    if (!o.model.empty()) {
      gan = load_model(o.model);
      if (gan->data_width != ds.width()) {
        throw DataError("model width " + std::to_string(gan->data_width) + " does not match data width " +
                        std::to_string(ds.width()));
      }
      gan->scaler = compose_into(gan->scaler, st.scaler);
    } else {
      const Matrix minority = take_rows(st.data.features, st.data.indices_of(1));
      gan = fit_gan(resolve_gan(o, framework_of(method)), minority, resolve_probe(o)).model;
    }
    plan.gan = &*gan;
  }
  AugmentedDataset balanced = balance(st.data, plan);
  balanced.data.features = st.scaler.inverse_transform(balanced.data.features);
  std::cerr << "balanced to " << balanced.data.count(0) << " / " << balanced.data.count(1) << " ("
            << balanced.synthetic_count() << " synthetic)\n";
  out.write("balanced.csv", [&](std::ostream& s) { write_csv(s, balanced.data); });
}

void cmd_evaluate(const Options& o, OutputDir& out) {
  if (o.methods.empty()) throw ParameterError("evaluate needs at least one method");
  const Dataset ds = resolve_dataset(o);
  const ExperimentConfig base = resolve_experiment(o);
  std::vector<MetricsReport> reports;
  std::vector<std::pair<std::string, RocCurve>> curves;
  for (const std::string& name : o.methods) {
    const Method m = parse_method(name);
    std::cerr << "evaluating " << to_string(m) << " (" << base.folds << " folds)\n";
    const ExperimentResult r = run_fold_experiment(ds, m, for_method(o, base, m));
    reports.insert(reports.end(), r.reports.begin(), r.reports.end());
    curves.emplace_back(to_string(m), roc_curve(r.scores, r.labels));
    out.write(std::string("roc_") + to_string(m) + ".csv",
              [&](std::ostream& s) { write_roc_csv(s, curves.back().second); });
    if (!r.train_logs.empty()) {
      // Fold 0's log stands for the method.
      out.write(std::string("trainlog_") + to_string(framework_of(m)) + ".csv",
                [&](std::ostream& s) { write_trainlog_csv(s, r.train_logs.front()); });
    }
  }
  const auto rows = aggregate(reports);
  out.write("reports.csv", [&](std::ostream& s) { write_reports_csv(s, reports); });
  out.write("aggregate.csv", [&](std::ostream& s) { write_aggregate_csv(s, rows); });
  out.write("roc.svg", [&](std::ostream& s) { write_roc_svg(s, curves); });
  print_aggregate(std::cout, rows);
}

void cmd_sweep(const Options& o, OutputDir& out) {
  const Dataset ds = resolve_dataset(o);
  const Framework f = parse_framework(o.framework);
  Method m = Method::wgan;
  for (Method c : {Method::gan, Method::cgan, Method::wgan, Method::wcgan})
    if (framework_of(c) == f) m = c;
  const ExperimentConfig cfg = for_method(o, resolve_experiment(o), m);
  const SweepResult r = augmentation_sweep(ds, m, cfg, o.fractions);
  out.write("sweep.csv", [&](std::ostream& s) { write_sweep_csv(s, r.rows); });
  out.write(std::string("trainlog_") + to_string(f) + ".csv",
            [&](std::ostream& s) { write_trainlog_csv(s, r.train_log); });
}

void cmd_report(const Options& o, OutputDir& out) {
  const std::string path = o.reports.empty() ? (fs::path(o.out) / "reports.csv").string() : o.reports;
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  const auto rows = aggregate(read_reports_csv(f));
  out.write("aggregate.csv", [&](std::ostream& s) { write_aggregate_csv(s, rows); });
  print_aggregate(std::cout, rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oversampling with GANs, SMOTE, ADASYN and ROS for imbalanced fraud data."};
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file (flags override it)");
  app.allow_config_extras(CLI::config_extras_mode::ignore);
  Options o;
  add_options(app, o);

  using Command = void (*)(const Options&, OutputDir&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"synth-data", "Write a synthetic imbalanced dataset",
       [](const Options& opt, OutputDir& d) { cmd_synth_data(opt, d); }},
      {"train-gan", "Train one GAN framework with probe-based stopping", cmd_train_gan},
      {"generate", "Sample rows from a trained GAN model", cmd_generate},
      {"balance", "Balance a dataset with one method", cmd_balance},
      {"evaluate", "Stratified k-fold comparison of balancing methods", cmd_evaluate},
      {"sweep", "Classifier performance versus added minority rows", cmd_sweep},
      {"report", "Aggregate a reports.csv into the ranked table", cmd_report},
  };
  std::map<const CLI::App*, std::pair<std::string, Command>> handlers;
  for (const auto& [name, help, fn] : commands) handlers[app.add_subcommand(name, help)] = {name, fn};
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const auto& [name, fn] = handlers.at(sub);
  try {
    OutputDir out(o.out);
    fn(o, out);
    out.manifest(name, app.config_to_str(true, false));
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    app.clear();
    std::cerr << app.help();
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
