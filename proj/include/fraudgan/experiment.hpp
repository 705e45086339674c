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

// Experiment procedures.
//
// run_fold_experiment, per fold:
//   1. stratified split into training rows and test rows
//   2. fit the scaler on training rows only
//   3. (GAN methods) train the GAN on the fold's minority training rows,
//      probing every `probe_every` iterations, and keep the parameters from
//      the iteration with the lowest probe accuracy
//   4. balance the training rows so both classes have equal counts
//   5. fit the classifier and score the untouched test rows
//
// augmentation_sweep holds out a stratified 20% test split and adds growing
// amounts of real, trained-GAN, or untrained-GAN minority rows to the
// remaining 80% before fitting the classifier.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <exception>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fraudgan/cross_validation.hpp"
#include "fraudgan/data_io.hpp"
#include "fraudgan/gan.hpp"
#include "fraudgan/metrics.hpp"
#include "fraudgan/models.hpp"
#include "fraudgan/resampling.hpp"

namespace fraudgan {

enum class Classifier { logistic, boosted };

inline const char* to_string(Classifier c) { return c == Classifier::logistic ? "lr" : "xgb"; }

inline Classifier parse_classifier(const std::string& s) {
  if (s == "lr" || s == "logistic") return Classifier::logistic;
  if (s == "xgb" || s == "boosted") return Classifier::boosted;
  throw ParameterError("unknown classifier '" + s + "' (expected lr or xgb)");
}

struct MetricsReport {
  std::string sampler;
  std::string classifier;
  std::size_t fold = 0;
  double auc = 0.0;
  double auprc = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  // A zero denominator forced recall, precision or F1 to 0.
  bool degenerate = false;
};

// What one fold fed into its scaler and its test set.
struct FoldAudit {
  std::size_t fold = 0;
  std::vector<std::size_t> scaler_rows;
  std::vector<std::size_t> test_rows;
  std::size_t synthetic_train_rows = 0;
  std::size_t synthetic_test_rows = 0;
};

using FoldObserver = std::function<void(const FoldAudit&)>;

struct ExperimentConfig {
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  Classifier classifier = Classifier::logistic;
  LogisticConfig logistic{};
  BoostConfig boost{};
  // Replaces the per-framework preset when set; the framework field is
  // overwritten by the method being run.
  std::optional<GanConfig> gan;
  ProbeConfig probe{};
  std::size_t smote_k = 5;
  std::size_t adasyn_k = 5;
  double threshold = 0.5;
  std::size_t jobs = 1;
  FoldObserver observer;
};

inline GanConfig gan_config_for(Method method, const ExperimentConfig& cfg, std::uint64_t seed) {
  const Framework f = framework_of(method);
  GanConfig g = cfg.gan ? *cfg.gan : tuned_preset(f);
  if (cfg.gan && g.framework != f) {
    // Carry the overrides across but keep the family conventions coherent.
    const GanConfig preset = tuned_preset(f);
    g.critic_steps = preset.critic_steps;
    g.adam_beta1 = preset.adam_beta1;
    g.adam_beta2 = preset.adam_beta2;
  }
  g.framework = f;
  g.seed = seed;
  return g;
}

struct ExperimentResult {
  std::vector<MetricsReport> reports;
  // Out-of-fold scores, indexed like the dataset rows.
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<TrainLog> train_logs;
};

inline std::vector<double> fit_and_score(Classifier classifier, const Dataset& train,
                                         const Matrix& test, const ExperimentConfig& cfg) {
  if (classifier == Classifier::logistic) {
    return predict_proba(fit_logistic(train, cfg.logistic), test);
  }
  return predict_proba(fit_boosted(train, cfg.boost), test);
}

inline MetricsReport score_report(std::span<const double> scores, std::span<const int> labels,
                                  double threshold) {
  MetricsReport r;
  r.auc = auc(scores, labels);
  r.auprc = auprc(scores, labels);
  const auto cm = classification_metrics(scores, labels, threshold);
  r.recall = cm.recall;
  r.precision = cm.precision;
  r.f1 = cm.f1;
  r.degenerate = cm.recall_undefined || cm.precision_undefined || cm.f1_undefined;
  return r;
}

// Fits a GAN to minority rows (already in the caller's feature space) with
// the probe-based stopping rule. The GAN standardizes its input internally
// and generates back into the caller's space.
struct FittedGan {
  GanModel model;
  TrainLog log;
};

inline FittedGan fit_gan(const GanConfig& cfg, const Matrix& minority, const ProbeConfig& probe,
                         const TrainHooks& hooks = {}) {
  Scaler gscaler = Scaler::fit(minority);
  const Matrix scaled = gscaler.transform(minority);
  FittedGan out{make_gan_model(cfg, minority.cols(), std::move(gscaler)), {}};
  std::vector<int> labels;
  if (is_conditional(cfg.framework)) {
    labels = kmeans(scaled, cfg.condition_classes, derive_seed(cfg.seed, 11)).labels;
  }
  ProbeConfig pc = probe;
  pc.seed = derive_seed(cfg.seed, 12);
  out.log = train_with_stopping(out.model, scaled, labels, make_probe(minority, pc), hooks);
  return out;
}

namespace detail {

struct FoldOutcome {
  MetricsReport report;
  std::vector<double> scores;
  std::optional<TrainLog> log;
};

inline FoldOutcome run_one_fold(const Dataset& dataset, const FoldSplit& split, Method method,
                                const ExperimentConfig& cfg) {
  const std::uint64_t fold_seed = derive_seed(cfg.seed, 100 + split.fold);
  const Scaler scaler = Scaler::fit(dataset.features, split.train);
  Dataset train = dataset.subset(split.train);
  train.features = scaler.transform(train.features);
  Dataset test = dataset.subset(split.test);
  test.features = scaler.transform(test.features);

  FoldOutcome out;
  BalancePlan plan;
  plan.method = method;
  plan.seed = derive_seed(fold_seed, 1);
  plan.smote_k = cfg.smote_k;
  plan.adasyn_k = cfg.adasyn_k;
  std::optional<FittedGan> gan;
  if (is_gan_method(method)) {
    const Matrix minority = take_rows(train.features, train.indices_of(1));
    gan = fit_gan(gan_config_for(method, cfg, derive_seed(fold_seed, 2)), minority, cfg.probe);
    plan.gan = &gan->model;
    out.log = gan->log;
  }
  const AugmentedDataset balanced = balance(train, plan);
  const AugmentedDataset test_side = as_original(test);
  out.scores = fit_and_score(cfg.classifier, balanced.data, test_side.data.features, cfg);
  out.report = score_report(out.scores, test_side.data.labels, cfg.threshold);
  out.report.sampler = to_string(method);
  out.report.classifier = to_string(cfg.classifier);
  out.report.fold = split.fold;

  if (cfg.observer) {
    FoldAudit audit;
    audit.fold = split.fold;
    audit.scaler_rows = split.train;
    audit.test_rows = split.test;
    audit.synthetic_train_rows = balanced.synthetic_count();
    audit.synthetic_test_rows = test_side.synthetic_count();
    cfg.observer(audit);
  }
  return out;
}

[[noreturn]] inline void rethrow_with_fold(std::exception_ptr e, std::size_t fold) {
  const std::string where = "fold " + std::to_string(fold) + ": ";
  try {
    std::rethrow_exception(e);
  } catch (const TrainingDivergence& err) {
    throw TrainingDivergence(where + err.what(), err.iteration());
  } catch (const NumericalError& err) {
    throw NumericalError(where + err.what());
  } catch (const DataError& err) {
    throw DataError(where + err.what());
  } catch (const ParameterError& err) {
    throw ParameterError(where + err.what());
  } catch (const ShapeError& err) {
    throw ShapeError(where + err.what());
  } catch (const ContractError& err) {
    throw ContractError(where + err.what());
  }
}

// Runs task(i) for i in [0, n) on up to `jobs` threads.
template <typename Task>
void parallel_for(std::size_t n, std::size_t jobs, Task&& task) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& t : workers) t.join();
}

}  // namespace detail

inline ExperimentResult run_fold_experiment(const Dataset& dataset, Method method,
                                            const ExperimentConfig& cfg) {
  const auto splits = stratified_kfold(dataset.labels, cfg.folds, cfg.seed);
  std::vector<detail::FoldOutcome> outcomes(splits.size());
  std::vector<std::exception_ptr> errors(splits.size());
  detail::parallel_for(splits.size(), cfg.jobs, [&](std::size_t i) {
    try {
      outcomes[i] = detail::run_one_fold(dataset, splits[i], method, cfg);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < splits.size(); ++i)
    if (errors[i]) detail::rethrow_with_fold(errors[i], splits[i].fold);

  ExperimentResult result;
  result.scores.assign(dataset.rows(), 0.0);
  result.labels = dataset.labels;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    result.reports.push_back(outcomes[i].report);
    for (std::size_t j = 0; j < splits[i].test.size(); ++j)
      result.scores[splits[i].test[j]] = outcomes[i].scores[j];
    if (outcomes[i].log) result.train_logs.push_back(*outcomes[i].log);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Augmentation sweep

enum class SweepSource { real, trained_gan, untrained_gan };

inline const char* to_string(SweepSource s) {
  switch (s) {
    case SweepSource::real: return "real";
    case SweepSource::trained_gan: return "trained_gan";
    case SweepSource::untrained_gan: return "untrained_gan";
  }
  return "?";
}

struct SweepRow {
  SweepSource source = SweepSource::real;
  double fraction = 0.0;
  std::size_t added_rows = 0;
  MetricsReport metrics;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  TrainLog train_log;
};

// Rows added at `fraction`: that share of the dataset's total minority count.
inline std::size_t sweep_added_rows(const Dataset& dataset, double fraction) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(dataset.count(1))));
}

inline SweepResult augmentation_sweep(const Dataset& dataset, Method gan_method,
                                      const ExperimentConfig& cfg,
                                      std::span<const double> fractions) {
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw ParameterError("sweep fractions must lie in [0, 1]");
  }
  const FoldSplit split = stratified_holdout(dataset.labels, 0.2, cfg.seed);
  const Scaler scaler = Scaler::fit(dataset.features, split.train);
  Dataset train = dataset.subset(split.train);
  train.features = scaler.transform(train.features);
  Dataset test = dataset.subset(split.test);
  test.features = scaler.transform(test.features);
  const Matrix minority = take_rows(train.features, train.indices_of(1));

  const std::uint64_t seed = derive_seed(cfg.seed, 200);
  const GanConfig gcfg = gan_config_for(gan_method, cfg, derive_seed(seed, 1));
  FittedGan trained = fit_gan(gcfg, minority, cfg.probe);
  GanConfig fresh_cfg = gcfg;
  fresh_cfg.seed = derive_seed(seed, 2);
  // The untrained baseline never sees the minority statistics.
  const GanModel untrained = make_gan_model(fresh_cfg, minority.cols(), Scaler::identity(minority.cols()));

  Rng rng(derive_seed(seed, 3));
  const auto real_order = shuffled_indices(minority.rows(), rng);

  SweepResult result;
  result.train_log = trained.log;
  for (SweepSource source : {SweepSource::real, SweepSource::trained_gan, SweepSource::untrained_gan}) {
    for (double f : fractions) {
      const std::size_t n_add = sweep_added_rows(dataset, f);
      Matrix extra(0, minority.cols());
      if (n_add > 0) {
        const std::uint64_t gen_seed = derive_seed(seed, 10 + n_add);
        if (source == SweepSource::real) {
          std::vector<std::size_t> pick(n_add);
          for (std::size_t i = 0; i < n_add; ++i) pick[i] = real_order[i % real_order.size()];
          extra = take_rows(minority, pick);
        } else {
          extra = generate_mixed(source == SweepSource::trained_gan ? trained.model : untrained,
                                 n_add, gen_seed);
        }
      }
      Dataset augmented = train;
      augmented.features = vstack(train.features, extra);
      augmented.labels.insert(augmented.labels.end(), extra.rows(), 1);
      const auto scores = fit_and_score(cfg.classifier, augmented, test.features, cfg);
      SweepRow row;
      row.source = source;
      row.fraction = f;
      row.added_rows = n_add;
      row.metrics = score_report(scores, test.labels, cfg.threshold);
      row.metrics.sampler = to_string(source);
      row.metrics.classifier = to_string(cfg.classifier);
      result.rows.push_back(row);
    }
  }
  return result;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "source,fraction,metric,value\n";
  for (const char* metric : {"auc", "auprc", "recall", "precision", "f1"}) {
    for (const SweepRow& r : rows) {
      const std::string m = metric;
      const double v = m == "auc" ? r.metrics.auc
                       : m == "auprc" ? r.metrics.auprc
                       : m == "recall" ? r.metrics.recall
                       : m == "precision" ? r.metrics.precision
                                          : r.metrics.f1;
      out << to_string(r.source) << ',' << format_double(r.fraction) << ',' << metric << ','
          << format_double(v) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Reports

inline void write_reports_csv(std::ostream& out, const std::vector<MetricsReport>& reports) {
  out << "sampler,classifier,fold,auc,auprc,recall,precision,f1\n";
  for (const MetricsReport& r : reports) {
    out << r.sampler << ',' << r.classifier << ',' << r.fold << ',' << format_double(r.auc) << ','
        << format_double(r.auprc) << ',' << format_double(r.recall) << ','
        << format_double(r.precision) << ',' << format_double(r.f1) << '\n';
  }
}

inline std::vector<MetricsReport> read_reports_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "sampler,classifier,fold,auc,auprc,recall,precision,f1") {
    throw DataError("reports file has an unexpected header");
  }
  std::vector<MetricsReport> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 8) throw DataError("reports row " + std::to_string(line_no) + " has " +
                                       std::to_string(f.size()) + " fields");
    MetricsReport r;
    r.sampler = f[0];
    r.classifier = f[1];
    double fold = 0.0;
    double* dst[] = {&fold, &r.auc, &r.auprc, &r.recall, &r.precision, &r.f1};
    for (std::size_t i = 0; i < 6; ++i) {
      if (!detail::parse_double(f[i + 2], *dst[i])) {
        throw DataError("reports row " + std::to_string(line_no) + ": bad number '" +
                        std::string(f[i + 2]) + "'");
      }
    }
    r.fold = static_cast<std::size_t>(fold);
    out.push_back(r);
  }
  return out;
}

struct AggregateRow {
  std::string sampler;
  std::string classifier;
  double auc = 0.0;
  double auprc = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  // Mean over the five metrics of the row's rank (1 = best).
  double rank = 0.0;
};

// Ranks rows by each metric (higher is better). Ties are ranked in row order,
// so the earlier row gets the better rank; the rank column is the mean of the
// five per-metric ranks.
inline void assign_ranks(std::vector<AggregateRow>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> total(n, 0.0);
  for (double AggregateRow::*metric : {&AggregateRow::auc, &AggregateRow::auprc,
                                       &AggregateRow::recall, &AggregateRow::precision,
                                       &AggregateRow::f1}) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return rows[a].*metric > rows[b].*metric;
    });
    for (std::size_t pos = 0; pos < n; ++pos) total[order[pos]] += static_cast<double>(pos + 1);
  }
  for (std::size_t i = 0; i < n; ++i) rows[i].rank = total[i] / 5.0;
}

// Mean across folds per (sampler, classifier), in first-appearance order.
inline std::vector<AggregateRow> aggregate(const std::vector<MetricsReport>& reports) {
  std::vector<AggregateRow> rows;
  std::vector<std::size_t> counts;
  for (const MetricsReport& r : reports) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const AggregateRow& a) {
      return a.sampler == r.sampler && a.classifier == r.classifier;
    });
    if (it == rows.end()) {
      rows.push_back(AggregateRow{r.sampler, r.classifier});
      counts.push_back(0);
      it = rows.end() - 1;
    }
    const auto i = static_cast<std::size_t>(it - rows.begin());
    it->auc += r.auc;
    it->auprc += r.auprc;
    it->recall += r.recall;
    it->precision += r.precision;
    it->f1 += r.f1;
    counts[i] += 1;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double c = static_cast<double>(counts[i]);
    rows[i].auc /= c;
    rows[i].auprc /= c;
    rows[i].recall /= c;
    rows[i].precision /= c;
    rows[i].f1 /= c;
  }
  assign_ranks(rows);
  return rows;
}

inline void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "sampler,classifier,auc,auprc,recall,precision,f1,rank\n";
  for (const AggregateRow& r : rows) {
    out << r.sampler << ',' << r.classifier << ',' << format_double(r.auc) << ','
        << format_double(r.auprc) << ',' << format_double(r.recall) << ','
        << format_double(r.precision) << ',' << format_double(r.f1) << ','
        << format_double(r.rank) << '\n';
  }
}

// Fixed-width table for terminals.
inline void print_aggregate(std::ostream& out, const std::vector<AggregateRow>& rows) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-8s %-4s %7s %7s %7s %9s %8s %6s\n", "sampler", "clf", "AUC",
                "AUPRC", "Recall", "Precision", "F1", "Rank");
  out << buf;
  for (const AggregateRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-8s %-4s %7.3f %7.3f %7.3f %9.3f %8.3f %6.1f\n",
                  r.sampler.c_str(), r.classifier.c_str(), r.auc, r.auprc, r.recall, r.precision,
                  r.f1, r.rank);
    out << buf;
  }
}

inline void write_roc_csv(std::ostream& out, const RocCurve& roc) {
  out << "fpr,tpr\n";
  for (std::size_t i = 0; i < roc.fpr.size(); ++i)
    out << format_double(roc.fpr[i]) << ',' << format_double(roc.tpr[i]) << '\n';
}

// Overlaid ROC curves as a standalone SVG: axes, chance diagonal, legend.
inline void write_roc_svg(std::ostream& out,
                          const std::vector<std::pair<std::string, RocCurve>>& curves) {
  constexpr double size = 400.0, margin = 50.0;
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  auto px = [&](double fpr) { return margin + fpr * size; };
  auto py = [&](double tpr) { return margin + (1.0 - tpr) * size; };
  char buf[128];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (size + 2 * margin + 120)
      << "\" height=\"" << (size + 2 * margin) << "\">\n";
  out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size << "\" height=\""
      << size << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\""
      << py(1) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = t / 4.0;
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    out << "<text x=\"" << px(v) << "\" y=\"" << (margin + size + 16)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << buf << "</text>\n";
    out << "<text x=\"" << (margin - 6) << "\" y=\"" << (py(v) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << buf << "</text>\n";
  }
  out << "<text x=\"" << (margin + size / 2) << "\" y=\"" << (margin + size + 36)
      << "\" font-size=\"12\" text-anchor=\"middle\">False positive rate</text>\n";
  out << "<text x=\"14\" y=\"" << (margin + size / 2) << "\" font-size=\"12\" "
      << "text-anchor=\"middle\" transform=\"rotate(-90 14 " << (margin + size / 2)
      << ")\">True positive rate</text>\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = palette[c % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    const RocCurve& roc = curves[c].second;
    for (std::size_t i = 0; i < roc.fpr.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%s%.2f,%.2f", i ? " " : "", px(roc.fpr[i]), py(roc.tpr[i]));
      out << buf;
    }
    out << "\"/>\n";
    const double ly = margin + 14.0 + 18.0 * static_cast<double>(c);
    out << "<line x1=\"" << (margin + size + 12) << "\" y1=\"" << ly << "\" x2=\""
        << (margin + size + 32) << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << (margin + size + 36) << "\" y=\"" << (ly + 4) << "\" font-size=\"12\">"
        << curves[c].first << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace fraudgan
