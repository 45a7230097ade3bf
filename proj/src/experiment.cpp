#include "mmcon/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "mmcon/rng.hpp"
#include "mmcon/textio.hpp"

namespace mmcon {

void TrainConfig::validate() const {
  loss.validate();
  if (epochs < 1) throw InvalidConfig("train: epochs must be positive");
  if (batch_size < 2) throw InvalidConfig("train: batch size must be at least 2 patients");
  if (learning_rate < 0.0) throw InvalidConfig("train: learning rate must be >= 0");
  if (k_folds < 1) throw InvalidConfig("train: k_folds must be positive");
  if (encoder.embed_dim < 1) throw InvalidConfig("train: embedding dim must be positive");
  for (int h : encoder.hidden_dims)
    if (h < 1) throw InvalidConfig("train: hidden dims must be positive");
  if (policy.query_view_index < 0)
    throw InvalidConfig("train: query view index must be non-negative");
}

const EncoderParams& TrainedModel::encoder_for_view(int view, int query_view) const {
  if (shared || view == query_view) return query_encoder;
  return view_encoder;
}

BatchEncoding encode_contrastive_batch(const TrainedModel& model,
                                       const std::vector<MultiViewSample>& samples,
                                       const PairingPolicy& policy) {
  const int n = static_cast<int>(samples.size());
  if (n == 0) throw SingletonBatch("encode: no patients");
  const int m = static_cast<int>(samples.front().views.size());

  BatchEncoding enc;
  enc.traces.reserve(static_cast<size_t>(n) * static_cast<size_t>(m) +
                     (model.shared ? 0 : static_cast<size_t>(n)));
  enc.sources.reserve(enc.traces.capacity());

  std::vector<std::vector<Vec>> view_embeddings(static_cast<size_t>(n));
  const EncoderParams& venc = model.shared ? model.query_encoder : model.view_encoder;
  for (int p = 0; p < n; ++p) {
    view_embeddings[static_cast<size_t>(p)].reserve(static_cast<size_t>(m));
    for (int v = 0; v < m; ++v) {
      ForwardTrace t = encoder_forward_trace(venc, samples[static_cast<size_t>(p)].views[static_cast<size_t>(v)]);
      view_embeddings[static_cast<size_t>(p)].push_back(t.output);
      enc.traces.push_back(std::move(t));
      enc.sources.push_back({model.shared, p, v});
    }
  }

  if (model.shared) {
    enc.batch = build_contrastive_batch(samples, view_embeddings, policy);
    return enc;
  }

  std::vector<Vec> anchor_embeddings;
  anchor_embeddings.reserve(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    ForwardTrace t = encoder_forward_trace(
        model.query_encoder,
        samples[static_cast<size_t>(p)].views[static_cast<size_t>(policy.query_view_index)]);
    anchor_embeddings.push_back(t.output);
    enc.traces.push_back(std::move(t));
    enc.sources.push_back({true, p, policy.query_view_index});
  }
  enc.batch = build_contrastive_batch(samples, view_embeddings, policy, &anchor_embeddings);
  return enc;
}

ModelGrads backprop_batch(const TrainedModel& model, const BatchEncoding& enc,
                          const std::vector<Vec>& embedding_grads) {
  if (embedding_grads.size() != enc.batch.embeddings.size() ||
      enc.traces.size() != enc.batch.embeddings.size())
    throw DimensionMismatch("backprop_batch: gradient/trace count mismatch");

  ModelGrads mg;
  mg.query = zero_grads_like(model.query_encoder);
  if (!model.shared) mg.view = zero_grads_like(model.view_encoder);

  for (size_t i = 0; i < embedding_grads.size(); ++i) {
    const bool to_query = model.shared || enc.sources[i].via_query_encoder;
    const EncoderParams& params = to_query ? model.query_encoder : model.view_encoder;
    EncoderGrads& dst = to_query ? mg.query : mg.view;
    encoder_backward(params, enc.traces[i], embedding_grads[i], dst);
  }
  return mg;
}

FoldTrainResult train_fold(const std::vector<MultiViewSample>& train,
                           const TrainConfig& cfg) {
  cfg.validate();
  if (train.size() < 2) throw SingletonBatch("train_fold: need at least 2 patients");
  if (train.front().views.empty()) throw MixedDimensions("train_fold: patients carry no views");

  const int n = static_cast<int>(train.size());
  const int d_in = static_cast<int>(train.front().views.front().size());

  std::vector<int> dims;
  dims.push_back(d_in);
  dims.insert(dims.end(), cfg.encoder.hidden_dims.begin(), cfg.encoder.hidden_dims.end());
  dims.push_back(cfg.encoder.embed_dim);

  FoldTrainResult res;
  res.model.shared = cfg.encoder.shared;
  res.model.query_encoder =
      make_encoder(dims, cfg.encoder.activation, cfg.encoder.normalize_output,
                   mix_seed(cfg.rng_seed, 0xE4C0DE01ull));
  if (!cfg.encoder.shared)
    res.model.view_encoder =
        make_encoder(dims, cfg.encoder.activation, cfg.encoder.normalize_output,
                     mix_seed(cfg.rng_seed, 0xE4C0DE02ull));

  res.epoch_mean_loss.reserve(static_cast<size_t>(cfg.epochs));
  std::vector<MultiViewSample> minibatch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 rng(mix_seed(cfg.rng_seed, 0xE70C0000ull + static_cast<std::uint64_t>(epoch)));
    const std::vector<int> order = shuffled_indices(n, rng);

    double epoch_loss = 0.0;
    int batches = 0;
    int start = 0;
    while (start < n) {
      int count = std::min(cfg.batch_size, n - start);
      // a trailing single patient joins the previous mini-batch
      if (n - (start + count) == 1) ++count;
      minibatch.clear();
      for (int i = 0; i < count; ++i)
        minibatch.push_back(train[static_cast<size_t>(order[static_cast<size_t>(start + i)])]);
      start += count;

      BatchEncoding enc = encode_contrastive_batch(res.model, minibatch, cfg.policy);
      LossGradients lg = loss_value_and_grad(cfg.loss_kind, enc.batch, cfg.loss);
      ModelGrads mg = backprop_batch(res.model, enc, lg.embedding_grads);
      sgd_step_inplace(res.model.query_encoder, mg.query, cfg.learning_rate);
      if (!res.model.shared)
        sgd_step_inplace(res.model.view_encoder, mg.view, cfg.learning_rate);

      epoch_loss += lg.value.scalar;
      ++batches;
    }
    res.epoch_mean_loss.push_back(epoch_loss / std::max(1, batches));
  }
  return res;
}

Vec embed_patient(const TrainedModel& model, const MultiViewSample& sample,
                  int query_view) {
  std::vector<Vec> per_view;
  per_view.reserve(sample.views.size());
  for (size_t v = 0; v < sample.views.size(); ++v)
    per_view.push_back(encoder_forward(model.encoder_for_view(static_cast<int>(v), query_view),
                                       sample.views[v]));
  return concat_patient_representation(per_view).concatenated;
}

namespace {

// cosine distance with degenerate vectors pushed past the reachable range
double centroid_distance(const Vec& x, const Vec& centroid, bool present) {
  if (!present) return 3.0;
  const double nx = norm(x);
  const double nc = norm(centroid);
  if (nx < 1e-12 || nc < 1e-12) return 3.0;
  return 1.0 - dot(x, centroid) / (nx * nc);
}

struct NearestCentroidClassifier {
  Vec centroid0, centroid1;
  bool has0 = false, has1 = false;

  void fit(const std::vector<Vec>& x, const std::vector<int>& y) {
    if (x.empty()) throw InvalidConfig("nearest centroid: empty training set");
    centroid0.assign(x.front().size(), 0.0);
    centroid1.assign(x.front().size(), 0.0);
    long n0 = 0, n1 = 0;
    for (size_t i = 0; i < x.size(); ++i) {
      Vec& c = y[i] == 1 ? centroid1 : centroid0;
      for (size_t j = 0; j < c.size(); ++j) c[j] += x[i][j];
      (y[i] == 1 ? n1 : n0)++;
    }
    if (n0 > 0) for (double& v : centroid0) v /= static_cast<double>(n0);
    if (n1 > 0) for (double& v : centroid1) v /= static_cast<double>(n1);
    has0 = n0 > 0;
    has1 = n1 > 0;
  }

  int predict(const Vec& x) const {
    const double d0 = centroid_distance(x, centroid0, has0);
    const double d1 = centroid_distance(x, centroid1, has1);
    return d1 < d0 ? 1 : 0;  // ties toward label 0
  }
};

struct LinearProbeClassifier {
  Vec w;
  double b = 0.0;

  void fit(const std::vector<Vec>& x, const std::vector<int>& y) {
    if (x.empty()) throw InvalidConfig("linear probe: empty training set");
    w.assign(x.front().size(), 0.0);
    b = 0.0;
    const double lr = 0.5;
    const int iterations = 400;
    const double inv_n = 1.0 / static_cast<double>(x.size());
    Vec gw(w.size());
    for (int it = 0; it < iterations; ++it) {
      std::fill(gw.begin(), gw.end(), 0.0);
      double gb = 0.0;
      for (size_t i = 0; i < x.size(); ++i) {
        const double z = dot(w, x[i]) + b;
        const double p = 1.0 / (1.0 + std::exp(-z));
        const double err = p - static_cast<double>(y[i]);
        for (size_t j = 0; j < w.size(); ++j) gw[j] += err * x[i][j];
        gb += err;
      }
      for (size_t j = 0; j < w.size(); ++j) w[j] -= lr * inv_n * gw[j];
      b -= lr * inv_n * gb;
    }
  }

  int predict(const Vec& x) const { return dot(w, x) + b > 0.0 ? 1 : 0; }
};

}  // namespace

ConfusionCounts evaluate_fold(const TrainedModel& model,
                              const std::vector<MultiViewSample>& train,
                              const std::vector<MultiViewSample>& test,
                              const PairingPolicy& policy, ClassifierKind classifier) {
  if (test.empty()) throw EmptyTestSet("evaluate_fold: empty test set");
  if (train.empty()) throw InvalidConfig("evaluate_fold: empty training set");

  std::vector<Vec> x_train;
  std::vector<int> y_train;
  x_train.reserve(train.size());
  y_train.reserve(train.size());
  for (const auto& s : train) {
    x_train.push_back(embed_patient(model, s, policy.query_view_index));
    y_train.push_back(s.label);
  }

  std::vector<int> predictions;
  predictions.reserve(test.size());
  if (classifier == ClassifierKind::NearestCentroid) {
    NearestCentroidClassifier clf;
    clf.fit(x_train, y_train);
    for (const auto& s : test)
      predictions.push_back(clf.predict(embed_patient(model, s, policy.query_view_index)));
  } else {
    LinearProbeClassifier clf;
    clf.fit(x_train, y_train);
    for (const auto& s : test)
      predictions.push_back(clf.predict(embed_patient(model, s, policy.query_view_index)));
  }

  ConfusionCounts counts;
  for (size_t i = 0; i < test.size(); ++i) {
    const int truth = test[i].label;
    const int pred = predictions[i];
    if (truth == 1 && pred == 1) ++counts.tp;
    else if (truth == 0 && pred == 1) ++counts.fp;
    else if (truth == 0 && pred == 0) ++counts.tn;
    else ++counts.fn;
  }
  return counts;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

namespace {

struct Prf {
  double precision, recall, f1;
  bool p_def, r_def, f_def;
};

Prf prf_from(long tp, long fp, long fn) {
  Prf out{0.0, 0.0, 0.0, tp + fp > 0, tp + fn > 0, false};
  if (out.p_def) out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (out.r_def) out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  out.f_def = out.p_def && out.r_def && out.precision + out.recall > 0.0;
  if (out.f_def) out.f1 = f1_score(out.precision, out.recall);
  return out;
}

}  // namespace

ClassificationMetrics compute_metrics(const ConfusionCounts& c, MetricAveraging averaging) {
  const long total = c.total();
  if (total == 0) throw EmptyCounts("compute_metrics: no evaluated patients");

  ClassificationMetrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(total);

  const Prf pos = prf_from(c.tp, c.fp, c.fn);
  if (averaging == MetricAveraging::PositiveClass) {
    m.precision = pos.precision;
    m.recall = pos.recall;
    m.f1 = pos.f1;
    m.precision_defined = pos.p_def;
    m.recall_defined = pos.r_def;
    m.f1_defined = pos.f_def;
    return m;
  }

  // macro: the negative class seen as its own positive
  const Prf neg = prf_from(c.tn, c.fn, c.fp);
  m.precision = 0.5 * (pos.precision + neg.precision);
  m.recall = 0.5 * (pos.recall + neg.recall);
  m.f1 = 0.5 * (pos.f1 + neg.f1);
  m.precision_defined = pos.p_def && neg.p_def;
  m.recall_defined = pos.r_def && neg.r_def;
  m.f1_defined = pos.f_def && neg.f_def;
  return m;
}

AlignmentUniformity alignment_uniformity(const std::vector<Vec>& embeddings,
                                         const std::vector<std::pair<int, int>>& positive_pairs) {
  if (positive_pairs.empty()) throw NoPairs("alignment_uniformity: no positive pairs");
  if (embeddings.size() < 2)
    throw NoPairs("alignment_uniformity: need at least 2 embeddings");

  const int n = static_cast<int>(embeddings.size());
  auto sqdist = [&](int i, int j) {
    const Vec& a = embeddings[static_cast<size_t>(i)];
    const Vec& b = embeddings[static_cast<size_t>(j)];
    if (a.size() != b.size())
      throw DimensionMismatch("alignment_uniformity: embedding dimensions differ");
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
      const double d = a[k] - b[k];
      s += d * d;
    }
    return s;
  };

  AlignmentUniformity out;
  for (const auto& [i, p] : positive_pairs) {
    if (i < 0 || i >= n || p < 0 || p >= n)
      throw InvalidConfig("alignment_uniformity: pair index out of range");
    out.alignment += sqdist(i, p);
  }
  out.alignment /= static_cast<double>(positive_pairs.size());

  double mean_potential = 0.0;
  size_t pairs = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      mean_potential += std::exp(-2.0 * sqdist(i, j));
      ++pairs;
    }
  mean_potential /= static_cast<double>(pairs);
  out.uniformity = std::log(mean_potential);
  return out;
}

namespace {

// Diagnostic positive pairs over one fold's view embeddings: the anchor view
// against the patient's other views, plus all views of same-label patients
// under the extended scope. Mirrors the batch pairing rules.
std::vector<std::pair<int, int>> diagnostic_pairs(const std::vector<MultiViewSample>& patients,
                                                  const PairingPolicy& policy) {
  const int n = static_cast<int>(patients.size());
  const int m = n > 0 ? static_cast<int>(patients.front().views.size()) : 0;
  const int q = policy.query_view_index;
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int v = 0; v < m; ++v)
      if (v != q) pairs.emplace_back(i * m + q, i * m + v);
    if (policy.positive_scope == PositiveScope::SamePatientOrSameLabel) {
      for (int j = 0; j < n; ++j) {
        if (j == i || patients[static_cast<size_t>(j)].label != patients[static_cast<size_t>(i)].label)
          continue;
        for (int v = 0; v < m; ++v) pairs.emplace_back(i * m + q, j * m + v);
      }
    }
  }
  return pairs;
}

FoldMetrics run_one_fold(const Dataset& ds, const FoldAssignment& folds, int fold,
                         const TrainConfig& cfg) {
  std::vector<MultiViewSample> train, test;
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    if (folds.fold_by_patient[i] == fold)
      test.push_back(ds.samples[i]);
    else
      train.push_back(ds.samples[i]);
  }

  TrainConfig fold_cfg = cfg;
  fold_cfg.rng_seed = mix_seed(cfg.rng_seed, 0xF01D0000ull + static_cast<std::uint64_t>(fold));
  const FoldTrainResult trained = train_fold(train, fold_cfg);

  FoldMetrics fm = evaluate_fold_metrics(trained.model, train, test, cfg.policy, cfg.classifier);
  fm.fold = fold;
  return fm;
}

}  // namespace

FoldMetrics evaluate_fold_metrics(const TrainedModel& model,
                                  const std::vector<MultiViewSample>& train,
                                  const std::vector<MultiViewSample>& test,
                                  const PairingPolicy& policy, ClassifierKind classifier) {
  FoldMetrics fm;
  fm.counts = evaluate_fold(model, train, test, policy, classifier);
  fm.cls = compute_metrics(fm.counts);

  const int m = test.empty() ? 0 : static_cast<int>(test.front().views.size());
  std::vector<Vec> embeddings;
  embeddings.reserve(test.size() * static_cast<size_t>(m));
  for (const auto& s : test)
    for (int v = 0; v < m; ++v)
      embeddings.push_back(encoder_forward(model.encoder_for_view(v, policy.query_view_index),
                                           s.views[static_cast<size_t>(v)]));

  const auto pairs = diagnostic_pairs(test, policy);
  if (!pairs.empty() && embeddings.size() >= 2) {
    const AlignmentUniformity au = alignment_uniformity(embeddings, pairs);
    fm.alignment = au.alignment;
    fm.uniformity = au.uniformity;
    fm.alignment_pair_count = pairs.size();
    fm.uniformity_pair_count = embeddings.size() * (embeddings.size() - 1) / 2;
  } else {
    fm.alignment = std::numeric_limits<double>::quiet_NaN();
    fm.uniformity = std::numeric_limits<double>::quiet_NaN();
  }
  return fm;
}

CrossValReport cross_validate(const Dataset& ds, const TrainConfig& cfg, int jobs) {
  cfg.validate();
  if (ds.samples.empty()) throw InvalidConfig("cross_validate: empty dataset");
  const FoldAssignment folds = kfold_split(ds, cfg.k_folds, cfg.rng_seed, cfg.stratified_folds);

  CrossValReport report;
  report.folds.resize(static_cast<size_t>(cfg.k_folds));

  const int workers = std::max(1, std::min(jobs, cfg.k_folds));
  if (workers == 1) {
    for (int f = 0; f < cfg.k_folds; ++f)
      report.folds[static_cast<size_t>(f)] = run_one_fold(ds, folds, f, cfg);
  } else {
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
      for (;;) {
        const int f = next.fetch_add(1);
        if (f >= cfg.k_folds) return;
        try {
          report.folds[static_cast<size_t>(f)] = run_one_fold(ds, folds, f, cfg);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // fold-averaged row
  const double inv_k = 1.0 / static_cast<double>(cfg.k_folds);
  for (const FoldMetrics& f : report.folds) {
    report.mean.accuracy += inv_k * f.cls.accuracy;
    report.mean.precision += inv_k * f.cls.precision;
    report.mean.recall += inv_k * f.cls.recall;
    report.mean.f1 += inv_k * f.cls.f1;
    report.mean_alignment += inv_k * f.alignment;
    report.mean_uniformity += inv_k * f.uniformity;
    report.pooled_counts.tp += f.counts.tp;
    report.pooled_counts.fp += f.counts.fp;
    report.pooled_counts.tn += f.counts.tn;
    report.pooled_counts.fn += f.counts.fn;
  }
  report.pooled = compute_metrics(report.pooled_counts);

  // pooled diagnostics: the mean over all within-fold pairs
  double align_sum = 0.0, potential_sum = 0.0;
  size_t align_pairs = 0, unif_pairs = 0;
  for (const FoldMetrics& f : report.folds) {
    if (f.alignment_pair_count > 0) {
      align_sum += f.alignment * static_cast<double>(f.alignment_pair_count);
      align_pairs += f.alignment_pair_count;
    }
    if (f.uniformity_pair_count > 0) {
      potential_sum += std::exp(f.uniformity) * static_cast<double>(f.uniformity_pair_count);
      unif_pairs += f.uniformity_pair_count;
    }
  }
  report.pooled_alignment = align_pairs > 0
                                ? align_sum / static_cast<double>(align_pairs)
                                : std::numeric_limits<double>::quiet_NaN();
  report.pooled_uniformity = unif_pairs > 0
                                 ? std::log(potential_sum / static_cast<double>(unif_pairs))
                                 : std::numeric_limits<double>::quiet_NaN();
  return report;
}

namespace {

void append_metrics_row(std::string& out, const std::string& label,
                        const ClassificationMetrics& m, double alignment, double uniformity) {
  out += label;
  out += ',';
  out += fmt_g17(m.accuracy);
  out += ',';
  out += fmt_g17(m.precision);
  out += ',';
  out += fmt_g17(m.recall);
  out += ',';
  out += fmt_g17(m.f1);
  out += ',';
  out += fmt_g17(alignment);
  out += ',';
  out += fmt_g17(uniformity);
  out += '\n';
}

}  // namespace

std::string metrics_csv_string(const CrossValReport& report) {
  std::string out = "fold,accuracy,precision,recall,f1,alignment,uniformity\n";
  for (const FoldMetrics& f : report.folds)
    append_metrics_row(out, std::to_string(f.fold), f.cls, f.alignment, f.uniformity);
  append_metrics_row(out, "mean", report.mean, report.mean_alignment, report.mean_uniformity);
  append_metrics_row(out, "pooled", report.pooled, report.pooled_alignment,
                     report.pooled_uniformity);
  return out;
}

void write_metrics_csv(const CrossValReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_metrics_csv: cannot open '" + path + "'");
  out << metrics_csv_string(report);
  if (!out) throw IoError("write_metrics_csv: write to '" + path + "' failed");
}

void write_loss_curve(const std::vector<double>& epoch_mean_loss, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_loss_curve: cannot open '" + path + "'");
  out << "epoch,mean_loss\n";
  for (size_t e = 0; e < epoch_mean_loss.size(); ++e)
    out << e << ',' << fmt_g17(epoch_mean_loss[e]) << "\n";
}

namespace {

void write_encoder_block(std::ofstream& out, const char* name, const EncoderParams& p) {
  out << "encoder " << name << "\n";
  out << "activation " << to_string(p.activation) << "\n";
  out << "normalize " << (p.normalize_output ? 1 : 0) << "\n";
  out << "layers " << p.layers.size() << "\n";
  for (const EncoderLayer& l : p.layers) {
    out << "layer " << l.weight.rows << ' ' << l.weight.cols << "\n";
    for (int r = 0; r < l.weight.rows; ++r) {
      for (int c = 0; c < l.weight.cols; ++c) {
        if (c) out << ' ';
        out << fmt_g17(l.weight.at(r, c));
      }
      out << "\n";
    }
    for (size_t i = 0; i < l.bias.size(); ++i) {
      if (i) out << ' ';
      out << fmt_g17(l.bias[i]);
    }
    out << "\n";
  }
}

std::string next_line(std::ifstream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line))
    throw MalformedCheckpoint("checkpoint '" + path + "': unexpected end of file");
  return line;
}

std::vector<double> parse_value_line(const std::string& line, size_t expected,
                                     const std::string& path) {
  std::istringstream iss(line);
  std::vector<double> vals;
  std::string token;
  while (iss >> token) vals.push_back(parse_double(token, "checkpoint value"));
  if (vals.size() != expected)
    throw MalformedCheckpoint("checkpoint '" + path + "': expected " +
                              std::to_string(expected) + " values, got " +
                              std::to_string(vals.size()));
  return vals;
}

EncoderParams read_encoder_block(std::ifstream& in, const char* name, const std::string& path) {
  if (next_line(in, path) != std::string("encoder ") + name)
    throw MalformedCheckpoint("checkpoint '" + path + "': expected 'encoder " +
                              std::string(name) + "'");
  EncoderParams p;
  {
    const std::string line = next_line(in, path);
    if (line.rfind("activation ", 0) != 0)
      throw MalformedCheckpoint("checkpoint '" + path + "': expected activation line");
    p.activation = activation_from_string(line.substr(11));
  }
  {
    const std::string line = next_line(in, path);
    if (line != "normalize 0" && line != "normalize 1")
      throw MalformedCheckpoint("checkpoint '" + path + "': expected normalize line");
    p.normalize_output = line == "normalize 1";
  }
  size_t n_layers = 0;
  {
    const std::string line = next_line(in, path);
    if (line.rfind("layers ", 0) != 0)
      throw MalformedCheckpoint("checkpoint '" + path + "': expected layers line");
    n_layers = static_cast<size_t>(parse_int(line.substr(7), "checkpoint layer count"));
  }
  for (size_t l = 0; l < n_layers; ++l) {
    const std::string line = next_line(in, path);
    if (line.rfind("layer ", 0) != 0)
      throw MalformedCheckpoint("checkpoint '" + path + "': expected layer header");
    std::istringstream iss(line.substr(6));
    int rows = 0, cols = 0;
    if (!(iss >> rows >> cols) || rows < 1 || cols < 1)
      throw MalformedCheckpoint("checkpoint '" + path + "': bad layer dimensions");
    EncoderLayer layer;
    layer.weight = Matrix(rows, cols);
    for (int r = 0; r < rows; ++r) {
      const std::vector<double> vals =
          parse_value_line(next_line(in, path), static_cast<size_t>(cols), path);
      for (int c = 0; c < cols; ++c) layer.weight.at(r, c) = vals[static_cast<size_t>(c)];
    }
    layer.bias = parse_value_line(next_line(in, path), static_cast<size_t>(rows), path);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

}  // namespace

void save_checkpoint(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_checkpoint: cannot open '" + path + "'");
  out << "mmcon-checkpoint v1\n";
  out << "shared " << (model.shared ? 1 : 0) << "\n";
  write_encoder_block(out, "query", model.query_encoder);
  if (!model.shared) write_encoder_block(out, "view", model.view_encoder);
  out << "end\n";
  if (!out) throw IoError("save_checkpoint: write to '" + path + "' failed");
}

TrainedModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_checkpoint: cannot open '" + path + "'");
  if (next_line(in, path) != "mmcon-checkpoint v1")
    throw MalformedCheckpoint("checkpoint '" + path + "': unknown format or version");
  TrainedModel model;
  {
    const std::string line = next_line(in, path);
    if (line != "shared 0" && line != "shared 1")
      throw MalformedCheckpoint("checkpoint '" + path + "': expected shared line");
    model.shared = line == "shared 1";
  }
  model.query_encoder = read_encoder_block(in, "query", path);
  if (!model.shared) model.view_encoder = read_encoder_block(in, "view", path);
  if (next_line(in, path) != "end")
    throw MalformedCheckpoint("checkpoint '" + path + "': missing end marker");
  return model;
}

const char* to_string(ClassifierKind c) {
  return c == ClassifierKind::NearestCentroid ? "nearest_centroid" : "linear_probe";
}

}  // namespace mmcon
