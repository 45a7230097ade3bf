#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mmcon/data.hpp"
#include "mmcon/losses.hpp"
#include "mmcon/multiview.hpp"
#include "mmcon/numerics.hpp"

namespace mmcon {

struct EncoderSpec {
  std::vector<int> hidden_dims{32};
  int embed_dim = 16;
  Activation activation = Activation::Tanh;
  bool normalize_output = true;
  // One encoder for query and non-query views; when false the query view
  // gets its own encoder and the remaining views share a second one.
  bool shared = true;
};

enum class ClassifierKind { NearestCentroid, LinearProbe };

struct TrainConfig {
  LossKind loss_kind = LossKind::MMCon;
  LossConfig loss;
  int epochs = 300;
  int batch_size = 50;  // patients per mini-batch
  double learning_rate = 0.001;
  int k_folds = 10;
  std::uint64_t rng_seed = 0;
  PairingPolicy policy;
  EncoderSpec encoder;
  ClassifierKind classifier = ClassifierKind::NearestCentroid;
  bool stratified_folds = false;

  TrainConfig() { loss.mean_over_anchors = true; }
  void validate() const;
};

struct TrainedModel {
  bool shared = true;
  EncoderParams query_encoder;
  EncoderParams view_encoder;  // unused when shared

  const EncoderParams& encoder_for_view(int view, int query_view) const;
};

struct FoldTrainResult {
  TrainedModel model;
  std::vector<double> epoch_mean_loss;
};

// Mini-batch SGD: seeded patient reshuffle per epoch, encode all views,
// build the contrastive batch under the policy, backprop, SGD step.
FoldTrainResult train_fold(const std::vector<MultiViewSample>& train,
                           const TrainConfig& cfg);

// ---- training internals, exposed so the verification tools can drive the
// ---- exact same composition that training uses

struct BatchEncoding {
  ContrastiveBatch batch;
  std::vector<ForwardTrace> traces;  // aligned with batch.embeddings
  struct Source {
    bool via_query_encoder;
    int patient;
    int view;
  };
  std::vector<Source> sources;
};

BatchEncoding encode_contrastive_batch(const TrainedModel& model,
                                       const std::vector<MultiViewSample>& samples,
                                       const PairingPolicy& policy);

struct ModelGrads {
  EncoderGrads query;
  EncoderGrads view;  // empty when the model is shared
};

ModelGrads backprop_batch(const TrainedModel& model, const BatchEncoding& enc,
                          const std::vector<Vec>& embedding_grads);

// Per-view embeddings concatenated in view order (length m*d).
Vec embed_patient(const TrainedModel& model, const MultiViewSample& sample,
                  int query_view);

struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  long total() const { return tp + fp + tn + fn; }
};

// Nearest class centroid over concatenated patient embeddings (cosine
// distance, ties toward label 0), or a logistic probe fit on the frozen
// train embeddings. The predictor sees test features only.
ConfusionCounts evaluate_fold(const TrainedModel& model,
                              const std::vector<MultiViewSample>& train,
                              const std::vector<MultiViewSample>& test,
                              const PairingPolicy& policy,
                              ClassifierKind classifier = ClassifierKind::NearestCentroid);

enum class MetricAveraging { PositiveClass, Macro };

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // false when the corresponding ratio had a zero denominator and the value
  // was reported as 0
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
};

ClassificationMetrics compute_metrics(const ConfusionCounts& counts,
                                      MetricAveraging averaging = MetricAveraging::PositiveClass);

// 2pr/(p+r), or 0 when p + r == 0.
double f1_score(double precision, double recall);

struct AlignmentUniformity {
  double alignment = 0.0;
  double uniformity = 0.0;
};

// alignment = mean over positive pairs of ||z_i - z_p||^2;
// uniformity = log mean over distinct pairs of exp(-2 ||z_i - z_j||^2).
AlignmentUniformity alignment_uniformity(const std::vector<Vec>& embeddings,
                                         const std::vector<std::pair<int, int>>& positive_pairs);

struct FoldMetrics {
  int fold = 0;
  ConfusionCounts counts;
  ClassificationMetrics cls;
  double alignment = 0.0;  // NaN when the fold exposes no positive pairs
  double uniformity = 0.0;
  size_t alignment_pair_count = 0;
  size_t uniformity_pair_count = 0;
};

// Confusion counts, classification metrics and embedding diagnostics for one
// train/test split. The diagnostic positive pairs mirror the pairing policy:
// anchor view against the patient's other views, plus same-label views under
// the extended scope; alignment/uniformity are NaN when a split exposes no
// pairs (e.g. single-view data under the patient-only scope).
FoldMetrics evaluate_fold_metrics(const TrainedModel& model,
                                  const std::vector<MultiViewSample>& train,
                                  const std::vector<MultiViewSample>& test,
                                  const PairingPolicy& policy,
                                  ClassifierKind classifier = ClassifierKind::NearestCentroid);

struct CrossValReport {
  std::vector<FoldMetrics> folds;
  // fold-averaged and pooled readings are both reported
  ClassificationMetrics mean;
  double mean_alignment = 0.0;
  double mean_uniformity = 0.0;
  ConfusionCounts pooled_counts;
  ClassificationMetrics pooled;
  double pooled_alignment = 0.0;
  double pooled_uniformity = 0.0;
};

// Patient-level k-fold protocol; folds may run concurrently (jobs > 1) and
// are merged in fold order, so the report is identical either way.
CrossValReport cross_validate(const Dataset& ds, const TrainConfig& cfg, int jobs = 1);

// fold,accuracy,precision,recall,f1,alignment,uniformity rows (one per fold,
// then `mean` and `pooled`), %.17g throughout.
std::string metrics_csv_string(const CrossValReport& report);
void write_metrics_csv(const CrossValReport& report, const std::string& path);
void write_loss_curve(const std::vector<double>& epoch_mean_loss, const std::string& path);

// Versioned exact-precision text serialization of the trained encoders.
void save_checkpoint(const TrainedModel& model, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

const char* to_string(ClassifierKind c);

}  // namespace mmcon
