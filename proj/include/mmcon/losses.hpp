#pragma once

#include <vector>

#include "mmcon/numerics.hpp"

namespace mmcon {

// Which terms the softmax denominator sums over. NegativesOnly follows the
// printed loss (denominator over the negative index set A(i)); AllNonAnchor
// is the conventional form (denominator over P(i) u A(i)).
enum class DenominatorMode { NegativesOnly, AllNonAnchor };

// Literal applies the margin to positive and negative terms alike, exactly as
// the margined losses are printed. PositiveOnly applies the margin to
// positive-pair similarities wherever they appear (numerator, and denominator
// entries under AllNonAnchor) and leaves negatives unmargined — the standard
// additive-margin convention. Note that for the scalar margin the Literal
// form cancels between numerator and denominator, so the loss is constant in
// the margin value.
enum class MarginMode { Literal, PositiveOnly };

enum class LossKind { SupCon, MarginCon, MMCon };

struct LossConfig {
  double temperature = 0.07;
  double scalar_margin = 0.2;   // m, subtracted from the cosine similarity
  double angular_margin = 0.0;  // alpha, added to the positive-pair angle
  DenominatorMode denominator_mode = DenominatorMode::NegativesOnly;
  MarginMode margin_mode = MarginMode::PositiveOnly;
  // When set, per-anchor terms carry a 1/N factor so the scalar is the mean
  // over anchors instead of the plain sum.
  bool mean_over_anchors = false;

  void validate() const;
};

struct AnchorSet {
  int anchor = 0;
  std::vector<int> positives;  // P(i)
  std::vector<int> negatives;  // A(i)
};

struct ContrastiveBatch {
  std::vector<Vec> embeddings;
  std::vector<AnchorSet> anchors;

  // Structural checks: index ranges, anchor not in its own sets,
  // P(i) and A(i) disjoint, no duplicates, uniform embedding dimension.
  void validate() const;
};

struct LossValue {
  double scalar = 0.0;
  std::vector<double> per_anchor;  // scalar == sum(per_anchor)
};

// dot(u,v)/(||u|| ||v||), clamped to [-1, 1].
double cosine_similarity(const Vec& u, const Vec& v);
// arccos of the clamped cosine similarity, in [0, pi].
double angle_between(const Vec& u, const Vec& v);

LossValue supcon_loss(const ContrastiveBatch& batch, const LossConfig& cfg);
LossValue margin_con_loss(const ContrastiveBatch& batch, const LossConfig& cfg);
LossValue mmcon_loss(const ContrastiveBatch& batch, const LossConfig& cfg);
LossValue loss_forward(LossKind kind, const ContrastiveBatch& batch, const LossConfig& cfg);

struct LossGradients {
  LossValue value;
  std::vector<Vec> embedding_grads;  // one gradient per batch embedding
};

// Forward value plus analytic gradients w.r.t. every embedding. The losses
// are built on the inside-normalized cosine, so each gradient is orthogonal
// to its own embedding direction.
LossGradients loss_value_and_grad(LossKind kind, const ContrastiveBatch& batch,
                                  const LossConfig& cfg);

std::vector<Vec> loss_backward(const ContrastiveBatch& batch, const LossConfig& cfg,
                               LossKind kind);

const char* to_string(LossKind k);
const char* to_string(DenominatorMode m);
const char* to_string(MarginMode m);

}  // namespace mmcon
