#include "mmcon/reference.hpp"

#include <cmath>

namespace mmcon {

namespace {

constexpr double kPi = 3.14159265358979323846;

double ref_cosine(const Vec& u, const Vec& v) {
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  const double nu = std::sqrt(uu);
  const double nv = std::sqrt(vv);
  if (nu == 0.0 || nv == 0.0) throw ZeroNorm("reference loss: zero-norm embedding");
  double c = uv / (nu * nv);
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return c;
}

double angular_margined(double c, double alpha) {
  const double theta = std::acos(c);
  const double shifted = theta + alpha;
  return std::cos(shifted < kPi ? shifted : kPi);
}

// Positive/negative similarity transforms per loss kind and margin mode.
double positive_term(LossKind kind, const LossConfig& cfg, double c) {
  switch (kind) {
    case LossKind::SupCon: return c;
    case LossKind::MarginCon: return angular_margined(c, cfg.angular_margin);
    case LossKind::MMCon: return c - cfg.scalar_margin;
  }
  return c;
}

double negative_term(LossKind kind, const LossConfig& cfg, double c) {
  if (kind == LossKind::SupCon || cfg.margin_mode == MarginMode::PositiveOnly) return c;
  return positive_term(kind, cfg, c);
}

}  // namespace

LossValue reference_loss_forward(LossKind kind, const ContrastiveBatch& batch,
                                 const LossConfig& cfg) {
  cfg.validate();
  batch.validate();

  LossValue out;
  out.per_anchor.reserve(batch.anchors.size());
  const double anchor_scale =
      cfg.mean_over_anchors && !batch.anchors.empty()
          ? 1.0 / static_cast<double>(batch.anchors.size())
          : 1.0;

  for (const AnchorSet& a : batch.anchors) {
    if (a.positives.empty())
      throw EmptyPositiveSet("reference loss: anchor " + std::to_string(a.anchor) +
                             " has no positives");
    const Vec& zq = batch.embeddings[static_cast<size_t>(a.anchor)];

    double denom = 0.0;
    size_t denom_terms = 0;
    if (cfg.denominator_mode == DenominatorMode::AllNonAnchor) {
      for (int p : a.positives) {
        const double c = ref_cosine(zq, batch.embeddings[static_cast<size_t>(p)]);
        denom += std::exp(positive_term(kind, cfg, c) / cfg.temperature);
        ++denom_terms;
      }
    }
    for (int n : a.negatives) {
      const double c = ref_cosine(zq, batch.embeddings[static_cast<size_t>(n)]);
      denom += std::exp(negative_term(kind, cfg, c) / cfg.temperature);
      ++denom_terms;
    }
    if (denom_terms == 0)
      throw EmptyDenominator("reference loss: empty denominator for anchor " +
                             std::to_string(a.anchor));

    double sum_terms = 0.0;
    for (int p : a.positives) {
      const double c = ref_cosine(zq, batch.embeddings[static_cast<size_t>(p)]);
      const double numer = std::exp(positive_term(kind, cfg, c) / cfg.temperature);
      sum_terms += -std::log(numer / denom);
    }
    const double term =
        anchor_scale * sum_terms / static_cast<double>(a.positives.size());
    out.per_anchor.push_back(term);
  }

  out.scalar = 0.0;
  for (double t : out.per_anchor) out.scalar += t;
  if (!std::isfinite(out.scalar))
    throw NonFiniteLoss("reference loss: non-finite value");
  return out;
}

LossValue reference_supcon_loss(const ContrastiveBatch& batch, const LossConfig& cfg) {
  return reference_loss_forward(LossKind::SupCon, batch, cfg);
}

LossValue reference_margin_con_loss(const ContrastiveBatch& batch, const LossConfig& cfg) {
  return reference_loss_forward(LossKind::MarginCon, batch, cfg);
}

LossValue reference_mmcon_loss(const ContrastiveBatch& batch, const LossConfig& cfg) {
  return reference_loss_forward(LossKind::MMCon, batch, cfg);
}

}  // namespace mmcon
