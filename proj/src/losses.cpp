#include "mmcon/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mmcon {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp_unit(double c) { return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c); }

// A transformed similarity together with its derivative w.r.t. the cosine.
struct Transformed {
  double value;
  double deriv;
};

Transformed identity_transform(double c) { return {c, 1.0}; }

Transformed shift_transform(double c, double m) { return {c - m, 1.0}; }

// cos(theta + alpha) with theta = arccos(c), clamped so theta + alpha <= pi.
// Expanded as c*cos(alpha) - sqrt(1-c^2)*sin(alpha); at alpha = 0 this is c
// exactly, so the reduction to the unmargined loss is bit-exact.
Transformed angular_transform(double c, double alpha) {
  const double theta = std::acos(c);
  if (theta + alpha >= kPi) return {-1.0, 0.0};
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  const double value = c * std::cos(alpha) - s * std::sin(alpha);
  const double deriv = std::cos(alpha) + std::sin(alpha) * c / std::max(s, 1e-12);
  return {value, deriv};
}

Transformed positive_transform(LossKind kind, const LossConfig& cfg, double c) {
  switch (kind) {
    case LossKind::SupCon: return identity_transform(c);
    case LossKind::MarginCon: return angular_transform(c, cfg.angular_margin);
    case LossKind::MMCon: return shift_transform(c, cfg.scalar_margin);
  }
  return identity_transform(c);
}

Transformed negative_transform(LossKind kind, const LossConfig& cfg, double c) {
  if (kind == LossKind::SupCon || cfg.margin_mode == MarginMode::PositiveOnly)
    return identity_transform(c);
  return positive_transform(kind, cfg, c);
}

struct PairEntry {
  int idx;
  double raw_c;  // unclamped cosine, used for the gradient chain
  Transformed t;
};

}  // namespace

void LossConfig::validate() const {
  if (!(temperature > 0.0)) throw InvalidConfig("loss: temperature must be > 0");
  if (scalar_margin < 0.0) throw InvalidConfig("loss: scalar margin must be >= 0");
  if (angular_margin < 0.0 || angular_margin >= kPi / 2.0)
    throw InvalidConfig("loss: angular margin must lie in [0, pi/2)");
}

void ContrastiveBatch::validate() const {
  if (embeddings.empty()) throw InvalidConfig("batch: no embeddings");
  const size_t dim = embeddings.front().size();
  if (dim == 0) throw InvalidConfig("batch: zero-dimensional embeddings");
  for (const Vec& e : embeddings)
    if (e.size() != dim) throw DimensionMismatch("batch: embedding dimensions differ");
  if (anchors.empty()) throw InvalidConfig("batch: no anchors");

  const int n = static_cast<int>(embeddings.size());
  std::vector<unsigned char> mark(static_cast<size_t>(n));
  for (const AnchorSet& a : anchors) {
    if (a.anchor < 0 || a.anchor >= n)
      throw InvalidConfig("batch: anchor index out of range");
    std::fill(mark.begin(), mark.end(), 0);
    mark[static_cast<size_t>(a.anchor)] = 1;
    for (int p : a.positives) {
      if (p < 0 || p >= n) throw InvalidConfig("batch: positive index out of range");
      if (mark[static_cast<size_t>(p)])
        throw InvalidConfig("batch: anchor " + std::to_string(a.anchor) +
                            " has overlapping or duplicate indices in its sets");
      mark[static_cast<size_t>(p)] = 2;
    }
    for (int q : a.negatives) {
      if (q < 0 || q >= n) throw InvalidConfig("batch: negative index out of range");
      if (mark[static_cast<size_t>(q)])
        throw InvalidConfig("batch: anchor " + std::to_string(a.anchor) +
                            " has overlapping or duplicate indices in its sets");
      mark[static_cast<size_t>(q)] = 3;
    }
  }
}

double cosine_similarity(const Vec& u, const Vec& v) {
  if (u.size() != v.size())
    throw DimensionMismatch("cosine_similarity: vector lengths differ");
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw ZeroNorm("cosine_similarity: zero-norm vector");
  return clamp_unit(dot(u, v) / (nu * nv));
}

double angle_between(const Vec& u, const Vec& v) {
  return std::acos(cosine_similarity(u, v));
}

namespace {

LossGradients evaluate_loss(LossKind kind, const ContrastiveBatch& batch,
                            const LossConfig& cfg, bool want_grads) {
  cfg.validate();
  batch.validate();

  const size_t n = batch.embeddings.size();
  const size_t dim = batch.embeddings.front().size();

  std::vector<double> norms(n);
  for (size_t i = 0; i < n; ++i) norms[i] = norm(batch.embeddings[i]);

  LossGradients out;
  if (want_grads) out.embedding_grads.assign(n, Vec(dim, 0.0));
  out.value.per_anchor.reserve(batch.anchors.size());

  const double tau = cfg.temperature;
  const double anchor_scale =
      cfg.mean_over_anchors ? 1.0 / static_cast<double>(batch.anchors.size()) : 1.0;

  auto cosine_to = [&](int q, int j) -> double {
    if (norms[static_cast<size_t>(q)] == 0.0 || norms[static_cast<size_t>(j)] == 0.0)
      throw ZeroNorm("loss: zero-norm embedding at index " +
                     std::to_string(norms[static_cast<size_t>(q)] == 0.0 ? q : j));
    return dot(batch.embeddings[static_cast<size_t>(q)],
               batch.embeddings[static_cast<size_t>(j)]) /
           (norms[static_cast<size_t>(q)] * norms[static_cast<size_t>(j)]);
  };

  // d(cos)/d(z_q) and d(cos)/d(z_j), chained with the pair's accumulated
  // gradient g. Uses the unclamped cosine; clamping only ever trims
  // floating-point overshoot past +-1.
  auto distribute = [&](int q, int j, double raw_c, double g) {
    const Vec& u = batch.embeddings[static_cast<size_t>(q)];
    const Vec& v = batch.embeddings[static_cast<size_t>(j)];
    const double nu = norms[static_cast<size_t>(q)];
    const double nv = norms[static_cast<size_t>(j)];
    Vec& gu = out.embedding_grads[static_cast<size_t>(q)];
    Vec& gv = out.embedding_grads[static_cast<size_t>(j)];
    const double inv_uv = 1.0 / (nu * nv);
    const double cu = raw_c / (nu * nu);
    const double cv = raw_c / (nv * nv);
    for (size_t i = 0; i < dim; ++i) {
      gu[i] += g * (v[i] * inv_uv - cu * u[i]);
      gv[i] += g * (u[i] * inv_uv - cv * v[i]);
    }
  };

  std::vector<PairEntry> pos;
  std::vector<PairEntry> neg;

  for (const AnchorSet& a : batch.anchors) {
    if (a.positives.empty())
      throw EmptyPositiveSet("loss: anchor " + std::to_string(a.anchor) +
                             " has no positives");

    pos.clear();
    neg.clear();
    for (int p : a.positives) {
      const double raw = cosine_to(a.anchor, p);
      pos.push_back({p, raw, positive_transform(kind, cfg, clamp_unit(raw))});
    }
    for (int q : a.negatives) {
      const double raw = cosine_to(a.anchor, q);
      neg.push_back({q, raw, negative_transform(kind, cfg, clamp_unit(raw))});
    }

    const bool pos_in_denom = cfg.denominator_mode == DenominatorMode::AllNonAnchor;
    const size_t denom_count = neg.size() + (pos_in_denom ? pos.size() : 0);
    if (denom_count == 0)
      throw EmptyDenominator("loss: empty denominator for anchor " +
                             std::to_string(a.anchor));

    // log-sum-exp with max-shift over the denominator terms
    double max_v = -std::numeric_limits<double>::infinity();
    if (pos_in_denom)
      for (const PairEntry& e : pos) max_v = std::max(max_v, e.t.value / tau);
    for (const PairEntry& e : neg) max_v = std::max(max_v, e.t.value / tau);

    double sum_exp = 0.0;
    if (pos_in_denom)
      for (const PairEntry& e : pos) sum_exp += std::exp(e.t.value / tau - max_v);
    for (const PairEntry& e : neg) sum_exp += std::exp(e.t.value / tau - max_v);
    const double lse = max_v + std::log(sum_exp);

    double mean_num = 0.0;
    for (const PairEntry& e : pos) mean_num += e.t.value / tau;
    mean_num /= static_cast<double>(pos.size());

    out.value.per_anchor.push_back(anchor_scale * (lse - mean_num));

    if (want_grads) {
      const double inv_p_tau =
          1.0 / (static_cast<double>(pos.size()) * tau);
      for (const PairEntry& e : pos) {
        double g = -anchor_scale * e.t.deriv * inv_p_tau;
        if (pos_in_denom) {
          const double w = std::exp(e.t.value / tau - max_v) / sum_exp;
          g += anchor_scale * w * e.t.deriv / tau;
        }
        if (g != 0.0) distribute(a.anchor, e.idx, e.raw_c, g);
      }
      for (const PairEntry& e : neg) {
        const double w = std::exp(e.t.value / tau - max_v) / sum_exp;
        const double g = anchor_scale * w * e.t.deriv / tau;
        if (g != 0.0) distribute(a.anchor, e.idx, e.raw_c, g);
      }
    }
  }

  out.value.scalar = 0.0;
  for (double t : out.value.per_anchor) out.value.scalar += t;
  if (!std::isfinite(out.value.scalar)) throw NonFiniteLoss("loss: non-finite value");
  return out;
}

}  // namespace

LossValue loss_forward(LossKind kind, const ContrastiveBatch& batch, const LossConfig& cfg) {
  return evaluate_loss(kind, batch, cfg, /*want_grads=*/false).value;
}

LossValue supcon_loss(const ContrastiveBatch& batch, const LossConfig& cfg) {
  return loss_forward(LossKind::SupCon, batch, cfg);
}

LossValue margin_con_loss(const ContrastiveBatch& batch, const LossConfig& cfg) {
  return loss_forward(LossKind::MarginCon, batch, cfg);
}

LossValue mmcon_loss(const ContrastiveBatch& batch, const LossConfig& cfg) {
  return loss_forward(LossKind::MMCon, batch, cfg);
}

LossGradients loss_value_and_grad(LossKind kind, const ContrastiveBatch& batch,
                                  const LossConfig& cfg) {
  return evaluate_loss(kind, batch, cfg, /*want_grads=*/true);
}

std::vector<Vec> loss_backward(const ContrastiveBatch& batch, const LossConfig& cfg,
                               LossKind kind) {
  return evaluate_loss(kind, batch, cfg, /*want_grads=*/true).embedding_grads;
}

const char* to_string(LossKind k) {
  switch (k) {
    case LossKind::SupCon: return "supcon";
    case LossKind::MarginCon: return "margin_con";
    case LossKind::MMCon: return "mmcon";
  }
  return "?";
}

const char* to_string(DenominatorMode m) {
  return m == DenominatorMode::NegativesOnly ? "negatives_only" : "all_non_anchor";
}

const char* to_string(MarginMode m) {
  return m == MarginMode::Literal ? "literal" : "positive_only";
}

}  // namespace mmcon
