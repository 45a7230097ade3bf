#include "mmcon/verify.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "mmcon/reference.hpp"
#include "mmcon/rng.hpp"

namespace mmcon {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vec random_unit_vector(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(static_cast<size_t>(dim));
  double n = 0.0;
  do {
    for (double& x : v) x = gauss(rng);
    n = norm(v);
  } while (n < 1e-6);
  for (double& x : v) x /= n;
  return v;
}

// N random unit embeddings; every index is an anchor with the rest split
// randomly into at least one positive and at least one negative.
ContrastiveBatch random_batch(std::mt19937_64& rng, int n, int dim) {
  ContrastiveBatch batch;
  batch.embeddings.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) batch.embeddings.push_back(random_unit_vector(rng, dim));

  for (int i = 0; i < n; ++i) {
    std::vector<int> others;
    others.reserve(static_cast<size_t>(n) - 1);
    for (int j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    const std::vector<int> perm = shuffled_indices(static_cast<int>(others.size()), rng);
    const int n_pos = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(others.size() - 1));
    AnchorSet a;
    a.anchor = i;
    for (size_t k = 0; k < others.size(); ++k) {
      const int idx = others[static_cast<size_t>(perm[k])];
      if (static_cast<int>(k) < n_pos)
        a.positives.push_back(idx);
      else
        a.negatives.push_back(idx);
    }
    batch.anchors.push_back(std::move(a));
  }
  return batch;
}

}  // namespace

OracleCheckResult run_loss_oracle_check(std::uint64_t seed, int n_batches,
                                        int max_batch_embeddings) {
  const auto start = Clock::now();
  std::mt19937_64 rng(mix_seed(seed, 0x0AC1Eull));

  const double taus[] = {0.07, 0.2, 1.0};
  const double scalar_margins[] = {0.0, 0.2, 0.5};
  const double angular_margins[] = {0.0, 0.1, 0.25};

  OracleCheckResult res;
  for (int b = 0; b < n_batches; ++b) {
    const int n = 3 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_batch_embeddings - 2));
    const int dim = 2 + static_cast<int>(rng() % 5);
    const ContrastiveBatch batch = random_batch(rng, n, dim);
    ++res.batches;

    LossConfig cfg;
    cfg.temperature = taus[rng() % 3];
    cfg.scalar_margin = scalar_margins[rng() % 3];
    cfg.angular_margin = angular_margins[rng() % 3];
    cfg.mean_over_anchors = (rng() % 2) == 0;

    for (LossKind kind : {LossKind::SupCon, LossKind::MarginCon, LossKind::MMCon}) {
      for (DenominatorMode dm : {DenominatorMode::NegativesOnly, DenominatorMode::AllNonAnchor}) {
        for (MarginMode mm : {MarginMode::Literal, MarginMode::PositiveOnly}) {
          cfg.denominator_mode = dm;
          cfg.margin_mode = mm;
          const LossValue fast = loss_forward(kind, batch, cfg);
          const LossValue naive = reference_loss_forward(kind, batch, cfg);
          res.max_abs_diff = std::max(res.max_abs_diff, std::abs(fast.scalar - naive.scalar));
          for (size_t i = 0; i < fast.per_anchor.size(); ++i)
            res.max_abs_diff = std::max(
                res.max_abs_diff, std::abs(fast.per_anchor[i] - naive.per_anchor[i]));
          ++res.comparisons;
        }
      }
    }
  }
  res.seconds = seconds_since(start);
  return res;
}

CompositionGradCheckResult run_composition_gradient_check(std::uint64_t seed, int n_configs,
                                                          double fd_step) {
  const auto start = Clock::now();
  std::mt19937_64 rng(mix_seed(seed, 0x6AD0C4Eull));
  std::normal_distribution<double> gauss(0.0, 1.0);

  CompositionGradCheckResult res;
  for (int c = 0; c < n_configs; ++c) {
    const int n_patients = 3 + static_cast<int>(rng() % 2);
    const int m = 2 + static_cast<int>(rng() % 2);
    const int d_in = 3 + static_cast<int>(rng() % 2);
    const int hidden = 4 + static_cast<int>(rng() % 2);
    const int embed = 3 + static_cast<int>(rng() % 2);
    const bool shared = c % 5 != 4;

    std::vector<MultiViewSample> samples(static_cast<size_t>(n_patients));
    for (int p = 0; p < n_patients; ++p) {
      samples[static_cast<size_t>(p)].patient_id = "G" + std::to_string(p);
      samples[static_cast<size_t>(p)].label = p % 2;
      for (int v = 0; v < m; ++v) {
        Vec x(static_cast<size_t>(d_in));
        for (double& e : x) e = gauss(rng);
        samples[static_cast<size_t>(p)].views.push_back(std::move(x));
      }
    }

    PairingPolicy policy;
    policy.positive_scope = (c % 2 == 0) ? PositiveScope::SamePatientViews
                                         : PositiveScope::SamePatientOrSameLabel;

    const LossKind kind = static_cast<LossKind>(c % 3);
    LossConfig lcfg;
    lcfg.temperature = (c % 2 == 0) ? 0.07 : 0.2;
    lcfg.scalar_margin = 0.2;
    lcfg.angular_margin = 0.15;
    lcfg.denominator_mode = (c % 4 < 2) ? DenominatorMode::NegativesOnly
                                        : DenominatorMode::AllNonAnchor;
    lcfg.margin_mode = (c % 2 == 0) ? MarginMode::PositiveOnly : MarginMode::Literal;
    lcfg.mean_over_anchors = c % 3 == 0;

    // Smooth activation: finite differences need twice-differentiable maps.
    TrainedModel base;
    base.shared = shared;
    base.query_encoder = make_encoder({d_in, hidden, embed}, Activation::Tanh, true,
                                      mix_seed(seed, 0x51ull + static_cast<std::uint64_t>(c)));
    if (!shared)
      base.view_encoder = make_encoder({d_in, hidden, embed}, Activation::Tanh, true,
                                       mix_seed(seed, 0x52ull + static_cast<std::uint64_t>(c)));

    Vec flat = flatten_parameters(base.query_encoder);
    const size_t nq = flat.size();
    if (!shared) {
      const Vec vf = flatten_parameters(base.view_encoder);
      flat.insert(flat.end(), vf.begin(), vf.end());
    }

    auto model_with = [&](const Vec& f) {
      TrainedModel mdl = base;
      assign_parameters(mdl.query_encoder, Vec(f.begin(), f.begin() + static_cast<long>(nq)));
      if (!mdl.shared)
        assign_parameters(mdl.view_encoder, Vec(f.begin() + static_cast<long>(nq), f.end()));
      return mdl;
    };

    auto loss_at = [&](const Vec& f) -> double {
      const TrainedModel mdl = model_with(f);
      const BatchEncoding enc = encode_contrastive_batch(mdl, samples, policy);
      return loss_forward(kind, enc.batch, lcfg).scalar;
    };

    const BatchEncoding enc = encode_contrastive_batch(base, samples, policy);
    const LossGradients lg = loss_value_and_grad(kind, enc.batch, lcfg);
    const ModelGrads mg = backprop_batch(base, enc, lg.embedding_grads);
    Vec analytic = flatten_gradients(mg.query);
    if (!shared) {
      const Vec vg = flatten_gradients(mg.view);
      analytic.insert(analytic.end(), vg.begin(), vg.end());
    }

    const GradCheckReport report = finite_difference_check(loss_at, flat, analytic, fd_step);
    res.max_relative_error = std::max(res.max_relative_error, report.max_relative_error);
    ++res.configs;
  }
  res.seconds = seconds_since(start);
  return res;
}

}  // namespace mmcon
