#include "mmcon/multiview.hpp"

namespace mmcon {

ContrastiveBatch build_contrastive_batch(const std::vector<MultiViewSample>& samples,
                                         const std::vector<std::vector<Vec>>& embeddings,
                                         const PairingPolicy& policy,
                                         const std::vector<Vec>* anchor_embeddings) {
  const int n = static_cast<int>(samples.size());
  if (n < 2) throw SingletonBatch("batch construction needs at least 2 patients");
  if (embeddings.size() != samples.size())
    throw MixedDimensions("one embedding row per patient required");

  const int m = static_cast<int>(samples.front().views.size());
  if (m < 1) throw MixedDimensions("patients must carry at least one view");
  if (policy.query_view_index < 0 || policy.query_view_index >= m)
    throw InvalidConfig("query view index " + std::to_string(policy.query_view_index) +
                        " out of range for " + std::to_string(m) + " views");

  size_t dim = 0;
  for (int p = 0; p < n; ++p) {
    if (static_cast<int>(samples[static_cast<size_t>(p)].views.size()) != m ||
        static_cast<int>(embeddings[static_cast<size_t>(p)].size()) != m)
      throw MixedDimensions("patient " + samples[static_cast<size_t>(p)].patient_id +
                            " does not have " + std::to_string(m) + " views");
    const int label = samples[static_cast<size_t>(p)].label;
    if (label != 0 && label != 1)
      throw InvalidConfig("patient " + samples[static_cast<size_t>(p)].patient_id +
                          " has non-binary label " + std::to_string(label));
    for (const Vec& e : embeddings[static_cast<size_t>(p)]) {
      if (dim == 0) dim = e.size();
      if (e.size() != dim) throw MixedDimensions("embedding dimensions differ across views");
    }
  }

  ContrastiveBatch batch;
  batch.embeddings.reserve(static_cast<size_t>(n) * static_cast<size_t>(m) +
                           (anchor_embeddings ? static_cast<size_t>(n) : 0));
  for (int p = 0; p < n; ++p)
    for (int v = 0; v < m; ++v)
      batch.embeddings.push_back(embeddings[static_cast<size_t>(p)][static_cast<size_t>(v)]);

  if (anchor_embeddings) {
    if (static_cast<int>(anchor_embeddings->size()) != n)
      throw MixedDimensions("one anchor embedding per patient required");
    for (const Vec& e : *anchor_embeddings)
      if (e.size() != dim) throw MixedDimensions("anchor embedding dimension differs");
    batch.embeddings.insert(batch.embeddings.end(), anchor_embeddings->begin(),
                            anchor_embeddings->end());
  }

  const bool label_positives = policy.positive_scope == PositiveScope::SamePatientOrSameLabel;
  batch.anchors.reserve(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    AnchorSet a;
    a.anchor = anchor_embeddings ? n * m + p : p * m + policy.query_view_index;
    // The patient's own query-view entry never joins its own sets; with
    // separate anchor embeddings it still serves other patients as a
    // positive or negative.
    for (int v = 0; v < m; ++v)
      if (v != policy.query_view_index) a.positives.push_back(p * m + v);
    for (int q = 0; q < n; ++q) {
      if (q == p) continue;
      const bool same_label = samples[static_cast<size_t>(q)].label ==
                              samples[static_cast<size_t>(p)].label;
      if (label_positives && same_label) {
        for (int v = 0; v < m; ++v) a.positives.push_back(q * m + v);
      } else {
        for (int v = 0; v < m; ++v) a.negatives.push_back(q * m + v);
      }
    }
    batch.anchors.push_back(std::move(a));
  }
  return batch;
}

std::vector<double> multiview_similarity(const Vec& query,
                                         const std::vector<Vec>& positives,
                                         const PairingPolicy& policy) {
  if (positives.empty()) throw InvalidConfig("multiview_similarity: no positives");
  std::vector<double> sims;
  if (policy.aggregation == Aggregation::PerPair) {
    sims.reserve(positives.size());
    for (const Vec& p : positives) sims.push_back(cosine_similarity(query, p));
    return sims;
  }
  Vec mean(positives.front().size(), 0.0);
  for (const Vec& p : positives) {
    if (p.size() != mean.size())
      throw DimensionMismatch("multiview_similarity: positive dimensions differ");
    for (size_t i = 0; i < mean.size(); ++i) mean[i] += p[i];
  }
  for (double& x : mean) x /= static_cast<double>(positives.size());
  sims.push_back(cosine_similarity(query, normalized(mean)));
  return sims;
}

PatientEmbedding concat_patient_representation(const std::vector<Vec>& per_view) {
  if (per_view.empty()) throw MixedDimensions("concat: no view embeddings");
  const size_t d = per_view.front().size();
  PatientEmbedding out;
  out.per_view = per_view;
  out.concatenated.reserve(per_view.size() * d);
  for (const Vec& v : per_view) {
    if (v.size() != d) throw MixedDimensions("concat: view embedding dimensions differ");
    out.concatenated.insert(out.concatenated.end(), v.begin(), v.end());
  }
  return out;
}

const char* to_string(PositiveScope s) {
  return s == PositiveScope::SamePatientViews ? "same_patient_views"
                                              : "same_patient_or_same_label";
}

const char* to_string(Aggregation a) {
  return a == Aggregation::PerPair ? "per_pair" : "mean_of_positives";
}

}  // namespace mmcon
