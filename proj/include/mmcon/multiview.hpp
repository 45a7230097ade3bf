#pragma once

#include <string>
#include <vector>

#include "mmcon/losses.hpp"

namespace mmcon {

// One patient: m per-view feature vectors plus a binary label.
struct MultiViewSample {
  std::string patient_id;
  std::vector<Vec> views;
  int label = 0;
};

// Who counts as a positive for an anchor.
enum class PositiveScope { SamePatientViews, SamePatientOrSameLabel };

// How multiview_similarity treats the positive set: one cosine per positive,
// or a single cosine against the normalized mean of the positives.
enum class Aggregation { PerPair, MeanOfPositives };

struct PairingPolicy {
  PositiveScope positive_scope = PositiveScope::SamePatientViews;
  Aggregation aggregation = Aggregation::PerPair;
  int query_view_index = 0;
};

// Builds the anchor/positive/negative structure for a batch of patients.
// embeddings[p][v] is the embedding of patient p's view v; batch embedding
// index p*m + v. One anchor per patient at its query view. Under
// SamePatientViews, P(i) is the patient's other m-1 views; under
// SamePatientOrSameLabel it additionally holds all views of same-label
// patients. A(i) is every view of the remaining patients. P(i) and A(i)
// together cover every non-anchor embedding exactly once.
//
// `anchor_embeddings`, when given, supplies separately-encoded query views
// (the two-encoder option); they are appended after the view table and each
// patient's anchor points at its appended entry instead of its view-table
// query entry. The aggregation field does not affect batch construction.
ContrastiveBatch build_contrastive_batch(const std::vector<MultiViewSample>& samples,
                                         const std::vector<std::vector<Vec>>& embeddings,
                                         const PairingPolicy& policy,
                                         const std::vector<Vec>* anchor_embeddings = nullptr);

std::vector<double> multiview_similarity(const Vec& query,
                                         const std::vector<Vec>& positives,
                                         const PairingPolicy& policy);

struct PatientEmbedding {
  std::vector<Vec> per_view;
  Vec concatenated;  // length m*d, in view order
};

PatientEmbedding concat_patient_representation(const std::vector<Vec>& per_view);

const char* to_string(PositiveScope s);
const char* to_string(Aggregation a);

}  // namespace mmcon
