#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmcon/multiview.hpp"

namespace mmcon {

// Synthetic multi-view stand-in for a two-class clinical cohort. Two class
// centroids sit cluster_separation apart; each patient draws a latent point
// around its class centroid (unit Gaussian), and each view applies a fixed
// seeded orthogonal transform plus Gaussian observation noise.
struct SyntheticConfig {
  int n_patients = 200;
  int n_views = 4;
  int feature_dim = 16;
  double class_balance = 0.275;  // positive fraction, 138/502 shape
  double cluster_separation = 6.0;
  std::uint64_t per_view_rotation_seed = 7;
  double noise_sigma = 0.5;
  double label_noise = 0.0;  // per-patient flip probability, in [0, 0.5)
  std::uint64_t rng_seed = 0;

  void validate() const;
};

enum class Provenance { Synthetic, File };

struct Dataset {
  std::vector<MultiViewSample> samples;
  Provenance provenance = Provenance::Synthetic;
  int schema_version = 1;

  int n_views() const;
  int feature_dim() const;
};

Dataset generate_synthetic(const SyntheticConfig& cfg);

// Plain-text dataset format: UTF-8, header `patient_id,view_id,label,f0,...`,
// one row per (patient, view), features serialized with %.17g so a round
// trip is bit-exact.
void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

struct FoldAssignment {
  int k = 0;
  std::vector<int> fold_by_patient;  // aligned with Dataset::samples
};

// Seeded shuffle of patients, round-robin fold assignment; all views of a
// patient share its fold. The stratified flag balances labels per fold.
FoldAssignment kfold_split(const Dataset& ds, int k, std::uint64_t seed,
                           bool stratified = false);

// Two-column text export: header `patient_id,fold`, one row per patient.
void write_fold_assignment(const Dataset& ds, const FoldAssignment& folds,
                           const std::string& path);

}  // namespace mmcon
