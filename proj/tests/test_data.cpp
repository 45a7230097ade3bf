#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "mmcon/data.hpp"

using namespace mmcon;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mmcon_data_test_" + std::to_string(static_cast<unsigned>(::getpid())));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

bool datasets_equal(const Dataset& a, const Dataset& b) {
  if (a.samples.size() != b.samples.size()) return false;
  for (size_t i = 0; i < a.samples.size(); ++i) {
    if (a.samples[i].patient_id != b.samples[i].patient_id) return false;
    if (a.samples[i].label != b.samples[i].label) return false;
    if (a.samples[i].views != b.samples[i].views) return false;
  }
  return true;
}

size_t count_lines(const std::string& path) {
  std::ifstream in(path);
  size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("cohort-shaped generation: 502 patients, 4 views, 138 positives") {
  SyntheticConfig cfg;
  cfg.n_patients = 502;
  cfg.n_views = 4;
  cfg.feature_dim = 6;
  cfg.class_balance = 0.275;
  cfg.rng_seed = 3;
  const Dataset ds = generate_synthetic(cfg);
  CHECK(ds.samples.size() == 502);
  CHECK(ds.n_views() == 4);
  CHECK(ds.samples.size() * 4 == 2008);
  long positives = 0;
  for (const auto& s : ds.samples) positives += s.label;
  CHECK(positives == 138);
}

TEST_CASE("positives count equals round(balance*n) before label noise") {
  SyntheticConfig cfg;
  cfg.n_patients = 41;
  cfg.n_views = 2;
  cfg.feature_dim = 3;
  cfg.class_balance = 0.33;
  const Dataset ds = generate_synthetic(cfg);
  long positives = 0;
  for (const auto& s : ds.samples) positives += s.label;
  CHECK(positives == 14);  // round(0.33*41) = round(13.53)
}

TEST_CASE("generation is deterministic") {
  SyntheticConfig cfg;
  cfg.n_patients = 20;
  cfg.n_views = 3;
  cfg.feature_dim = 5;
  cfg.label_noise = 0.2;
  cfg.rng_seed = 77;
  CHECK(datasets_equal(generate_synthetic(cfg), generate_synthetic(cfg)));
}

TEST_CASE("zero separation still produces a valid dataset") {
  SyntheticConfig cfg;
  cfg.n_patients = 10;
  cfg.n_views = 2;
  cfg.feature_dim = 4;
  cfg.cluster_separation = 0.0;
  const Dataset ds = generate_synthetic(cfg);
  CHECK(ds.samples.size() == 10);
}

TEST_CASE("config validation") {
  SyntheticConfig cfg;
  cfg.class_balance = 1.0;
  CHECK_THROWS_AS(generate_synthetic(cfg), InvalidConfig);
  cfg = SyntheticConfig{};
  cfg.label_noise = 0.5;
  CHECK_THROWS_AS(generate_synthetic(cfg), InvalidConfig);
  cfg = SyntheticConfig{};
  cfg.n_patients = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg), InvalidConfig);
}

TEST_CASE("file round trip is exact") {
  TempDir tmp;
  SyntheticConfig cfg;
  cfg.n_patients = 12;
  cfg.n_views = 3;
  cfg.feature_dim = 5;
  cfg.rng_seed = 9;
  const Dataset ds = generate_synthetic(cfg);
  write_dataset(ds, tmp.file("ds.csv"));
  const Dataset back = read_dataset(tmp.file("ds.csv"));
  CHECK(datasets_equal(ds, back));
  CHECK(back.provenance == Provenance::File);
  CHECK(count_lines(tmp.file("ds.csv")) == 12 * 3 + 1);
}

TEST_CASE("round trip preserves extreme values bit-exactly") {
  Dataset ds;
  MultiViewSample a;
  a.patient_id = "X1";
  a.label = 1;
  a.views = {{1e-300, -5.5511151231257827e-17}, {1.7976931348623157e308, 0.1}};
  MultiViewSample b;
  b.patient_id = "X2";
  b.label = 0;
  b.views = {{3.0, -0.0}, {0.30000000000000004, 2.2250738585072014e-308}};
  ds.samples = {a, b};

  TempDir tmp;
  write_dataset(ds, tmp.file("extreme.csv"));
  const Dataset back = read_dataset(tmp.file("extreme.csv"));
  CHECK(datasets_equal(ds, back));
}

TEST_CASE("malformed files are rejected with the right error") {
  TempDir tmp;

  SUBCASE("bad header") {
    std::ofstream(tmp.file("bad.csv")) << "id,view,label,f0\nP1,0,0,1.5\n";
    CHECK_THROWS_AS(read_dataset(tmp.file("bad.csv")), MalformedHeader);
  }
  SUBCASE("wrong feature count") {
    std::ofstream(tmp.file("bad.csv"))
        << "patient_id,view_id,label,f0,f1\nP1,0,0,1.5\nP2,0,1,1.0,2.0\n";
    CHECK_THROWS_AS(read_dataset(tmp.file("bad.csv")), InconsistentRow);
  }
  SUBCASE("repeated patient/view pair") {
    std::ofstream(tmp.file("bad.csv"))
        << "patient_id,view_id,label,f0\nP1,0,0,1.5\nP1,0,0,2.5\n";
    CHECK_THROWS_AS(read_dataset(tmp.file("bad.csv")), DuplicatePatient);
  }
  SUBCASE("conflicting labels across views") {
    std::ofstream(tmp.file("bad.csv"))
        << "patient_id,view_id,label,f0\nP1,0,0,1.5\nP1,1,1,2.5\n";
    CHECK_THROWS_AS(read_dataset(tmp.file("bad.csv")), InconsistentRow);
  }
  SUBCASE("missing view") {
    std::ofstream(tmp.file("bad.csv"))
        << "patient_id,view_id,label,f0\nP1,0,0,1.5\nP1,1,0,2.5\nP2,0,1,0.5\n";
    CHECK_THROWS_AS(read_dataset(tmp.file("bad.csv")), InconsistentRow);
  }
  SUBCASE("empty file") {
    std::ofstream(tmp.file("bad.csv"));
    CHECK_THROWS_AS(read_dataset(tmp.file("bad.csv")), MalformedHeader);
  }
}

TEST_CASE("k-fold split: 502 patients into 10 folds of {51,51,50x8}") {
  SyntheticConfig cfg;
  cfg.n_patients = 502;
  cfg.n_views = 2;
  cfg.feature_dim = 2;
  const Dataset ds = generate_synthetic(cfg);
  const FoldAssignment fa = kfold_split(ds, 10, 17);
  std::vector<int> sizes(10, 0);
  for (int f : fa.fold_by_patient) {
    REQUIRE(f >= 0);
    REQUIRE(f < 10);
    ++sizes[static_cast<size_t>(f)];
  }
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<int>{50, 50, 50, 50, 50, 50, 50, 50, 51, 51});
}

TEST_CASE("k-fold properties") {
  SyntheticConfig cfg;
  cfg.n_patients = 23;
  cfg.n_views = 2;
  cfg.feature_dim = 2;
  const Dataset ds = generate_synthetic(cfg);

  SUBCASE("same seed gives the same assignment") {
    const FoldAssignment a = kfold_split(ds, 5, 11);
    const FoldAssignment b = kfold_split(ds, 5, 11);
    CHECK(a.fold_by_patient == b.fold_by_patient);
  }
  SUBCASE("leave-one-patient-out") {
    const FoldAssignment a = kfold_split(ds, 23, 11);
    std::vector<int> seen(23, 0);
    for (int f : a.fold_by_patient) ++seen[static_cast<size_t>(f)];
    for (int c : seen) CHECK(c == 1);
  }
  SUBCASE("size spread is at most one") {
    const FoldAssignment a = kfold_split(ds, 4, 2);
    std::vector<int> sizes(4, 0);
    for (int f : a.fold_by_patient) ++sizes[static_cast<size_t>(f)];
    CHECK(*std::max_element(sizes.begin(), sizes.end()) -
              *std::min_element(sizes.begin(), sizes.end()) <=
          1);
  }
  SUBCASE("too many folds") {
    CHECK_THROWS_AS(kfold_split(ds, 24, 0), TooManyFolds);
  }
  SUBCASE("stratified folds balance labels too") {
    const FoldAssignment a = kfold_split(ds, 4, 2, /*stratified=*/true);
    std::vector<int> pos(4, 0), tot(4, 0);
    for (size_t i = 0; i < ds.samples.size(); ++i) {
      ++tot[static_cast<size_t>(a.fold_by_patient[i])];
      pos[static_cast<size_t>(a.fold_by_patient[i])] += ds.samples[i].label;
    }
    CHECK(*std::max_element(tot.begin(), tot.end()) -
              *std::min_element(tot.begin(), tot.end()) <=
          1);
    CHECK(*std::max_element(pos.begin(), pos.end()) -
              *std::min_element(pos.begin(), pos.end()) <=
          1);
  }
}

TEST_CASE("fold assignment export") {
  TempDir tmp;
  SyntheticConfig cfg;
  cfg.n_patients = 6;
  cfg.n_views = 2;
  cfg.feature_dim = 2;
  const Dataset ds = generate_synthetic(cfg);
  const FoldAssignment fa = kfold_split(ds, 3, 5);
  write_fold_assignment(ds, fa, tmp.file("folds.csv"));
  std::ifstream in(tmp.file("folds.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "patient_id,fold");
  size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);
}

}  // TEST_SUITE
