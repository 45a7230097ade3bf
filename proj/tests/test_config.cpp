#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mmcon/config.hpp"

using namespace mmcon;
namespace fs = std::filesystem;

namespace {

std::string write_temp_config(const std::string& body) {
  const fs::path p = fs::temp_directory_path() /
                     ("mmcon_cfg_" + std::to_string(static_cast<unsigned>(::getpid())) + ".cfg");
  std::ofstream(p) << body;
  return p.string();
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("parsing key=value files") {
  const std::string path = write_temp_config(
      "# comment\n"
      "loss.temperature = 0.05\n"
      "\n"
      "train.epochs=12\n"
      "   train.batch_size =  7 \n");
  const KeyValueConfig kv = KeyValueConfig::from_file(path);
  CHECK(kv.get_double("loss.temperature", 0.0) == 0.05);
  CHECK(kv.get_int("train.epochs", 0) == 12);
  CHECK(kv.get_int("train.batch_size", 0) == 7);
  CHECK(kv.get_int("train.k_folds", 10) == 10);
  fs::remove(path);
}

TEST_CASE("missing files and malformed lines") {
  CHECK_THROWS_AS(KeyValueConfig::from_file("/definitely/not/there.cfg"), IoError);
  const std::string path = write_temp_config("not a key value line\n");
  CHECK_THROWS_AS(KeyValueConfig::from_file(path), InvalidConfig);
  fs::remove(path);
}

TEST_CASE("overrides replace file values") {
  KeyValueConfig kv;
  kv.set("loss.temperature", "0.07");
  apply_override(kv, "loss.temperature=0.2");
  CHECK(kv.get_double("loss.temperature", 0.0) == 0.2);
  CHECK_THROWS_AS(apply_override(kv, "no-equals-sign"), InvalidConfig);
}

TEST_CASE("unknown keys are rejected") {
  KeyValueConfig kv;
  kv.set("loss.temprature", "0.07");  // typo
  CHECK_THROWS_AS(validate_known_keys(kv), InvalidConfig);
  kv = KeyValueConfig{};
  kv.set("loss.temperature", "0.07");
  CHECK_NOTHROW(validate_known_keys(kv));
}

TEST_CASE("typed getter errors") {
  KeyValueConfig kv;
  kv.set("train.epochs", "banana");
  CHECK_THROWS_AS(kv.get_int("train.epochs", 1), InvalidConfig);
  kv.set("encoder.shared", "maybe");
  CHECK_THROWS_AS(kv.get_bool("encoder.shared", true), InvalidConfig);
}

TEST_CASE("enum spellings accept hyphens and underscores") {
  CHECK(loss_kind_from_string("mmcon") == LossKind::MMCon);
  CHECK(loss_kind_from_string("margincon") == LossKind::MarginCon);
  CHECK(loss_kind_from_string("margin-con") == LossKind::MarginCon);
  CHECK(denominator_mode_from_string("negatives-only") == DenominatorMode::NegativesOnly);
  CHECK(denominator_mode_from_string("all") == DenominatorMode::AllNonAnchor);
  CHECK(margin_mode_from_string("positive-only") == MarginMode::PositiveOnly);
  CHECK(positive_scope_from_string("same_patient_or_same_label") ==
        PositiveScope::SamePatientOrSameLabel);
  CHECK(aggregation_from_string("mean-of-positives") == Aggregation::MeanOfPositives);
  CHECK(classifier_from_string("linear-probe") == ClassifierKind::LinearProbe);
  CHECK_THROWS_AS(loss_kind_from_string("nce"), InvalidConfig);
}

TEST_CASE("train config defaults match the protocol") {
  const TrainConfig tc = train_config_from(KeyValueConfig{});
  CHECK(tc.loss_kind == LossKind::MMCon);
  CHECK(tc.loss.temperature == 0.07);
  CHECK(tc.loss.scalar_margin == 0.2);
  CHECK(tc.epochs == 300);
  CHECK(tc.batch_size == 50);
  CHECK(tc.learning_rate == 0.001);
  CHECK(tc.k_folds == 10);
  CHECK(tc.loss.denominator_mode == DenominatorMode::NegativesOnly);
  CHECK(tc.policy.query_view_index == 0);
}

TEST_CASE("train config from keys") {
  KeyValueConfig kv;
  kv.set("train.loss_kind", "supcon");
  kv.set("encoder.hidden_dims", "24,12");
  kv.set("encoder.activation", "relu");
  kv.set("policy.positive_scope", "same-patient-or-same-label");
  kv.set("train.classifier", "linear_probe");
  const TrainConfig tc = train_config_from(kv);
  CHECK(tc.loss_kind == LossKind::SupCon);
  CHECK(tc.encoder.hidden_dims == std::vector<int>{24, 12});
  CHECK(tc.encoder.activation == Activation::Relu);
  CHECK(tc.policy.positive_scope == PositiveScope::SamePatientOrSameLabel);
  CHECK(tc.classifier == ClassifierKind::LinearProbe);

  kv.set("encoder.hidden_dims", "");
  CHECK(train_config_from(kv).encoder.hidden_dims.empty());
}

TEST_CASE("synthetic config from keys validates ranges") {
  KeyValueConfig kv;
  kv.set("data.class_balance", "1.5");
  CHECK_THROWS_AS(synthetic_config_from(kv), InvalidConfig);
  kv.set("data.class_balance", "0.3");
  kv.set("data.n_patients", "50");
  const SyntheticConfig sc = synthetic_config_from(kv);
  CHECK(sc.n_patients == 50);
  CHECK(sc.class_balance == 0.3);
}

TEST_CASE("effective config echo is sorted and exact") {
  KeyValueConfig kv;
  kv.set("train.epochs", "5");
  kv.set("data.n_patients", "10");
  CHECK(effective_config_string(kv) == "data.n_patients=10\ntrain.epochs=5\n");
}

}  // TEST_SUITE
