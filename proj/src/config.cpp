#include "mmcon/config.hpp"

#include <array>
#include <fstream>

#include "mmcon/textio.hpp"

namespace mmcon {

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config file not found: " + path);
  KeyValueConfig cfg;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig(path + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw InvalidConfig(path + ":" + std::to_string(line_no) + ": empty key");
    cfg.values[key] = trim(t.substr(eq + 1));
  }
  return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const { return values.count(key) > 0; }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : parse_int(it->second, key);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : parse_double(it->second, key);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : parse_bool(it->second, key);
}

std::uint64_t KeyValueConfig::get_seed(const std::string& key, std::uint64_t fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  return static_cast<std::uint64_t>(parse_int(it->second, key));
}

void apply_override(KeyValueConfig& cfg, const std::string& key_eq_value) {
  const size_t eq = key_eq_value.find('=');
  if (eq == std::string::npos || eq == 0)
    throw InvalidConfig("override must look like key=value, got '" + key_eq_value + "'");
  cfg.set(trim(key_eq_value.substr(0, eq)), trim(key_eq_value.substr(eq + 1)));
}

namespace {

constexpr std::array<const char*, 34> kKnownKeys = {
    "data.path",
    "data.n_patients",
    "data.n_views",
    "data.feature_dim",
    "data.class_balance",
    "data.cluster_separation",
    "data.per_view_rotation_seed",
    "data.noise_sigma",
    "data.label_noise",
    "data.rng_seed",
    "loss.temperature",
    "loss.scalar_margin",
    "loss.angular_margin",
    "loss.denominator_mode",
    "loss.margin_mode",
    "loss.mean_over_anchors",
    "train.loss_kind",
    "train.epochs",
    "train.batch_size",
    "train.learning_rate",
    "train.k_folds",
    "train.rng_seed",
    "train.classifier",
    "train.stratified_folds",
    "policy.positive_scope",
    "policy.aggregation",
    "policy.query_view_index",
    "encoder.hidden_dims",
    "encoder.embed_dim",
    "encoder.activation",
    "encoder.normalize_output",
    "encoder.shared",
    "eval.checkpoint",
    "eval.test_path",
};

}  // namespace

void validate_known_keys(const KeyValueConfig& cfg) {
  for (const auto& [key, value] : cfg.values) {
    (void)value;
    bool known = false;
    for (const char* k : kKnownKeys)
      if (key == k) {
        known = true;
        break;
      }
    if (!known) throw InvalidConfig("unknown config key '" + key + "'");
  }
}

SyntheticConfig synthetic_config_from(const KeyValueConfig& cfg) {
  SyntheticConfig sc;
  sc.n_patients = static_cast<int>(cfg.get_int("data.n_patients", sc.n_patients));
  sc.n_views = static_cast<int>(cfg.get_int("data.n_views", sc.n_views));
  sc.feature_dim = static_cast<int>(cfg.get_int("data.feature_dim", sc.feature_dim));
  sc.class_balance = cfg.get_double("data.class_balance", sc.class_balance);
  sc.cluster_separation = cfg.get_double("data.cluster_separation", sc.cluster_separation);
  sc.per_view_rotation_seed =
      cfg.get_seed("data.per_view_rotation_seed", sc.per_view_rotation_seed);
  sc.noise_sigma = cfg.get_double("data.noise_sigma", sc.noise_sigma);
  sc.label_noise = cfg.get_double("data.label_noise", sc.label_noise);
  sc.rng_seed = cfg.get_seed("data.rng_seed", sc.rng_seed);
  sc.validate();
  return sc;
}

namespace {

std::vector<int> parse_hidden_dims(const std::string& s) {
  std::vector<int> dims;
  const std::string t = trim(s);
  if (t.empty()) return dims;
  for (const std::string& part : split(t, ','))
    dims.push_back(static_cast<int>(parse_int(part, "encoder.hidden_dims")));
  return dims;
}

}  // namespace

TrainConfig train_config_from(const KeyValueConfig& cfg) {
  TrainConfig tc;
  tc.loss_kind = loss_kind_from_string(cfg.get_string("train.loss_kind", "mmcon"));
  tc.loss.temperature = cfg.get_double("loss.temperature", tc.loss.temperature);
  tc.loss.scalar_margin = cfg.get_double("loss.scalar_margin", tc.loss.scalar_margin);
  tc.loss.angular_margin = cfg.get_double("loss.angular_margin", tc.loss.angular_margin);
  tc.loss.denominator_mode = denominator_mode_from_string(
      cfg.get_string("loss.denominator_mode", to_string(tc.loss.denominator_mode)));
  tc.loss.margin_mode =
      margin_mode_from_string(cfg.get_string("loss.margin_mode", to_string(tc.loss.margin_mode)));
  tc.loss.mean_over_anchors = cfg.get_bool("loss.mean_over_anchors", tc.loss.mean_over_anchors);

  tc.epochs = static_cast<int>(cfg.get_int("train.epochs", tc.epochs));
  tc.batch_size = static_cast<int>(cfg.get_int("train.batch_size", tc.batch_size));
  tc.learning_rate = cfg.get_double("train.learning_rate", tc.learning_rate);
  tc.k_folds = static_cast<int>(cfg.get_int("train.k_folds", tc.k_folds));
  tc.rng_seed = cfg.get_seed("train.rng_seed", tc.rng_seed);
  tc.classifier =
      classifier_from_string(cfg.get_string("train.classifier", to_string(tc.classifier)));
  tc.stratified_folds = cfg.get_bool("train.stratified_folds", tc.stratified_folds);

  tc.policy.positive_scope = positive_scope_from_string(
      cfg.get_string("policy.positive_scope", to_string(tc.policy.positive_scope)));
  tc.policy.aggregation = aggregation_from_string(
      cfg.get_string("policy.aggregation", to_string(tc.policy.aggregation)));
  tc.policy.query_view_index =
      static_cast<int>(cfg.get_int("policy.query_view_index", tc.policy.query_view_index));

  if (cfg.has("encoder.hidden_dims"))
    tc.encoder.hidden_dims = parse_hidden_dims(cfg.get_string("encoder.hidden_dims", ""));
  tc.encoder.embed_dim = static_cast<int>(cfg.get_int("encoder.embed_dim", tc.encoder.embed_dim));
  tc.encoder.activation =
      activation_from_string(cfg.get_string("encoder.activation", to_string(tc.encoder.activation)));
  tc.encoder.normalize_output =
      cfg.get_bool("encoder.normalize_output", tc.encoder.normalize_output);
  tc.encoder.shared = cfg.get_bool("encoder.shared", tc.encoder.shared);

  tc.validate();
  return tc;
}

std::string effective_config_string(const KeyValueConfig& cfg) {
  std::string out;
  for (const auto& [key, value] : cfg.values) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

LossKind loss_kind_from_string(const std::string& s) {
  const std::string t = normalize_token(s);
  if (t == "supcon") return LossKind::SupCon;
  if (t == "margincon" || t == "margin_con") return LossKind::MarginCon;
  if (t == "mmcon") return LossKind::MMCon;
  throw InvalidConfig("unknown loss kind '" + s + "' (expected supcon|margincon|mmcon)");
}

DenominatorMode denominator_mode_from_string(const std::string& s) {
  const std::string t = normalize_token(s);
  if (t == "negatives_only" || t == "negatives") return DenominatorMode::NegativesOnly;
  if (t == "all_non_anchor" || t == "all") return DenominatorMode::AllNonAnchor;
  throw InvalidConfig("unknown denominator mode '" + s + "' (expected negatives-only|all)");
}

MarginMode margin_mode_from_string(const std::string& s) {
  const std::string t = normalize_token(s);
  if (t == "literal") return MarginMode::Literal;
  if (t == "positive_only") return MarginMode::PositiveOnly;
  throw InvalidConfig("unknown margin mode '" + s + "' (expected literal|positive-only)");
}

PositiveScope positive_scope_from_string(const std::string& s) {
  const std::string t = normalize_token(s);
  if (t == "same_patient_views") return PositiveScope::SamePatientViews;
  if (t == "same_patient_or_same_label") return PositiveScope::SamePatientOrSameLabel;
  throw InvalidConfig("unknown positive scope '" + s + "'");
}

Aggregation aggregation_from_string(const std::string& s) {
  const std::string t = normalize_token(s);
  if (t == "per_pair") return Aggregation::PerPair;
  if (t == "mean_of_positives") return Aggregation::MeanOfPositives;
  throw InvalidConfig("unknown aggregation '" + s + "'");
}

ClassifierKind classifier_from_string(const std::string& s) {
  const std::string t = normalize_token(s);
  if (t == "nearest_centroid") return ClassifierKind::NearestCentroid;
  if (t == "linear_probe") return ClassifierKind::LinearProbe;
  throw InvalidConfig("unknown classifier '" + s + "' (expected nearest-centroid|linear-probe)");
}

}  // namespace mmcon
