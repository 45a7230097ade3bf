#pragma once

#include <map>
#include <string>

#include "mmcon/data.hpp"
#include "mmcon/experiment.hpp"

namespace mmcon {

// Flat dotted-key configuration ("loss.temperature=0.07"), one key per line,
// '#' comments. Later assignments win.
struct KeyValueConfig {
  std::map<std::string, std::string> values;

  static KeyValueConfig from_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
};

// "a.b=c" override strings from the command line.
void apply_override(KeyValueConfig& cfg, const std::string& key_eq_value);

// Rejects keys outside the documented set.
void validate_known_keys(const KeyValueConfig& cfg);

SyntheticConfig synthetic_config_from(const KeyValueConfig& cfg);
TrainConfig train_config_from(const KeyValueConfig& cfg);

// Sorted key=value lines; echoed next to every output artifact.
std::string effective_config_string(const KeyValueConfig& cfg);

LossKind loss_kind_from_string(const std::string& s);
DenominatorMode denominator_mode_from_string(const std::string& s);
MarginMode margin_mode_from_string(const std::string& s);
PositiveScope positive_scope_from_string(const std::string& s);
Aggregation aggregation_from_string(const std::string& s);
ClassifierKind classifier_from_string(const std::string& s);

}  // namespace mmcon
