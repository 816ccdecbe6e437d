#pragma once

#include <optional>
#include <string>
#include <vector>

#include "enlab/common.hpp"

namespace enlab {

// A field in the experiment file is missing, malformed, or out of range. The
// message names the offending field.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nested key = value blocks:
//   key = value            (value runs to end of line, '#' starts a comment)
//   name { ... }           (anonymous block of kind `name`)
//   scenario <name> { ... }
struct Section {
  std::string type;
  std::string name;  // scenarios only
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<Section> children;
  int line = 0;

  bool has(const std::string& key) const;
  const Section* child(const std::string& type) const;
  std::vector<const Section*> children_of(const std::string& type) const;

  // Lookups throw config_error naming `context.key` when required.
  std::string get_string(const std::string& key, const std::string& context) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, const std::string& context) const;
  double get_double_or(const std::string& key, double fallback,
                       const std::string& context) const;
  long get_int(const std::string& key, const std::string& context) const;
  long get_int_or(const std::string& key, long fallback, const std::string& context) const;
  std::vector<double> get_doubles(const std::string& key, const std::string& context) const;
  std::vector<std::string> get_strings(const std::string& key, const std::string& context) const;
  std::vector<std::vector<double>> get_double_rows(const std::string& key) const;
};

Section parse_config_text(const std::string& text);
Section parse_config_file(const std::string& path);

enum class CheckKind {
  EnergyBalance,
  Corollary,
  HomoExpConv,
  Generalization,
  Convergence,
  StabilityCertificate,
};

const char* to_string(CheckKind k);
CheckKind check_from_string(const std::string& s, const std::string& context);
bool check_needs_trajectory(CheckKind k);

struct ScenarioConfig {
  std::string name;
  std::vector<CheckKind> checks;
  std::uint64_t seed = 0;
  Section body;  // signal / potential / dissipation / initial / integrator / ...
};

struct ExperimentConfig {
  std::string output_dir;
  std::uint64_t seed = 0;
  std::string base_dir;  // directory of the config file, for relative paths
  std::vector<ScenarioConfig> scenarios;
};

// Parses and structurally validates (unique names, recognized checks,
// positive integrator steps, required blocks present).
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from_text(const std::string& text,
                                             const std::string& base_dir = ".");

}  // namespace enlab
