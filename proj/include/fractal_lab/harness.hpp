#pragma once

// Experiment registry, flat key=value configs, artifact emission and run
// manifests.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace fractal_lab {

inline constexpr const char* kToolVersion = "0.3.0";

enum class FieldKind { Int, UInt, Real, Bool, IntList, RealList, Choice };

struct ConfigField {
  std::string key;
  FieldKind kind = FieldKind::Real;
  std::string default_value;
  std::string help;
  double min = -1e300;  // inclusive bounds for numeric kinds (every list element)
  double max = 1e300;
  std::vector<std::string> choices;  // FieldKind::Choice
};

/// Raw key -> value text. Later assignments win.
using ConfigMap = std::map<std::string, std::string>;

/// Lines "key = value"; '#' starts a comment; blank lines ignored.
/// ConfigError names the offending line.
ConfigMap parse_config_text(const std::string& text);

/// Typed view of a validated config.
class Config {
 public:
  Config() = default;
  Config(std::vector<ConfigField> schema, ConfigMap values);

  long long integer(const std::string& key) const;
  std::uint64_t uinteger(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<long long> integers(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  /// Every schema key with its effective value, in schema order.
  std::vector<std::pair<std::string, std::string>> record() const;

 private:
  const ConfigField& field(const std::string& key, FieldKind kind) const;
  std::vector<ConfigField> schema_;
  ConfigMap values_;
};

/// Field-level messages, empty when `values` (merged over defaults) is valid.
/// Unknown keys are errors.
std::vector<std::string> validate_config(const std::vector<ConfigField>& schema, const ConfigMap& values);

/// Handed to an experiment body; collects artifacts, metrics and verdicts.
class RunContext {
 public:
  RunContext(std::filesystem::path out_dir, std::uint64_t master_seed);

  std::uint64_t master_seed() const noexcept { return seed_; }
  /// Writes `bytes` to out_dir/name. Names must be unique within a run.
  void artifact(const std::string& name, const std::string& bytes);
  void metric(const std::string& key, double value);
  void verdict(const std::string& predicate, bool pass);

  const std::vector<std::string>& artifacts() const noexcept { return artifacts_; }
  const std::map<std::string, double>& metrics() const noexcept { return metrics_; }
  const std::map<std::string, bool>& verdicts() const noexcept { return verdicts_; }
  const std::filesystem::path& out_dir() const noexcept { return out_; }

 private:
  std::filesystem::path out_;
  std::uint64_t seed_;
  std::vector<std::string> artifacts_;
  std::map<std::string, double> metrics_;
  std::map<std::string, bool> verdicts_;
};

struct Experiment {
  std::string name;
  std::string description;
  double budget_seconds = 600.0;
  std::vector<ConfigField> schema;
  std::vector<std::string> predicates;  // every one gets a verdict
  std::function<void(const Config&, RunContext&)> body;
};

/// Sorted by name.
const std::vector<Experiment>& experiment_registry();
/// UnknownExperiment when absent.
const Experiment& find_experiment(const std::string& name);

struct ListingEntry {
  std::string name;
  std::string description;
  std::vector<std::pair<std::string, std::string>> defaults;
};
std::vector<ListingEntry> list_experiments();

struct ExperimentResult {
  std::string name;
  std::map<std::string, double> metrics;
  std::map<std::string, bool> verdicts;
  std::vector<std::string> artifacts;  // relative to the output directory
  bool passed() const;
};

struct ManifestFile {
  std::string path;
  std::string sha256;
  std::uint64_t bytes = 0;
};

struct RunManifest {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::uint64_t master_seed = 0;
  std::string tool_version;
  std::string started;  // ISO 8601 UTC
  std::string finished;
  std::vector<ManifestFile> files;
};

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& bytes);

/// Validates the config (ConfigError listing every bad field), runs the body,
/// writes result.json and finally manifest.json, then re-reads every listed
/// file and checks its digest (IoError on mismatch).
ExperimentResult run_experiment(const std::string& name, const ConfigMap& overrides, std::uint64_t master_seed,
                                const std::filesystem::path& out_dir);

/// Reads manifest.json from `out_dir` and checks every digest.
bool verify_manifest(const std::filesystem::path& out_dir);

}  // namespace fractal_lab
