#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "csts/classifier.hpp"
#include "csts/eval.hpp"
#include "csts/synth.hpp"
#include "csts/viability.hpp"

namespace csts {

inline constexpr const char* kVersion = "0.3.0";

struct EnvConfig {
  EnvProfile profile;
  std::vector<InjectionSpec> injections;
};

struct ViabilityConfig {
  ViabilitySettings settings;
  ProducerProfile train;      // producer the threshold is fitted on
  ProducerProfile divergent;  // shifted producer scored against it
  ProducerProfile control_train;
  ProducerProfile control_test;  // same distribution as control_train
};

struct ExperimentConfig {
  std::uint64_t seed = 42;
  int duration_hours = 14 * 24;
  int window_minutes = 30;
  double train_fraction = 0.7;
  EnvConfig env_a;
  EnvConfig env_b;
  std::vector<std::string> levels{"P0", "P1", "P2", "P3"};
  std::vector<Task> tasks{Task::LM, Task::ZDT};
  ClassifierSpec classifier;
  EvalSettings eval;
  ViabilityConfig viability;
  std::string out_dir = "out";
  nlohmann::json source;  // the configuration as loaded, echoed into reports

  /// Seeds every generator from `seed` (per-stream offsets), so one number
  /// fixes the run.
  static ExperimentConfig from_json(const nlohmann::json& j);
  void override_seed(std::uint64_t s);
  std::string fingerprint() const;
  WindowId n_windows() const;
  WindowIndexer indexer() const;
};

ExperimentConfig load_config(const std::string& path);

/// {"config", "config_fingerprint", "version"} stamped into every report.
nlohmann::json provenance_stamp(const ExperimentConfig& c);

/// Output layout under out_dir.
struct Layout {
  std::string root;

  std::string raw(const std::string& env, const std::string& level = "P0") const;
  std::string labels(const std::string& env) const;
  /// raw/producer_<role>.csv, role being the viability config key.
  std::string producer(const std::string& role) const;
  std::string graph(const std::string& env, const std::string& level = "P0") const;
  std::string ingest_report(const std::string& env, const std::string& level = "P0") const;
  /// Stem for write_feature_matrix; the `.error.json` sibling marks a binding failure.
  std::string matrix(const std::string& pipeline, Task task, const std::string& env,
                     const std::string& level = "P0") const;
  std::string report(const std::string& name) const;
  std::string table(const std::string& name) const;
};

// Stages; each reads its prerequisites from disk and throws MissingArtifact
// naming the first absent one.
void stage_synth(const ExperimentConfig& c);
void stage_perturb(const ExperimentConfig& c);
void stage_ingest(const ExperimentConfig& c);
void stage_features(const ExperimentConfig& c);
/// Writes the transfer and robustness tables; returns every report row.
std::vector<EvalReport> stage_eval(const ExperimentConfig& c);
/// Orientation per task, keyed by task name; also written to tables/orientation.json.
nlohmann::json stage_diagnose(const ExperimentConfig& c);

struct ViabilityOutcome {
  ViabilityReport divergence;
  ViabilityReport control;
};
ViabilityOutcome stage_viability(const ExperimentConfig& c);

/// Every stage in order.
void run_repro(const ExperimentConfig& c);

/// Train/test viability over two producer files in the "prov" flavor.
ViabilityReport viability_from_files(const std::string& train_csv, const std::string& test_csv,
                                     const ViabilitySettings& s);

}  // namespace csts
