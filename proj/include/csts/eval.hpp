#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "csts/classifier.hpp"
#include "csts/features.hpp"

namespace csts {

struct EvalReport {
  std::string task;
  std::string setting;  // "EnvA->EnvA" | "EnvA->EnvB"
  std::string method;   // baseline | csts
  std::string level = "P0";
  std::string status = "ok";  // ok | schema_failure | degenerate
  std::string detail;
  double f1_at_05 = 0, precision = 0, recall = 0, auroc = 0;
  double best_f1 = 0, best_threshold = 0;
  int train_pos = 0, train_neg = 0, test_pos = 0, test_neg = 0;
  std::array<double, 2> auroc_ci{0, 0};
  std::array<double, 2> f1_ci{0, 0};
  bool ci_degenerate = false;

  nlohmann::json to_json() const;
};

struct EvalSettings {
  int bootstrap_b = 1000;
  std::uint64_t bootstrap_seed = 42;
};

/// Metrics of `scores` against `labels`; CIs are marked degenerate when the
/// test split has fewer than two positives.
EvalReport score_report(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels,
                        const EvalSettings& settings);

/// Zero-metric row standing in for a pipeline that could not bind its input.
EvalReport schema_failure_report(const std::string& task, const std::string& setting,
                                 const std::string& method, const std::string& level,
                                 const std::string& detail);

/// Trains on `train`, scores `test`, fills class counts and identifiers.
EvalReport evaluate(const FeatureMatrix& train, const FeatureMatrix& test,
                    const ClassifierSpec& spec, const EvalSettings& settings,
                    const std::string& setting, const std::string& level = "P0");

std::string reports_csv(const std::vector<EvalReport>& reports);
nlohmann::json reports_json(const std::vector<EvalReport>& reports);

struct FeatureOrientation {
  std::string name;
  double delta_a = 0;
  double delta_b = 0;
  bool sign_agree = true;
};

struct OrientationReport {
  std::vector<FeatureOrientation> features;
  double auroc = 0;
  double auroc_inverted = 0;
  bool polarity_inverted = false;
  double dead_band = 1e-9;

  int disagreements() const;
  nlohmann::json to_json() const;
};

/// Sign with |x| < dead_band mapped to 0.
int dead_band_sign(double x, double dead_band);

/// Class-conditional mean differences per feature, both environments
/// standardized with `env_a`'s statistics; score-level polarity from
/// `scores_b` against env_b labels. Throws DegenerateClass.
OrientationReport orientation_diagnostic(const FeatureMatrix& env_a, const FeatureMatrix& env_b,
                                         const Eigen::VectorXd& scores_b,
                                         double dead_band = 1e-9);

}  // namespace csts
