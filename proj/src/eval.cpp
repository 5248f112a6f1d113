#include "csts/eval.hpp"

#include <fmt/format.h>

#include "csts/error.hpp"
#include "csts/metrics.hpp"

namespace csts {

using nlohmann::json;

json EvalReport::to_json() const {
  return json{{"task", task},
              {"setting", setting},
              {"method", method},
              {"level", level},
              {"status", status},
              {"detail", detail},
              {"f1_at_05", f1_at_05},
              {"precision", precision},
              {"recall", recall},
              {"auroc", auroc},
              {"best_f1", best_f1},
              {"best_threshold", best_threshold},
              {"train_pos", train_pos},
              {"train_neg", train_neg},
              {"test_pos", test_pos},
              {"test_neg", test_neg},
              {"auroc_ci", auroc_ci},
              {"f1_ci", f1_ci},
              {"ci_degenerate", ci_degenerate}};
}

EvalReport score_report(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels,
                        const EvalSettings& settings) {
  EvalReport r;
  const Confusion c = confusion_at(scores, labels, 0.5);
  r.f1_at_05 = c.f1();
  r.precision = c.precision();
  r.recall = c.recall();
  bool degenerate = false;
  r.auroc = auroc(scores, labels, &degenerate);
  const auto sweep = best_f1_sweep(scores, labels);
  r.best_f1 = sweep.best_f1;
  r.best_threshold = sweep.best_threshold;
  r.test_pos = static_cast<int>((labels.array() > 0.5).count());
  r.test_neg = static_cast<int>(labels.size()) - r.test_pos;
  if (degenerate) r.status = "degenerate";
  if (r.test_pos < 2 || r.test_neg < 1) {
    r.ci_degenerate = true;
    return r;
  }
  auto a = bootstrap_ci(scores, labels, BootstrapMetric::Auroc, settings.bootstrap_b,
                        settings.bootstrap_seed);
  auto f = bootstrap_ci(scores, labels, BootstrapMetric::F1At05, settings.bootstrap_b,
                        settings.bootstrap_seed);
  r.auroc_ci = {a.lo, a.hi};
  r.f1_ci = {f.lo, f.hi};
  r.ci_degenerate = a.degenerate || f.degenerate;
  return r;
}

EvalReport schema_failure_report(const std::string& task, const std::string& setting,
                                 const std::string& method, const std::string& level,
                                 const std::string& detail) {
  EvalReport r;
  r.task = task;
  r.setting = setting;
  r.method = method;
  r.level = level;
  r.status = "schema_failure";
  r.detail = detail;
  r.ci_degenerate = true;
  return r;
}

EvalReport evaluate(const FeatureMatrix& train, const FeatureMatrix& test,
                    const ClassifierSpec& spec, const EvalSettings& settings,
                    const std::string& setting, const std::string& level) {
  if (train.feature_names != test.feature_names) {
    throw Error(ErrorCode::InvalidSpec, "train and test feature names differ");
  }
  const Eigen::VectorXd ytrain = train.y();
  const auto model = train_logistic(train.X(), ytrain, spec);
  EvalReport r = score_report(model.predict_proba(test.X()), test.y(), settings);
  r.task = test.task;
  r.setting = setting;
  r.method = test.pipeline;
  r.level = level;
  r.train_pos = static_cast<int>((ytrain.array() > 0.5).count());
  r.train_neg = static_cast<int>(ytrain.size()) - r.train_pos;
  return r;
}

std::string reports_csv(const std::vector<EvalReport>& reports) {
  std::string out =
      "task,setting,method,level,status,f1_at_05,precision,recall,auroc,best_f1,best_threshold,"
      "train_pos,train_neg,test_pos,test_neg,auroc_ci_lo,auroc_ci_hi,f1_ci_lo,f1_ci_hi\n";
  for (const auto& r : reports) {
    out += fmt::format(
        "{},{},{},{},{},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f},{:.2f},{},{},{},{},{:.4f},{:.4f},{:.4f},"
        "{:.4f}\n",
        r.task, r.setting, r.method, r.level, r.status, r.f1_at_05, r.precision, r.recall,
        r.auroc, r.best_f1, r.best_threshold, r.train_pos, r.train_neg, r.test_pos, r.test_neg,
        r.auroc_ci[0], r.auroc_ci[1], r.f1_ci[0], r.f1_ci[1]);
  }
  return out;
}

json reports_json(const std::vector<EvalReport>& reports) {
  json out = json::array();
  for (const auto& r : reports) out.push_back(r.to_json());
  return out;
}

int OrientationReport::disagreements() const {
  int n = 0;
  for (const auto& f : features) n += f.sign_agree ? 0 : 1;
  return n;
}

json OrientationReport::to_json() const {
  json feats = json::array();
  for (const auto& f : features) {
    feats.push_back({{"feature", f.name},
                     {"delta_a", f.delta_a},
                     {"delta_b", f.delta_b},
                     {"sign_agree", f.sign_agree}});
  }
  return json{{"features", feats},
              {"sign_disagreements", disagreements()},
              {"auroc", auroc},
              {"auroc_inverted", auroc_inverted},
              {"polarity_inverted", polarity_inverted},
              {"dead_band", dead_band}};
}

int dead_band_sign(double x, double dead_band) {
  if (std::abs(x) < dead_band) return 0;
  return x > 0 ? 1 : -1;
}

namespace {

Eigen::VectorXd class_mean_difference(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                      const std::string& env) {
  const Eigen::Index pos = (y.array() > 0.5).count();
  if (pos == 0 || pos == y.size()) {
    throw Error(ErrorCode::DegenerateClass, env + " lacks one of the classes");
  }
  Eigen::VectorXd sum_pos = Eigen::VectorXd::Zero(Z.cols());
  Eigen::VectorXd sum_neg = Eigen::VectorXd::Zero(Z.cols());
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    (y(i) > 0.5 ? sum_pos : sum_neg) += Z.row(i).transpose();
  }
  return sum_pos / static_cast<double>(pos) -
         sum_neg / static_cast<double>(y.size() - pos);
}

}  // namespace

OrientationReport orientation_diagnostic(const FeatureMatrix& env_a, const FeatureMatrix& env_b,
                                         const Eigen::VectorXd& scores_b, double dead_band) {
  if (env_a.feature_names != env_b.feature_names) {
    throw Error(ErrorCode::InvalidSpec, "orientation needs identical feature names");
  }
  const Eigen::MatrixXd Xa = env_a.X();
  const Eigen::MatrixXd Xb = env_b.X();
  auto [mean, scale] = standardization(Xa);
  auto standardize = [&](const Eigen::MatrixXd& X) -> Eigen::MatrixXd {
    return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
  };
  const Eigen::VectorXd ya = env_a.y(), yb = env_b.y();
  const Eigen::VectorXd da = class_mean_difference(standardize(Xa), ya, env_a.env);
  const Eigen::VectorXd db = class_mean_difference(standardize(Xb), yb, env_b.env);

  OrientationReport r;
  r.dead_band = dead_band;
  for (std::size_t j = 0; j < env_a.feature_names.size(); ++j) {
    FeatureOrientation f;
    f.name = env_a.feature_names[j];
    f.delta_a = da(static_cast<Eigen::Index>(j));
    f.delta_b = db(static_cast<Eigen::Index>(j));
    const int sa = dead_band_sign(f.delta_a, dead_band), sb = dead_band_sign(f.delta_b, dead_band);
    f.sign_agree = sa == 0 || sb == 0 || sa == sb;
    r.features.push_back(f);
  }
  r.auroc = auroc(scores_b, yb);
  r.auroc_inverted = auroc(Eigen::VectorXd(-scores_b), yb);
  r.polarity_inverted = r.auroc < 0.5 && r.auroc_inverted > 0.5;
  return r;
}

}  // namespace csts
