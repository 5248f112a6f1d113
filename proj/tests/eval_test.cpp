#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csts/classifier.hpp"
#include "csts/error.hpp"
#include "csts/eval.hpp"
#include "csts/viability.hpp"
#include "support.hpp"

namespace csts {
namespace {

FeatureMatrix one_feature(const std::string& env, std::vector<double> values, std::vector<int> labels) {
  FeatureMatrix m;
  m.pipeline = "csts";
  m.task = "ZDT";
  m.env = env;
  m.feature_names = {"x"};
  for (std::size_t i = 0; i < values.size(); ++i) {
    m.rows.push_back({static_cast<WindowId>(i), env, "", labels[i], {values[i]}});
  }
  return m;
}

TEST(Logistic, SeparableDataClassifiedExactly) {
  Eigen::MatrixXd X(40, 2);
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i) {
    y(i) = i < 20 ? 0 : 1;
    X(i, 0) = (i < 20 ? -2.0 : 2.0) + 0.01 * i;
    X(i, 1) = 0.5;  // constant column standardizes to zero
  }
  const auto m = train_logistic(X, y, ClassifierSpec{});
  const Eigen::VectorXd p = m.predict_proba(X);
  for (int i = 0; i < 40; ++i) EXPECT_EQ(p(i) >= 0.5, y(i) == 1) << i;
  EXPECT_EQ(m.scale(1), 1.0);
}

TEST(Logistic, SingleClassRejected) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 3);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(10);
  try {
    train_logistic(X, y, ClassifierSpec{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ViabilityGateFailure);
  }
}

TEST(Logistic, SameSeedSameWeights) {
  std::mt19937_64 rng(1);
  Eigen::MatrixXd X(30, 4);
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 4; ++j) X(i, j) = std::normal_distribution<double>()(rng);
    y(i) = X(i, 0) > 0;
  }
  const auto a = train_logistic(X, y, ClassifierSpec{});
  const auto b = train_logistic(X, y, ClassifierSpec{});
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.bias, b.bias);
}

TEST(Evaluate, ClassCountsAndIdentifiers) {
  const auto train = one_feature("EnvA", {0, 0, 1, 1, 0, 1}, {0, 0, 1, 1, 0, 1});
  const auto test = one_feature("EnvB", {0, 1, 0, 1}, {0, 1, 0, 1});
  EvalSettings s;
  s.bootstrap_b = 200;
  const auto r = evaluate(train, test, ClassifierSpec{}, s, "EnvA->EnvB");
  EXPECT_EQ(r.status, "ok");
  EXPECT_EQ(r.train_pos, 3);
  EXPECT_EQ(r.test_neg, 2);
  EXPECT_EQ(r.auroc, 1.0);
  EXPECT_EQ(r.setting, "EnvA->EnvB");
}

TEST(Evaluate, SchemaFailureRowIsZeroed) {
  const auto r = schema_failure_report("LM", "EnvA->EnvB", "baseline", "P1", "MissingColumn: user");
  EXPECT_EQ(r.status, "schema_failure");
  EXPECT_EQ(r.f1_at_05, 0);
  EXPECT_EQ(r.auroc, 0);
  EXPECT_NE(reports_csv({r}).find("schema_failure"), std::string::npos);
}

TEST(Orientation, AgreeingShift) {
  const auto a = one_feature("EnvA", {2, 4, 1, 1}, {1, 1, 0, 0});
  const auto r = orientation_diagnostic(a, a, Eigen::Vector4d(0.9, 0.8, 0.1, 0.2));
  ASSERT_EQ(r.features.size(), 1u);
  // Raw positive-minus-negative gap of 2 over the population std of {2,4,1,1}.
  EXPECT_NEAR(r.features[0].delta_a, 2.0 / std::sqrt(1.5), 1e-12);
  EXPECT_TRUE(r.features[0].sign_agree);
  EXPECT_EQ(r.disagreements(), 0);
  EXPECT_FALSE(r.polarity_inverted);
}

TEST(Orientation, FlippedShiftAndInvertedScores) {
  const auto a = one_feature("EnvA", {2, 2, 1, 1}, {1, 1, 0, 0});
  const auto b = one_feature("EnvB", {1, 1, 2, 2}, {1, 1, 0, 0});
  // auroc 0.25 in B; the negated scores give 0.75.
  const auto r = orientation_diagnostic(a, b, Eigen::Vector4d(0.2, 0.6, 0.4, 0.8));
  EXPECT_FALSE(r.features[0].sign_agree);
  EXPECT_EQ(r.disagreements(), 1);
  EXPECT_DOUBLE_EQ(r.auroc, 0.25);
  EXPECT_DOUBLE_EQ(r.auroc_inverted, 0.75);
  EXPECT_TRUE(r.polarity_inverted);
}

TEST(Orientation, DeadBand) {
  EXPECT_EQ(dead_band_sign(1e-12, 1e-9), 0);
  EXPECT_EQ(dead_band_sign(-1e-3, 1e-9), -1);
  EXPECT_EQ(dead_band_sign(2.0, 1e-9), 1);
}

TEST(Viability, NothingAboveThresholdIsNotViable) {
  ViabilitySettings s;
  const auto r = threshold_report({1, 2, 2, 3, 2}, {1, 2, 1.5}, s);
  EXPECT_DOUBLE_EQ(r.tau, 2.0);
  EXPECT_EQ(r.test_windows_above, 0);
  EXPECT_FALSE(r.viable);
}

TEST(Viability, NoveltyFromSmoothedCounts) {
  TrainHistory h;
  h.add_token(Channel::Process, "cmd.exe", 4);
  h.add_token(Channel::Process, "svchost.exe", 4);
  WindowTokens w;
  w.tokens[static_cast<int>(Channel::Process)] = {"cmd.exe"};
  EXPECT_NEAR(*novelty_score(w, h, {Channel::Process}), std::log(2.0), 1e-12);
  w.tokens[static_cast<int>(Channel::Process)] = {"never.exe"};
  EXPECT_NEAR(*novelty_score(w, h, {Channel::Process}), std::log(10.0), 1e-12);
}

TEST(Viability, AllEmptyWindowExcluded) {
  TrainHistory h;
  h.add_token(Channel::File, "f", 1);
  WindowTokens empty, used;
  used.tokens[static_cast<int>(Channel::File)] = {"f"};
  EXPECT_FALSE(novelty_score(empty, h, {Channel::Process, Channel::File}).has_value());
  const auto r = viability_protocol({used, empty}, {empty}, h, ViabilitySettings{});
  EXPECT_EQ(r.excluded_train, 1);
  EXPECT_EQ(r.excluded_test, 1);
  EXPECT_EQ(r.n_train_windows, 1);
}

TEST(Viability, IidScoresLandNearOneMinusQ) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> d;
  std::vector<double> train(4000), test(4000);
  for (auto& x : train) x = d(rng);
  for (auto& x : test) x = d(rng);
  const auto r = threshold_report(train, test, ViabilitySettings{});
  EXPECT_NEAR(static_cast<double>(r.test_windows_above) / 4000.0, 0.60, 0.05);
  EXPECT_TRUE(r.viable);
}

TEST(Viability, ThresholdIgnoresTestScores) {
  auto r = testing::check_threshold_independence(31, 200);
  EXPECT_TRUE(r.pass) << r.detail;
}

}  // namespace
}  // namespace csts
