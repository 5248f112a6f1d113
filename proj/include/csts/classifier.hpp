#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>
#include <json.hpp>

#include "csts/error.hpp"

namespace csts {

struct ClassifierSpec {
  double l2 = 1e-3;
  int epochs = 500;
  double learning_rate = 0.1;
  bool standardize = true;
  std::uint64_t seed = 42;

  static ClassifierSpec from_json(const nlohmann::json& j) {
    ClassifierSpec s;
    s.l2 = j.value("l2", s.l2);
    s.epochs = j.value("epochs", s.epochs);
    s.learning_rate = j.value("learning_rate", s.learning_rate);
    s.standardize = j.value("standardize", s.standardize);
    s.seed = j.value("seed", s.seed);
    return s;
  }
  nlohmann::json to_json() const {
    return {{"model", "l2_logistic"}, {"l2", l2},         {"epochs", epochs},
            {"learning_rate", learning_rate}, {"standardize", standardize}, {"seed", seed}};
  }
};

/// L2-regularized logistic model over train-standardized features.
template <typename Scalar = double>
struct LogisticModel {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector mean;
  Vector scale;
  Vector weights;
  Scalar bias = 0;

  template <typename Derived>
  Matrix standardized(const Eigen::MatrixBase<Derived>& X) const {
    return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
  }

  template <typename Derived>
  Vector decision(const Eigen::MatrixBase<Derived>& X) const {
    return (standardized(X) * weights).array() + bias;
  }

  template <typename Derived>
  Vector predict_proba(const Eigen::MatrixBase<Derived>& X) const {
    return decision(X).unaryExpr([](Scalar z) { return sigmoid(z); });
  }

  static Scalar sigmoid(Scalar z) {
    if (z >= 0) return Scalar(1) / (Scalar(1) + std::exp(-z));
    const Scalar e = std::exp(z);
    return e / (Scalar(1) + e);
  }
};

/// Column means and population standard deviations; constant columns get
/// scale 1 so they standardize to zero.
template <typename Derived>
std::pair<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>,
          Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>>
standardization(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean = X.colwise().mean().transpose();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> scale =
      ((X.rowwise() - mean.transpose()).array().square().colwise().mean().sqrt()).transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (!(scale(j) > Scalar(1e-12))) scale(j) = Scalar(1);
  }
  return {mean, scale};
}

/// Full-batch gradient descent from a small seeded initialization. Throws
/// ViabilityGateFailure unless both classes are present.
template <typename DerivedX, typename DerivedY>
LogisticModel<typename DerivedX::Scalar> train_logistic(const Eigen::MatrixBase<DerivedX>& X,
                                                        const Eigen::MatrixBase<DerivedY>& y,
                                                        const ClassifierSpec& spec) {
  using Scalar = typename DerivedX::Scalar;
  using Model = LogisticModel<Scalar>;
  const Eigen::Index n = X.rows(), d = X.cols();
  const Eigen::Index pos = (y.array() > Scalar(0.5)).count();
  if (pos == 0 || pos == n) {
    throw Error(ErrorCode::ViabilityGateFailure,
                "training split needs both classes (positives " + std::to_string(pos) + " of " +
                    std::to_string(n) + ")");
  }
  Model m;
  if (spec.standardize) {
    std::tie(m.mean, m.scale) = standardization(X);
  } else {
    m.mean = Model::Vector::Zero(d);
    m.scale = Model::Vector::Ones(d);
  }
  const typename Model::Matrix Z = m.standardized(X);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  m.weights.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) m.weights(j) = static_cast<Scalar>(init(rng));
  m.bias = 0;
  const Scalar lr = static_cast<Scalar>(spec.learning_rate);
  const Scalar lambda = static_cast<Scalar>(spec.l2);
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    typename Model::Vector p =
        ((Z * m.weights).array() + m.bias).unaryExpr([](Scalar z) { return Model::sigmoid(z); });
    typename Model::Vector r = p - y.template cast<Scalar>();
    typename Model::Vector grad = Z.transpose() * r * inv_n + lambda * m.weights;
    m.weights -= lr * grad;
    m.bias -= lr * r.sum() * inv_n;
  }
  return m;
}

}  // namespace csts
