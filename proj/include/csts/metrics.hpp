#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace csts {

/// Empirical quantile with linear interpolation between order statistics
/// (position q * (n - 1) in the sorted sample). Empty input yields 0.
template <typename Scalar>
Scalar quantile(std::vector<Scalar> values, double q) {
  if (values.empty()) return Scalar(0);
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const Scalar frac = static_cast<Scalar>(pos - static_cast<double>(lo));
  return values[lo] + frac * (values[hi] - values[lo]);
}

struct Confusion {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;

  double precision() const { return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }
  double f1() const {
    return tp == 0 ? 0.0 : 2.0 * double(tp) / double(2 * tp + fp + fn);
  }
};

namespace detail {

template <typename DerivedY>
bool positive(const Eigen::DenseBase<DerivedY>& y, Eigen::Index i) {
  return y(i) > 0.5;
}

/// Indices ordered by ascending score; ties keep index order.
template <typename DerivedS>
std::vector<Eigen::Index> ascending_order(const Eigen::DenseBase<DerivedS>& s) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(s.size()));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return s(a) < s(b); });
  return order;
}

/// Pair counting over tie groups with integer multiplicities. Returns
/// (2 * wins + ties) and P * N so the caller divides exactly once.
template <typename DerivedS, typename DerivedY>
std::pair<std::int64_t, std::int64_t> auroc_counts(const Eigen::DenseBase<DerivedS>& s,
                                                   const Eigen::DenseBase<DerivedY>& y,
                                                   const std::vector<Eigen::Index>& order,
                                                   const std::vector<std::int64_t>* weight) {
  std::int64_t neg_below = 0, twice_wins_plus_ties = 0, pos_total = 0, neg_total = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::int64_t pos_g = 0, neg_g = 0;
    while (j < order.size() && s(order[j]) == s(order[i])) {
      const std::int64_t w = weight ? (*weight)[order[j]] : 1;
      (positive(y, order[j]) ? pos_g : neg_g) += w;
      ++j;
    }
    twice_wins_plus_ties += 2 * pos_g * neg_below + pos_g * neg_g;
    neg_below += neg_g;
    pos_total += pos_g;
    neg_total += neg_g;
    i = j;
  }
  return {twice_wins_plus_ties, pos_total * neg_total};
}

}  // namespace detail

/// Probability a random positive outranks a random negative, ties counted
/// one half. One-class input returns 0 and sets `degenerate`.
template <typename DerivedS, typename DerivedY>
double auroc(const Eigen::DenseBase<DerivedS>& scores, const Eigen::DenseBase<DerivedY>& labels,
             bool* degenerate = nullptr) {
  auto [num, pairs] = detail::auroc_counts(scores, labels, detail::ascending_order(scores), nullptr);
  if (degenerate) *degenerate = pairs == 0;
  if (pairs == 0) return 0.0;
  return static_cast<double>(num) / (2.0 * static_cast<double>(pairs));
}

/// Predicted positive iff score >= threshold.
template <typename DerivedS, typename DerivedY>
Confusion confusion_at(const Eigen::DenseBase<DerivedS>& scores,
                       const Eigen::DenseBase<DerivedY>& labels, double threshold) {
  Confusion c;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const bool pred = scores(i) >= threshold;
    const bool pos = detail::positive(labels, i);
    if (pred && pos) ++c.tp;
    if (pred && !pos) ++c.fp;
    if (!pred && pos) ++c.fn;
    if (!pred && !pos) ++c.tn;
  }
  return c;
}

inline constexpr int kThresholdSteps = 20;  // grid {0.00, 0.05, ..., 1.00}

inline double grid_threshold(int k) { return static_cast<double>(k) / kThresholdSteps; }

struct SweepResult {
  double best_f1 = 0;
  double best_threshold = 0;
};

/// Max F1 over the fixed grid; the smallest threshold achieving it wins.
template <typename DerivedS, typename DerivedY>
SweepResult best_f1_sweep(const Eigen::DenseBase<DerivedS>& scores,
                          const Eigen::DenseBase<DerivedY>& labels) {
  SweepResult best;
  for (int k = 0; k <= kThresholdSteps; ++k) {
    const double f1 = confusion_at(scores, labels, grid_threshold(k)).f1();
    if (f1 > best.best_f1) best = {f1, grid_threshold(k)};
  }
  return best;
}

enum class BootstrapMetric { Auroc, F1At05, BestF1 };

struct BootstrapInterval {
  double lo = 0, hi = 0;
  int resamples = 0;  // usable resamples
  int skipped = 0;    // one-class resamples
  bool degenerate = false;
};

/// Percentile (2.5%, 97.5%) interval over B row resamples. Resample b draws
/// from its own generator seeded with seed + b, so the result does not depend
/// on evaluation order.
template <typename DerivedS, typename DerivedY>
BootstrapInterval bootstrap_ci(const Eigen::DenseBase<DerivedS>& scores,
                               const Eigen::DenseBase<DerivedY>& labels, BootstrapMetric metric,
                               int B, std::uint64_t seed) {
  BootstrapInterval out;
  const auto n = static_cast<std::size_t>(scores.size());
  if (n == 0 || B <= 0) {
    out.degenerate = true;
    return out;
  }
  const auto order = detail::ascending_order(scores);
  std::vector<std::int64_t> w(n);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(B));
  for (int b = 0; b < B; ++b) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(b));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::fill(w.begin(), w.end(), 0);
    for (std::size_t i = 0; i < n; ++i) ++w[pick(rng)];
    std::int64_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      (detail::positive(labels, static_cast<Eigen::Index>(i)) ? pos : neg) += w[i];
    }
    if (pos == 0 || neg == 0) {
      ++out.skipped;
      continue;
    }
    double v = 0;
    if (metric == BootstrapMetric::Auroc) {
      auto [num, pairs] = detail::auroc_counts(scores, labels, order, &w);
      v = static_cast<double>(num) / (2.0 * static_cast<double>(pairs));
    } else {
      auto f1_at = [&](double thr) {
        Confusion c;
        for (std::size_t i = 0; i < n; ++i) {
          const bool pred = scores(static_cast<Eigen::Index>(i)) >= thr;
          const bool p = detail::positive(labels, static_cast<Eigen::Index>(i));
          (pred ? (p ? c.tp : c.fp) : (p ? c.fn : c.tn)) += w[i];
        }
        return c.f1();
      };
      if (metric == BootstrapMetric::F1At05) {
        v = f1_at(0.5);
      } else {
        for (int k = 0; k <= kThresholdSteps; ++k) v = std::max(v, f1_at(grid_threshold(k)));
      }
    }
    values.push_back(v);
  }
  out.resamples = static_cast<int>(values.size());
  if (values.empty()) {
    out.degenerate = true;
    return out;
  }
  out.lo = quantile(values, 0.025);
  out.hi = quantile(values, 0.975);
  return out;
}

}  // namespace csts
