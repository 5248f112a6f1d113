#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "csts/features.hpp"

namespace csts {

/// Canonical destination ids of one window's channel edges.
struct WindowTokens {
  WindowId window_id = 0;
  std::array<std::vector<std::string>, 3> tokens;  // indexed by Channel

  bool empty(const std::set<Channel>& channels) const;
};

/// Every window between the first and last edge window, including empty ones.
std::vector<WindowTokens> window_tokens(const SubstrateGraph& g, const WindowIndexer& idx);

/// Token history of a whole producer graph (all windows are train).
TrainHistory fit_token_history(const SubstrateGraph& g, const WindowIndexer& idx);

/// Mean over non-empty channels of the mean smoothed token surprisal;
/// nullopt when every selected channel is empty.
std::optional<double> novelty_score(const WindowTokens& w, const TrainHistory& hist,
                                    const std::set<Channel>& channels);

struct ScoreSummary {
  double p50 = 0, p90 = 0, max = 0;
};

struct ViabilitySettings {
  int window_minutes = 30;
  double q = 0.40;
  int gate = 5;
  std::set<Channel> channels{Channel::Process, Channel::File, Channel::Network};
};

struct ViabilityReport {
  int window_minutes = 30;
  double q = 0.40;
  int gate = 5;
  int n_train_windows = 0, n_test_windows = 0;
  int excluded_train = 0, excluded_test = 0;
  double tau = 0;
  int train_windows_above = 0;
  int test_windows_above = 0;
  ScoreSummary train_summary, test_summary;
  std::map<std::string, double> train_nonempty, test_nonempty;  // channel -> rate
  bool viable = false;

  nlohmann::json to_json() const;
};

/// Threshold = q-quantile (linear interpolation) of train scores; test scores
/// only ever meet the threshold, they never shape it.
double train_threshold(const std::vector<double>& train_scores, double q);

ViabilityReport threshold_report(const std::vector<double>& train_scores,
                                 const std::vector<double>& test_scores,
                                 const ViabilitySettings& s);

/// Full protocol over token windows: scores, threshold, counts, channel rates, verdict.
ViabilityReport viability_protocol(const std::vector<WindowTokens>& train,
                                   const std::vector<WindowTokens>& test,
                                   const TrainHistory& hist, const ViabilitySettings& s);

}  // namespace csts
