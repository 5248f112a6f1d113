#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "csts/csv.hpp"
#include "csts/graph.hpp"
#include "csts/synth.hpp"

namespace csts {

using WindowId = std::int64_t;

/// Half-open tumbling windows [origin + k*width, origin + (k+1)*width).
struct WindowIndexer {
  Timestamp origin = 1704067200;
  Timestamp width = 30 * 60;

  WindowId assign(Timestamp t) const;
  Timestamp start(WindowId w) const { return origin + w * width; }
};

inline WindowId assign_window(Timestamp t, const WindowIndexer& idx) { return idx.assign(t); }

/// Contiguous train/test window ranges of one environment, both half-open.
struct Split {
  std::string env;
  WindowId train_begin = 0, train_end = 0;
  WindowId test_begin = 0, test_end = 0;
  WindowIndexer indexer;

  bool in_train(WindowId w) const { return w >= train_begin && w < train_end; }
  bool in_test(WindowId w) const { return w >= test_begin && w < test_end; }
  std::string fingerprint() const;
};

/// First floor(train_fraction * n) windows train, the rest test.
Split time_split(const std::string& env, WindowId n_windows, double train_fraction,
                 const WindowIndexer& idx);
/// Every window is test (transfer target).
Split test_only_split(const std::string& env, WindowId n_windows, const WindowIndexer& idx);

using EdgeKey = std::tuple<std::string, std::string, RelationshipType>;

enum class Channel { Process, File, Network };
inline constexpr std::array<Channel, 3> kAllChannels = {Channel::Process, Channel::File,
                                                        Channel::Network};
std::string_view to_string(Channel c);
Channel parse_channel(std::string_view name);
/// Channel of a relationship type, if it feeds one.
std::optional<Channel> channel_of(RelationshipType t);

/// Edge and token statistics folded over training windows only.
class TrainHistory {
 public:
  TrainHistory() = default;

  static TrainHistory fit(const SubstrateGraph& g, const Split& split);

  bool fitted() const { return fitted_; }
  const std::string& split_fingerprint() const { return split_fingerprint_; }
  std::string fingerprint() const;

  /// Throws UnfittedHistory, or SplitMismatch when fitted on another split.
  void require(const Split& expected_train) const;

  bool seen(const EdgeKey& k) const { return edge_counts_.count(k) > 0; }
  std::int64_t edge_count(const EdgeKey& k) const;
  std::int64_t edge_observations() const { return n_edges_; }
  std::size_t distinct_edges() const { return edge_counts_.size(); }
  /// -ln((count + 1) / (N + V)) over train edge observations.
  double edge_rarity(const EdgeKey& k) const;

  std::int64_t token_count(Channel c, const std::string& token) const;
  std::int64_t token_observations(Channel c) const;
  std::size_t distinct_tokens(Channel c) const;
  double token_surprisal(Channel c, const std::string& token) const;

  // Direct construction for fixtures and hand-computed checks.
  void add_edge(const EdgeKey& k, std::int64_t count = 1);
  void add_token(Channel c, const std::string& token, std::int64_t count = 1);
  void mark_fitted(std::string split_fingerprint);

 private:
  bool fitted_ = false;
  std::string split_fingerprint_;
  std::map<EdgeKey, std::int64_t> edge_counts_;
  std::int64_t n_edges_ = 0;
  std::array<std::map<std::string, std::int64_t>, 3> tokens_;
  std::array<std::int64_t, 3> n_tokens_{};
};

struct WindowFeatureRow {
  WindowId window_id = 0;
  std::string env;
  std::string actor;  // empty for per-window rows
  int label = 0;
  std::vector<double> values;  // aligned with FeatureMatrix::feature_names
};

struct FeatureMatrix {
  std::string pipeline;  // baseline | csts
  std::string task;      // LM | ZDT
  std::string env;
  std::vector<std::string> feature_names;
  std::vector<WindowFeatureRow> rows;
  std::string split_fingerprint;
  std::string history_fingerprint;

  Eigen::MatrixXd X() const;
  Eigen::VectorXd y() const;
  std::set<WindowId> window_ids() const;
  /// Rows whose window lies in [begin, end).
  FeatureMatrix windows(WindowId begin, WindowId end) const;
  int column(std::string_view name) const;
  double value(std::size_t row, std::string_view feature) const;

  nlohmann::json sidecar() const;
};

/// `<stem>.csv` (window_id, env, actor, label, features...) plus `<stem>.json`.
void write_feature_matrix(const FeatureMatrix& m, const std::string& stem);
FeatureMatrix read_feature_matrix(const std::string& stem);
std::string feature_matrix_csv(const FeatureMatrix& m);

/// Raw column names the event-centric baseline reads directly.
struct BaselineBinding {
  std::string event = "event";
  std::string actor = "user";
  std::string dest = "dst_host";
  std::string ts = "ts";
  std::string actor_label = "user";  // feature naming: distinct_<actor_label>
};

BaselineBinding baseline_binding(Task t);
std::vector<std::string> baseline_feature_names(const BaselineBinding& b);

/// A raw row seen through the baseline binding.
struct BoundEvent {
  std::string event;
  std::string actor;
  std::string dest;
  Timestamp ts = 0;
};

/// Throws MissingColumn naming the first absent bound column. Rows whose
/// timestamp is not epoch seconds are dropped.
std::vector<BoundEvent> bind_baseline(const CsvTable& raw, const BaselineBinding& b);

/// Features of one window: per-kind counts, distinct actors/destinations,
/// max events per actor, burstiness (max 5-minute count / mean 5-minute
/// count) with a missingness flag for empty windows.
std::vector<double> baseline_features(const std::vector<BoundEvent>& window_events,
                                      Timestamp window_start, Timestamp width);

/// Per-window baseline rows for windows [0, n_windows); see bind_baseline.
FeatureMatrix baseline_matrix(const CsvTable& raw, const BaselineBinding& b,
                              const WindowIndexer& idx, WindowId n_windows,
                              const std::vector<WindowLabel>& labels, Task task,
                              const std::string& env);

/// Edge indices per window, by edge start time.
std::map<WindowId, std::vector<std::size_t>> bucket_edges(const SubstrateGraph& g,
                                                          const WindowIndexer& idx);

std::vector<std::string> csts_lm_feature_names();
std::vector<std::string> csts_zdt_feature_names();

/// One row per (User actor, window) with outgoing activity. Throws
/// UnfittedHistory / SplitMismatch via TrainHistory::require.
FeatureMatrix csts_lm_matrix(const SubstrateGraph& g, const TrainHistory& hist,
                             const Split& train_split, const WindowIndexer& idx,
                             WindowId n_windows, const std::vector<WindowLabel>& labels,
                             const std::string& env);

/// One row per window over CONNECTS_TO flows.
FeatureMatrix csts_zdt_matrix(const SubstrateGraph& g, const TrainHistory& hist,
                              const Split& train_split, const WindowIndexer& idx,
                              WindowId n_windows, const std::vector<WindowLabel>& labels,
                              const std::string& env);

}  // namespace csts
