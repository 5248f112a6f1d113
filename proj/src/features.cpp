#include "csts/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "csts/error.hpp"
#include "csts/hash.hpp"
#include "csts/timefmt.hpp"

namespace csts {

using nlohmann::json;

WindowId WindowIndexer::assign(Timestamp t) const {
  const Timestamp d = t - origin;
  return d >= 0 ? d / width : -((-d + width - 1) / width);
}

std::string Split::fingerprint() const {
  return csts::fingerprint(fmt::format("split|{}|{}|{}|{}|{}|{}|{}", env, train_begin, train_end,
                                       test_begin, test_end, indexer.origin, indexer.width));
}

Split time_split(const std::string& env, WindowId n_windows, double train_fraction,
                 const WindowIndexer& idx) {
  Split s;
  s.env = env;
  s.indexer = idx;
  s.train_end = static_cast<WindowId>(std::floor(train_fraction * static_cast<double>(n_windows)));
  s.test_begin = s.train_end;
  s.test_end = n_windows;
  return s;
}

Split test_only_split(const std::string& env, WindowId n_windows, const WindowIndexer& idx) {
  Split s;
  s.env = env;
  s.indexer = idx;
  s.test_end = n_windows;
  return s;
}

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::Process: return "process";
    case Channel::File: return "file";
    case Channel::Network: return "network";
  }
  return "?";
}

Channel parse_channel(std::string_view name) {
  for (auto c : kAllChannels) {
    if (to_string(c) == name) return c;
  }
  throw Error(ErrorCode::ParseError, "unknown channel '" + std::string(name) + "'");
}

std::optional<Channel> channel_of(RelationshipType t) {
  switch (t) {
    case RelationshipType::Executes:
    case RelationshipType::Spawns: return Channel::Process;
    case RelationshipType::Reads:
    case RelationshipType::Writes:
    case RelationshipType::Modifies: return Channel::File;
    case RelationshipType::ConnectsTo: return Channel::Network;
    default: return std::nullopt;
  }
}

namespace {

EdgeKey key_of(const CanonicalRelationship& r) { return {r.src, r.dst, r.type}; }

double smoothed_surprisal(std::int64_t count, std::int64_t n, std::size_t v) {
  return -std::log(static_cast<double>(count + 1) / static_cast<double>(n + static_cast<std::int64_t>(v)));
}

}  // namespace

TrainHistory TrainHistory::fit(const SubstrateGraph& g, const Split& split) {
  TrainHistory h;
  for (const auto& r : g.edges()) {
    if (!split.in_train(split.indexer.assign(r.time.start))) continue;
    h.add_edge(key_of(r));
    if (auto c = channel_of(r.type)) h.add_token(*c, r.dst);
  }
  h.mark_fitted(split.fingerprint());
  return h;
}

std::string TrainHistory::fingerprint() const {
  std::string buf = split_fingerprint_;
  for (const auto& [k, n] : edge_counts_) {
    buf += fmt::format("|{}>{}:{}={}", std::get<0>(k), std::get<1>(k),
                       to_string(std::get<2>(k)), n);
  }
  for (auto c : kAllChannels) {
    for (const auto& [t, n] : tokens_[static_cast<int>(c)]) {
      buf += fmt::format("|{}:{}={}", to_string(c), t, n);
    }
  }
  return csts::fingerprint(buf);
}

void TrainHistory::require(const Split& expected_train) const {
  if (!fitted_) throw Error(ErrorCode::UnfittedHistory, "train history has not been fitted");
  if (split_fingerprint_ != expected_train.fingerprint()) {
    throw Error(ErrorCode::SplitMismatch, "history fitted on split " + split_fingerprint_ +
                                              ", evaluation expects " +
                                              expected_train.fingerprint());
  }
}

std::int64_t TrainHistory::edge_count(const EdgeKey& k) const {
  auto it = edge_counts_.find(k);
  return it == edge_counts_.end() ? 0 : it->second;
}

double TrainHistory::edge_rarity(const EdgeKey& k) const {
  return smoothed_surprisal(edge_count(k), n_edges_, edge_counts_.size());
}

std::int64_t TrainHistory::token_count(Channel c, const std::string& token) const {
  const auto& m = tokens_[static_cast<int>(c)];
  auto it = m.find(token);
  return it == m.end() ? 0 : it->second;
}

std::int64_t TrainHistory::token_observations(Channel c) const {
  return n_tokens_[static_cast<int>(c)];
}

std::size_t TrainHistory::distinct_tokens(Channel c) const {
  return tokens_[static_cast<int>(c)].size();
}

double TrainHistory::token_surprisal(Channel c, const std::string& token) const {
  return smoothed_surprisal(token_count(c, token), token_observations(c), distinct_tokens(c));
}

void TrainHistory::add_edge(const EdgeKey& k, std::int64_t count) {
  edge_counts_[k] += count;
  n_edges_ += count;
}

void TrainHistory::add_token(Channel c, const std::string& token, std::int64_t count) {
  tokens_[static_cast<int>(c)][token] += count;
  n_tokens_[static_cast<int>(c)] += count;
}

void TrainHistory::mark_fitted(std::string split_fingerprint) {
  fitted_ = true;
  split_fingerprint_ = std::move(split_fingerprint);
}

Eigen::MatrixXd FeatureMatrix::X() const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(feature_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < feature_names.size(); ++j) x(i, j) = rows[i].values[j];
  }
  return x;
}

Eigen::VectorXd FeatureMatrix::y() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) v(i) = rows[i].label;
  return v;
}

std::set<WindowId> FeatureMatrix::window_ids() const {
  std::set<WindowId> out;
  for (const auto& r : rows) out.insert(r.window_id);
  return out;
}

FeatureMatrix FeatureMatrix::windows(WindowId begin, WindowId end) const {
  FeatureMatrix out = *this;
  out.rows.clear();
  for (const auto& r : rows) {
    if (r.window_id >= begin && r.window_id < end) out.rows.push_back(r);
  }
  return out;
}

int FeatureMatrix::column(std::string_view name) const {
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    if (feature_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

double FeatureMatrix::value(std::size_t row, std::string_view feature) const {
  int c = column(feature);
  if (c < 0) throw Error(ErrorCode::MissingColumn, std::string(feature));
  return rows.at(row).values[c];
}

json FeatureMatrix::sidecar() const {
  return json{{"pipeline", pipeline},
              {"task", task},
              {"env", env},
              {"rows", rows.size()},
              {"feature_names", feature_names},
              {"split_fingerprint", split_fingerprint},
              {"history_fingerprint", history_fingerprint}};
}

std::string feature_matrix_csv(const FeatureMatrix& m) {
  std::string out = "window_id,env,actor,label";
  for (const auto& f : m.feature_names) out += "," + f;
  out += '\n';
  for (const auto& r : m.rows) {
    out += format_csv_line({std::to_string(r.window_id), r.env, r.actor, std::to_string(r.label)});
    for (double v : r.values) out += fmt::format(",{}", v);
    out += '\n';
  }
  return out;
}

void write_feature_matrix(const FeatureMatrix& m, const std::string& stem) {
  std::ofstream csv(stem + ".csv", std::ios::binary);
  std::ofstream side(stem + ".json", std::ios::binary);
  if (!csv || !side) throw Error(ErrorCode::IoFailure, "cannot write " + stem);
  csv << feature_matrix_csv(m);
  side << m.sidecar().dump(2) << '\n';
}

FeatureMatrix read_feature_matrix(const std::string& stem) {
  std::ifstream side(stem + ".json");
  if (!side) throw Error(ErrorCode::MissingArtifact, stem + ".json");
  FeatureMatrix m;
  try {
    json j = json::parse(side);
    m.pipeline = j.at("pipeline").get<std::string>();
    m.task = j.at("task").get<std::string>();
    m.env = j.at("env").get<std::string>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.split_fingerprint = j.value("split_fingerprint", std::string());
    m.history_fingerprint = j.value("history_fingerprint", std::string());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, stem + ".json: " + e.what());
  }
  std::ifstream probe(stem + ".csv");
  if (!probe) throw Error(ErrorCode::MissingArtifact, stem + ".csv");
  CsvTable t = read_csv(stem + ".csv");
  for (const auto& row : t.rows) {
    if (row.size() != 4 + m.feature_names.size()) {
      throw Error(ErrorCode::ParseError, stem + ".csv: ragged row");
    }
    WindowFeatureRow r;
    r.window_id = std::stoll(row[0]);
    r.env = row[1];
    r.actor = row[2];
    r.label = std::stoi(row[3]);
    for (std::size_t i = 4; i < row.size(); ++i) r.values.push_back(std::stod(row[i]));
    m.rows.push_back(std::move(r));
  }
  return m;
}

BaselineBinding baseline_binding(Task t) {
  if (t == Task::LM) return {"event", "user", "dst_host", "ts", "user"};
  return {"event", "src_host", "dest_ip", "ts", "src"};
}

std::vector<std::string> baseline_feature_names(const BaselineBinding& b) {
  return {"count_logon",      "count_exec", "count_connect",     "distinct_" + b.actor_label,
          "distinct_dst",     "max_actor_events", "burstiness", "burstiness_missing"};
}

std::vector<BoundEvent> bind_baseline(const CsvTable& raw, const BaselineBinding& b) {
  const int ev = raw.column(b.event), ac = raw.column(b.actor), de = raw.column(b.dest),
            ts = raw.column(b.ts);
  for (auto [col, name] : {std::pair{ev, &b.event}, std::pair{ac, &b.actor},
                           std::pair{de, &b.dest}, std::pair{ts, &b.ts}}) {
    if (col < 0) throw Error(ErrorCode::MissingColumn, *name);
  }
  std::vector<BoundEvent> out;
  out.reserve(raw.rows.size());
  for (const auto& row : raw.rows) {
    if (row.size() != raw.header.size()) continue;
    auto t = parse_epoch_seconds(row[ts]);
    if (!t) continue;
    out.push_back({row[ev], row[ac], row[de], *t});
  }
  return out;
}

std::vector<double> baseline_features(const std::vector<BoundEvent>& events,
                                      Timestamp window_start, Timestamp width) {
  double logon = 0, exec = 0, connect = 0;
  std::set<std::string> actors, dests;
  std::map<std::string, int> per_actor;
  constexpr int kBuckets = 6;
  std::array<int, kBuckets> buckets{};
  for (const auto& e : events) {
    if (e.event == "logon") ++logon;
    if (e.event == "exec") ++exec;
    if (e.event == "connect") ++connect;
    if (!e.actor.empty()) {
      actors.insert(e.actor);
      ++per_actor[e.actor];
    }
    if (!e.dest.empty()) dests.insert(e.dest);
    auto b = (e.ts - window_start) * kBuckets / width;
    ++buckets[std::clamp<Timestamp>(b, 0, kBuckets - 1)];
  }
  int max_actor = 0;
  for (const auto& [a, n] : per_actor) max_actor = std::max(max_actor, n);
  double burstiness = 0, missing = 1;
  if (!events.empty()) {
    const double mean = static_cast<double>(events.size()) / kBuckets;
    burstiness = *std::max_element(buckets.begin(), buckets.end()) / mean;
    missing = 0;
  }
  return {logon,
          exec,
          connect,
          static_cast<double>(actors.size()),
          static_cast<double>(dests.size()),
          static_cast<double>(max_actor),
          burstiness,
          missing};
}

namespace {

std::map<Timestamp, const WindowLabel*> labels_by_start(const std::vector<WindowLabel>& labels,
                                                        Task task) {
  std::map<Timestamp, const WindowLabel*> out;
  for (const auto& l : labels) {
    if (l.task == task) out[l.window_start] = &l;
  }
  return out;
}

int window_label(const std::map<Timestamp, const WindowLabel*>& m, Timestamp start) {
  auto it = m.find(start);
  return it == m.end() ? 0 : it->second->label;
}

}  // namespace

FeatureMatrix baseline_matrix(const CsvTable& raw, const BaselineBinding& b,
                              const WindowIndexer& idx, WindowId n_windows,
                              const std::vector<WindowLabel>& labels, Task task,
                              const std::string& env) {
  auto events = bind_baseline(raw, b);
  std::vector<std::vector<BoundEvent>> per_window(static_cast<std::size_t>(n_windows));
  for (auto& e : events) {
    WindowId w = idx.assign(e.ts);
    if (w >= 0 && w < n_windows) per_window[w].push_back(std::move(e));
  }
  const auto by_start = labels_by_start(labels, task);
  FeatureMatrix m;
  m.pipeline = "baseline";
  m.task = std::string(to_string(task));
  m.env = env;
  m.feature_names = baseline_feature_names(b);
  for (WindowId w = 0; w < n_windows; ++w) {
    WindowFeatureRow r;
    r.window_id = w;
    r.env = env;
    r.label = window_label(by_start, idx.start(w));
    r.values = baseline_features(per_window[w], idx.start(w), idx.width);
    m.rows.push_back(std::move(r));
  }
  return m;
}

std::map<WindowId, std::vector<std::size_t>> bucket_edges(const SubstrateGraph& g,
                                                          const WindowIndexer& idx) {
  std::map<WindowId, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    out[idx.assign(g.edges()[i].time.start)].push_back(i);
  }
  return out;
}

std::vector<std::string> csts_lm_feature_names() {
  return {"out_degree", "new_edge_count", "new_edge_rate",      "two_hop",
          "rarity",     "priv_spread",    "priv_spread_missing"};
}

std::vector<std::string> csts_zdt_feature_names() {
  return {"conn_count", "distinct_ext", "max_out_degree", "new_edge_count", "new_edge_rate",
          "rarity",     "two_hop",      "rate_missing",   "rarity_missing"};
}

namespace {

const std::string* string_attr(const CanonicalEntity* e, const std::string& name) {
  if (!e) return nullptr;
  auto it = e->attributes.find(name);
  if (it == e->attributes.end()) return nullptr;
  return std::get_if<std::string>(&it->second);
}

std::set<std::string> injected_event_ids(const std::vector<WindowLabel>& labels, Task task) {
  std::set<std::string> out;
  for (const auto& l : labels) {
    if (l.task == task) out.insert(l.event_ids.begin(), l.event_ids.end());
  }
  return out;
}

bool carries_event(const CanonicalRelationship& r, const std::set<std::string>& ids) {
  auto it = r.attributes.find("event_id");
  if (it == r.attributes.end()) return false;
  const auto* s = std::get_if<std::string>(&it->second);
  return s && ids.count(*s);
}

}  // namespace

FeatureMatrix csts_lm_matrix(const SubstrateGraph& g, const TrainHistory& hist,
                             const Split& train_split, const WindowIndexer& idx,
                             WindowId n_windows, const std::vector<WindowLabel>& labels,
                             const std::string& env) {
  hist.require(train_split);
  const auto injected = injected_event_ids(labels, Task::LM);
  FeatureMatrix m;
  m.pipeline = "csts";
  m.task = "LM";
  m.env = env;
  m.feature_names = csts_lm_feature_names();
  m.split_fingerprint = hist.split_fingerprint();
  m.history_fingerprint = hist.fingerprint();

  for (const auto& [w, edge_ids] : bucket_edges(g, idx)) {
    if (w < 0 || w >= n_windows) continue;
    std::map<std::string, std::vector<std::size_t>> by_actor;
    std::map<std::string, std::set<std::string>> hosts_of;
    std::map<std::string, std::set<std::string>> users_at;
    for (auto i : edge_ids) {
      const auto& r = g.edges()[i];
      if (r.type != RelationshipType::AuthenticatesTo && r.type != RelationshipType::Executes) {
        continue;
      }
      const CanonicalEntity* src = g.find(r.src);
      if (!src || src->type != EntityType::User) continue;
      by_actor[r.src].push_back(i);
      if (r.type == RelationshipType::AuthenticatesTo) {
        hosts_of[r.src].insert(r.dst);
        users_at[r.dst].insert(r.src);
      }
    }
    for (const auto& [actor, ids] : by_actor) {
      const auto& hosts = hosts_of[actor];
      double fresh = 0, rarity = 0;
      int label = 0;
      for (auto i : ids) {
        const auto& r = g.edges()[i];
        if (!hist.seen(key_of(r))) ++fresh;
        rarity += hist.edge_rarity(key_of(r));
        if (carries_event(r, injected)) label = 1;
      }
      std::set<std::string> reach;
      for (const auto& h : hosts) {
        for (const auto& peer : users_at[h]) {
          if (peer == actor) continue;
          for (const auto& h2 : hosts_of[peer]) {
            if (!hosts.count(h2)) reach.insert(h2);
          }
        }
      }
      const std::string* actor_comm = string_attr(g.find(actor), "community");
      double spread = 0;
      if (actor_comm) {
        for (const auto& h : hosts) {
          const std::string* host_comm = string_attr(g.find(h), "community");
          if (host_comm && *host_comm != *actor_comm) ++spread;
        }
      }
      const double n = static_cast<double>(ids.size());
      WindowFeatureRow row;
      row.window_id = w;
      row.env = env;
      row.actor = actor;
      row.label = label;
      row.values = {static_cast<double>(hosts.size()),
                    fresh,
                    fresh / n,
                    static_cast<double>(reach.size()),
                    rarity / n,
                    spread,
                    actor_comm ? 0.0 : 1.0};
      m.rows.push_back(std::move(row));
    }
  }
  return m;
}

FeatureMatrix csts_zdt_matrix(const SubstrateGraph& g, const TrainHistory& hist,
                              const Split& train_split, const WindowIndexer& idx,
                              WindowId n_windows, const std::vector<WindowLabel>& labels,
                              const std::string& env) {
  hist.require(train_split);
  const auto by_start = labels_by_start(labels, Task::ZDT);
  const auto buckets = bucket_edges(g, idx);
  FeatureMatrix m;
  m.pipeline = "csts";
  m.task = "ZDT";
  m.env = env;
  m.feature_names = csts_zdt_feature_names();
  m.split_fingerprint = hist.split_fingerprint();
  m.history_fingerprint = hist.fingerprint();

  static const std::vector<std::size_t> kNone;
  for (WindowId w = 0; w < n_windows; ++w) {
    auto it = buckets.find(w);
    const auto& edge_ids = it == buckets.end() ? kNone : it->second;
    std::map<std::string, std::set<std::string>> ext_of;
    std::map<std::string, std::set<std::string>> hosts_at;
    std::set<std::string> externals;
    double conns = 0, fresh = 0, rarity = 0;
    for (auto i : edge_ids) {
      const auto& r = g.edges()[i];
      if (r.type != RelationshipType::ConnectsTo) continue;
      ++conns;
      if (!hist.seen(key_of(r))) ++fresh;
      rarity += hist.edge_rarity(key_of(r));
      ext_of[r.src].insert(r.dst);
      hosts_at[r.dst].insert(r.src);
      externals.insert(r.dst);
    }
    // Two-hop reach of the busiest source: externals of hosts that share an
    // external with it (ties broken by canonical id).
    std::string busiest;
    std::size_t max_out = 0;
    for (const auto& [h, exts] : ext_of) {
      if (exts.size() > max_out) {
        max_out = exts.size();
        busiest = h;
      }
    }
    std::set<std::string> reach;
    if (!busiest.empty()) {
      for (const auto& x : ext_of[busiest]) {
        for (const auto& peer : hosts_at[x]) {
          if (peer == busiest) continue;
          for (const auto& x2 : ext_of[peer]) {
            if (!ext_of[busiest].count(x2)) reach.insert(x2);
          }
        }
      }
    }
    WindowFeatureRow row;
    row.window_id = w;
    row.env = env;
    row.label = window_label(by_start, idx.start(w));
    const bool empty = conns == 0;
    row.values = {conns,
                  static_cast<double>(externals.size()),
                  static_cast<double>(max_out),
                  fresh,
                  empty ? 0.0 : fresh / conns,
                  empty ? 0.0 : rarity / conns,
                  static_cast<double>(reach.size()),
                  empty ? 1.0 : 0.0,
                  empty ? 1.0 : 0.0};
    m.rows.push_back(std::move(row));
  }
  return m;
}

}  // namespace csts
