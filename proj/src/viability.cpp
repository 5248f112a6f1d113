#include "csts/viability.hpp"

#include <algorithm>

#include "csts/metrics.hpp"

namespace csts {

using nlohmann::json;

bool WindowTokens::empty(const std::set<Channel>& channels) const {
  for (auto c : channels) {
    if (!tokens[static_cast<int>(c)].empty()) return false;
  }
  return true;
}

std::vector<WindowTokens> window_tokens(const SubstrateGraph& g, const WindowIndexer& idx) {
  const auto buckets = bucket_edges(g, idx);
  std::vector<WindowTokens> out;
  if (buckets.empty()) return out;
  const WindowId first = buckets.begin()->first, last = buckets.rbegin()->first;
  for (WindowId w = first; w <= last; ++w) {
    WindowTokens t;
    t.window_id = w;
    if (auto it = buckets.find(w); it != buckets.end()) {
      for (auto i : it->second) {
        const auto& r = g.edges()[i];
        if (auto c = channel_of(r.type)) t.tokens[static_cast<int>(*c)].push_back(r.dst);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

TrainHistory fit_token_history(const SubstrateGraph& g, const WindowIndexer& idx) {
  Split all;
  all.env = "producer";
  all.indexer = idx;
  const auto buckets = bucket_edges(g, idx);
  if (!buckets.empty()) {
    all.train_begin = buckets.begin()->first;
    all.train_end = buckets.rbegin()->first + 1;
  }
  return TrainHistory::fit(g, all);
}

std::optional<double> novelty_score(const WindowTokens& w, const TrainHistory& hist,
                                    const std::set<Channel>& channels) {
  double total = 0;
  int used = 0;
  for (auto c : channels) {
    const auto& toks = w.tokens[static_cast<int>(c)];
    if (toks.empty()) continue;
    double s = 0;
    for (const auto& t : toks) s += hist.token_surprisal(c, t);
    total += s / static_cast<double>(toks.size());
    ++used;
  }
  if (used == 0) return std::nullopt;
  return total / used;
}

double train_threshold(const std::vector<double>& train_scores, double q) {
  return quantile(train_scores, q);
}

namespace {

ScoreSummary summarize(const std::vector<double>& v) {
  if (v.empty()) return {};
  return {quantile(v, 0.5), quantile(v, 0.9), *std::max_element(v.begin(), v.end())};
}

json summary_json(const ScoreSummary& s) {
  return json{{"p50", s.p50}, {"p90", s.p90}, {"max", s.max}};
}

}  // namespace

ViabilityReport threshold_report(const std::vector<double>& train_scores,
                                 const std::vector<double>& test_scores,
                                 const ViabilitySettings& s) {
  ViabilityReport r;
  r.window_minutes = s.window_minutes;
  r.q = s.q;
  r.gate = s.gate;
  r.n_train_windows = static_cast<int>(train_scores.size());
  r.n_test_windows = static_cast<int>(test_scores.size());
  r.tau = train_threshold(train_scores, s.q);
  for (double x : train_scores) r.train_windows_above += x > r.tau ? 1 : 0;
  for (double x : test_scores) r.test_windows_above += x > r.tau ? 1 : 0;
  r.train_summary = summarize(train_scores);
  r.test_summary = summarize(test_scores);
  r.viable = r.test_windows_above >= s.gate;
  return r;
}

ViabilityReport viability_protocol(const std::vector<WindowTokens>& train,
                                   const std::vector<WindowTokens>& test,
                                   const TrainHistory& hist, const ViabilitySettings& s) {
  auto score_all = [&](const std::vector<WindowTokens>& windows, int& excluded) {
    std::vector<double> scores;
    for (const auto& w : windows) {
      if (auto v = novelty_score(w, hist, s.channels)) {
        scores.push_back(*v);
      } else {
        ++excluded;
      }
    }
    return scores;
  };
  int ex_train = 0, ex_test = 0;
  const auto train_scores = score_all(train, ex_train);
  const auto test_scores = score_all(test, ex_test);
  ViabilityReport r = threshold_report(train_scores, test_scores, s);
  r.excluded_train = ex_train;
  r.excluded_test = ex_test;
  auto rates = [&](const std::vector<WindowTokens>& windows) {
    std::map<std::string, double> out;
    for (auto c : s.channels) {
      int nonempty = 0;
      for (const auto& w : windows) nonempty += w.tokens[static_cast<int>(c)].empty() ? 0 : 1;
      out[std::string(to_string(c))] =
          windows.empty() ? 0.0 : static_cast<double>(nonempty) / static_cast<double>(windows.size());
    }
    return out;
  };
  r.train_nonempty = rates(train);
  r.test_nonempty = rates(test);
  return r;
}

json ViabilityReport::to_json() const {
  return json{{"window_minutes", window_minutes},
              {"q", q},
              {"gate", gate},
              {"n_train_windows", n_train_windows},
              {"n_test_windows", n_test_windows},
              {"excluded_train", excluded_train},
              {"excluded_test", excluded_test},
              {"train_threshold", tau},
              {"train_windows_above", train_windows_above},
              {"test_windows_above", test_windows_above},
              {"train_scores", summary_json(train_summary)},
              {"test_scores", summary_json(test_summary)},
              {"train_channel_nonempty", train_nonempty},
              {"test_channel_nonempty", test_nonempty},
              {"verdict", viable ? "viable" : "not-viable"}};
}

}  // namespace csts
