#include "support.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "csts/error.hpp"
#include "csts/features.hpp"
#include "csts/graph_io.hpp"
#include "csts/identity.hpp"
#include "csts/metrics.hpp"
#include "csts/viability.hpp"

namespace csts::testing {

std::string scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "csts-tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

CanonicalEntity make_entity(const std::string& id, EntityType type, Timestamp from,
                            std::optional<Timestamp> to) {
  CanonicalEntity e;
  e.id = id;
  e.type = type;
  e.validity = {from, to};
  e.source_meta = {{"fixture", {"fixture"}}};
  return e;
}

CanonicalRelationship make_edge(const std::string& src, const std::string& dst,
                                RelationshipType type, Timestamp t, double confidence,
                                const std::string& source) {
  CanonicalRelationship r;
  r.src = src;
  r.dst = dst;
  r.type = type;
  r.time = Interval::point(t);
  r.provenance = {source, t, Interval::point(t), confidence, {"fixture:" + source}};
  return r;
}

namespace {

constexpr std::array<EntityType, 5> kUniverse = {EntityType::User, EntityType::Host,
                                                 EntityType::Process, EntityType::File,
                                                 EntityType::ExternalEntity};

std::vector<RelationshipType> admitted_types(EntityType s, EntityType d) {
  std::vector<RelationshipType> out;
  for (auto t : kAllRelationshipTypes) {
    if (signature_admits(t, s, d)) out.push_back(t);
  }
  return out;
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

std::optional<Interval> overlap(const CanonicalEntity& a, const CanonicalEntity& b) {
  return a.validity.intersect(b.validity);
}

Timestamp draw_in(std::mt19937_64& rng, const Interval& i, Timestamp horizon) {
  const Timestamp hi = i.end ? *i.end : std::max(i.start, horizon);
  return std::uniform_int_distribution<Timestamp>(i.start, hi)(rng);
}

}  // namespace

std::vector<GraphDelta> random_deltas(std::mt19937_64& rng, int n_entities, int n_edges,
                                      Timestamp horizon) {
  std::vector<CanonicalEntity> ents;
  for (int i = 0; i < n_entities; ++i) {
    const EntityType t = kUniverse[static_cast<std::size_t>(i) % kUniverse.size()];
    const Timestamp from = std::uniform_int_distribution<Timestamp>(0, horizon / 2)(rng);
    std::optional<Timestamp> to;
    if (rng() % 3 == 0) to = from + std::uniform_int_distribution<Timestamp>(horizon / 4, horizon)(rng);
    ents.push_back(make_entity(fmt::format("{}:e{:03d}", id_prefix(t), i), t, from, to));
  }
  struct Planned {
    Timestamp at;
    CanonicalRelationship r;
  };
  std::vector<Planned> plan;
  for (int k = 0, tries = 0; k < n_edges && tries < 20 * n_edges + 20; ++tries) {
    const auto& s = pick(rng, ents);
    const auto& d = pick(rng, ents);
    auto ov = overlap(s, d);
    if (!ov) continue;
    auto types = admitted_types(s.type, d.type);
    const Timestamp t = draw_in(rng, *ov, horizon);
    const double conf = std::uniform_int_distribution<int>(0, 10)(rng) / 10.0;
    plan.push_back({t, make_edge(s.id, d.id, pick(rng, types), t, conf,
                                 rng() % 2 ? "edr" : "siem")});
    ++k;
  }
  std::stable_sort(plan.begin(), plan.end(),
                   [](const Planned& a, const Planned& b) { return a.at < b.at; });
  std::vector<GraphDelta> out;
  GraphDelta first;
  first.at = 0;
  first.entity_upserts = ents;
  out.push_back(first);
  for (const auto& p : plan) {
    if (!out.back().edge_inserts.empty() && out.back().at == p.at && rng() % 2) {
      out.back().edge_inserts.push_back(p.r);
    } else {
      GraphDelta d;
      d.at = p.at;
      d.edge_inserts.push_back(p.r);
      out.push_back(d);
    }
  }
  return out;
}

SubstrateGraph random_graph(std::mt19937_64& rng, int n_entities, int n_edges, Timestamp horizon) {
  return replay(random_deltas(rng, n_entities, n_edges, horizon));
}

double brute_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return pairs == 0 ? 0.0 : wins / pairs;
}

std::pair<double, double> brute_best_f1(const std::vector<double>& s, const std::vector<int>& y) {
  // F1 = 2tp / (2tp + fp + fn) compared as exact fractions.
  long best_num = 0, best_den = 1;
  double best_thr = 0;
  for (int k = 0; k <= 20; ++k) {
    const double thr = static_cast<double>(k) / 20;
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const bool pred = s[i] >= thr;
      tp += pred && y[i];
      fp += pred && !y[i];
      fn += !pred && y[i];
    }
    const long num = 2 * tp, den = std::max(1L, 2 * tp + fp + fn);
    if (num * best_den > best_num * den) {
      best_num = num;
      best_den = den;
      best_thr = thr;
    }
  }
  return {static_cast<double>(best_num) / static_cast<double>(best_den), best_thr};
}

PropertyOutcome check_metric_oracles(std::uint64_t seed, int instances) {
  PropertyOutcome out;
  std::mt19937_64 rng(seed);
  for (int inst = 0; inst < instances; ++inst) {
    const int n = std::uniform_int_distribution<int>(1, 50)(rng);
    const double p_pos = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    const bool gridded = rng() % 2;
    std::vector<double> s(n);
    std::vector<int> y(n);
    Eigen::VectorXd es(n), ey(n);
    for (int i = 0; i < n; ++i) {
      s[i] = gridded ? std::uniform_int_distribution<int>(0, 20)(rng) / 20.0
                     : std::uniform_real_distribution<double>(0, 1)(rng);
      y[i] = std::bernoulli_distribution(p_pos)(rng);
      es(i) = s[i];
      ey(i) = y[i];
    }
    ++out.cases;
    bool degenerate = false;
    const double a = auroc(es, ey, &degenerate);
    const bool one_class = std::all_of(y.begin(), y.end(), [&](int v) { return v == y[0]; });
    if (one_class) {
      if (!degenerate || a != 0.0) out.fail(fmt::format("instance {}: one class not flagged", inst));
    } else if (a != brute_auroc(s, y)) {
      out.fail(fmt::format("instance {}: auroc {} vs brute {}", inst, a, brute_auroc(s, y)));
    }
    if (!one_class) {
      const Eigen::VectorXd neg = -es;
      const auto order_pos = detail::ascending_order(es);
      const auto order_neg = detail::ascending_order(neg);
      auto [num_p, pairs_p] = detail::auroc_counts(es, ey, order_pos, nullptr);
      auto [num_n, pairs_n] = detail::auroc_counts(neg, ey, order_neg, nullptr);
      if (num_p + num_n != 2 * pairs_p || pairs_p != pairs_n ||
          std::abs(auroc(es, ey) + auroc(neg, ey) - 1.0) > 1e-12) {
        out.fail(fmt::format("instance {}: complement broken", inst));
      }
    }
    const auto sweep = best_f1_sweep(es, ey);
    const auto [bf, bt] = brute_best_f1(s, y);
    if (std::abs(sweep.best_f1 - bf) > 1e-12 || sweep.best_threshold != bt) {
      out.fail(fmt::format("instance {}: sweep ({}, {}) vs brute ({}, {})", inst, sweep.best_f1,
                           sweep.best_threshold, bf, bt));
    }
    if (sweep.best_f1 + 1e-12 < confusion_at(es, ey, 0.5).f1()) {
      out.fail(fmt::format("instance {}: sweep below F1@0.5", inst));
    }
  }
  return out;
}

PropertyOutcome check_bootstrap_determinism(std::uint64_t seed) {
  PropertyOutcome out;
  std::mt19937_64 rng(seed);
  for (int inst = 0; inst < 10; ++inst) {
    const int n = 80;
    Eigen::VectorXd s(n), y(n);
    for (int i = 0; i < n; ++i) {
      y(i) = i % 4 == 0;
      s(i) = std::uniform_real_distribution<double>(0, 1)(rng) + 0.3 * y(i);
    }
    for (auto m : {BootstrapMetric::Auroc, BootstrapMetric::F1At05, BootstrapMetric::BestF1}) {
      ++out.cases;
      const auto a = bootstrap_ci(s, y, m, 200, seed + inst);
      const auto b = bootstrap_ci(s, y, m, 200, seed + inst);
      if (a.lo != b.lo || a.hi != b.hi || a.resamples != b.resamples || a.skipped != b.skipped) {
        out.fail(fmt::format("instance {}: bootstrap differs between runs", inst));
      }
    }
  }
  return out;
}

namespace {

template <typename F>
PropertyOutcome for_cases(std::uint64_t seed, int cases, F&& body) {
  PropertyOutcome out;
  std::mt19937_64 rng(seed);
  for (int c = 0; c < cases; ++c) {
    ++out.cases;
    try {
      body(rng, c, out);
    } catch (const std::exception& e) {
      out.fail(fmt::format("case {}: unexpected {}", c, e.what()));
    }
  }
  return out;
}

bool rejects(const std::function<void()>& f, ErrorCode code) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

Timestamp last_at(const SubstrateGraph& g) {
  return g.delta_log().empty() ? 0 : g.delta_log().back().at;
}

}  // namespace

PropertyOutcome check_replay_determinism(std::uint64_t seed, int cases) {
  return for_cases(seed, cases, [](std::mt19937_64& rng, int c, PropertyOutcome& out) {
    const auto deltas = random_deltas(rng, 8, 14);
    const SubstrateGraph g = replay(deltas);
    if (!(replay(g.delta_log()) == g)) out.fail(fmt::format("case {}: replay differs", c));
    std::stringstream ss;
    write_delta_log(ss, g);
    if (!(replay(read_delta_log(ss)) == g)) out.fail(fmt::format("case {}: JSONL replay differs", c));
    const Timestamp t = deltas[deltas.size() / 2].at;
    const SubstrateGraph snap = snapshot_at(g, t);
    for (const auto& d : snap.delta_log()) {
      if (d.at > t) out.fail(fmt::format("case {}: snapshot holds a later delta", c));
    }
  });
}

PropertyOutcome check_signature_soundness(std::uint64_t seed, int cases) {
  return for_cases(seed, cases, [](std::mt19937_64& rng, int c, PropertyOutcome& out) {
    SubstrateGraph g = random_graph(rng, 8, 6);
    std::vector<const CanonicalEntity*> ents;
    for (const auto& [id, e] : g.entities()) ents.push_back(&e);
    const auto* s = pick(rng, ents);
    const auto* d = pick(rng, ents);
    const auto rel = kAllRelationshipTypes[rng() % kAllRelationshipTypes.size()];
    auto ov = overlap(*s, *d);
    if (!ov || (ov->end && *ov->end < last_at(g))) return;
    const Timestamp t = std::max(last_at(g), draw_in(rng, *ov, 10'000));
    if (!ov->contains(t)) return;
    GraphDelta delta;
    delta.at = t;
    delta.edge_inserts.push_back(make_edge(s->id, d->id, rel, t));
    const SubstrateGraph before = g;
    const bool admitted = signature_admits(rel, s->type, d->type);
    if (admitted) {
      g.apply(delta);
    } else if (!rejects([&] { g.apply(delta); }, ErrorCode::SignatureViolation) || !(g == before)) {
      out.fail(fmt::format("case {}: {} accepted or graph changed", c, to_string(rel)));
    }
    for (const auto& r : g.edges()) {
      if (!signature_admits(r.type, g.find(r.src)->type, g.find(r.dst)->type)) {
        out.fail(fmt::format("case {}: graph holds an inadmissible edge", c));
      }
    }
  });
}

PropertyOutcome check_temporal_containment(std::uint64_t seed, int cases) {
  return for_cases(seed, cases, [](std::mt19937_64& rng, int c, PropertyOutcome& out) {
    SubstrateGraph g = random_graph(rng, 8, 6);
    std::vector<const CanonicalEntity*> ents;
    for (const auto& [id, e] : g.entities()) ents.push_back(&e);
    const auto* s = pick(rng, ents);
    const auto* d = pick(rng, ents);
    const auto types = admitted_types(s->type, d->type);
    const Timestamp t =
        std::max(last_at(g), std::uniform_int_distribution<Timestamp>(-5'000, 25'000)(rng));
    GraphDelta delta;
    delta.at = t;
    delta.edge_inserts.push_back(make_edge(s->id, d->id, pick(rng, types), t));
    const bool inside = s->validity.contains(t) && d->validity.contains(t);
    const SubstrateGraph before = g;
    if (inside) {
      g.apply(delta);
    } else if (!rejects([&] { g.apply(delta); }, ErrorCode::TemporalMisalignment) ||
               !(g == before)) {
      out.fail(fmt::format("case {}: edge at {} outside validity accepted", c, t));
    }
    for (const auto& r : g.edges()) {
      if (!g.find(r.src)->validity.contains(r.time) || !g.find(r.dst)->validity.contains(r.time)) {
        out.fail(fmt::format("case {}: edge outside endpoint validity", c));
      }
    }
  });
}

PropertyOutcome check_lifecycle_monotonicity(std::uint64_t seed, int cases) {
  return for_cases(seed, cases, [](std::mt19937_64& rng, int c, PropertyOutcome& out) {
    CanonicalEntity e = make_entity("host:x", EntityType::Host);
    Timestamp last = kMinTime;
    for (int step = 0; step < 6; ++step) {
      const auto to = static_cast<LifecycleState>(rng() % 4);
      const Timestamp at = std::uniform_int_distribution<Timestamp>(0, 100)(rng);
      const int from_rank = static_cast<int>(e.lifecycle.state);
      const bool legal = static_cast<int>(to) == from_rank + 1 && at >= last;
      const auto before = e.lifecycle;
      try {
        transition_lifecycle(e, to, at);
        if (!legal) out.fail(fmt::format("case {}: illegal transition accepted", c));
        last = at;
      } catch (const Error&) {
        if (legal) out.fail(fmt::format("case {}: legal transition rejected", c));
        if (!(e.lifecycle == before)) out.fail(fmt::format("case {}: rejected transition mutated", c));
      }
    }
    const auto& log = e.lifecycle.transitions;
    for (std::size_t i = 0; i < log.size(); ++i) {
      if (static_cast<int>(log[i].to) != static_cast<int>(log[i].from) + 1 ||
          (i > 0 && (log[i].at < log[i - 1].at || log[i].from != log[i - 1].to))) {
        out.fail(fmt::format("case {}: transition log is not a forward walk", c));
      }
    }
    if (!validate_entity(e, default_attribute_schema()).ok()) {
      out.fail(fmt::format("case {}: entity invalid after transitions", c));
    }
  });
}

PropertyOutcome check_parallel_edges(std::uint64_t seed, int cases) {
  return for_cases(seed, cases, [](std::mt19937_64& rng, int c, PropertyOutcome& out) {
    SubstrateGraph g = random_graph(rng, 6, 8);
    if (g.edges().empty()) return;
    CanonicalRelationship r = pick(rng, g.edges());
    const Timestamp t = last_at(g);
    if (!g.find(r.src)->validity.contains(t) || !g.find(r.dst)->validity.contains(t)) return;
    r.time = Interval::point(t);
    const std::size_t before = g.edges().size();
    const int k = std::uniform_int_distribution<int>(1, 4)(rng);
    GraphDelta d;
    d.at = t;
    for (int i = 0; i < k; ++i) d.edge_inserts.push_back(r);
    g.apply(d);
    const auto n_same = std::count(g.edges().begin(), g.edges().end(), r);
    if (g.edges().size() != before + static_cast<std::size_t>(k) || n_same < k) {
      out.fail(fmt::format("case {}: {} parallel edges collapsed", c, k));
    }
  });
}

PropertyOutcome check_merge_conservation(std::uint64_t seed, int cases) {
  return for_cases(seed, cases, [](std::mt19937_64& rng, int c, PropertyOutcome& out) {
    const SubstrateGraph g = random_graph(rng, 10, 12);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& [a, ea] : g.entities()) {
      for (const auto& [b, eb] : g.entities()) {
        if (a != b && ea.type == eb.type) pairs.emplace_back(a, b);
      }
    }
    if (pairs.empty()) return;
    const auto [keep, absorb] = pick(rng, pairs);
    const SubstrateGraph m = merge_identities(g, keep, absorb, last_at(g));
    if (m.edges().size() != g.edges().size()) {
      out.fail(fmt::format("case {}: merge changed the edge count", c));
      return;
    }
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
      const auto &o = g.edges()[i], &n = m.edges()[i];
      auto mapped = [&](const std::string& id) { return id == absorb ? keep : id; };
      if (n.src != mapped(o.src) || n.dst != mapped(o.dst) || n.type != o.type ||
          n.time != o.time || n.src == absorb || n.dst == absorb) {
        out.fail(fmt::format("case {}: edge {} not conserved", c, i));
      }
    }
    const auto* k = m.find(keep);
    const auto* a = m.find(absorb);
    if (!a || a->lifecycle.state != LifecycleState::Retired ||
        !k->validity.contains(g.find(keep)->validity) ||
        !k->validity.contains(g.find(absorb)->validity)) {
      out.fail(fmt::format("case {}: merged entity state wrong", c));
    }
    if (!(replay(m.delta_log()) == m)) out.fail(fmt::format("case {}: merge not replayable", c));
    if (!rejects([&] { merge_identities(g, keep, keep, 0); }, ErrorCode::TypeMismatch)) {
      out.fail(fmt::format("case {}: self merge accepted", c));
    }
  });
}

PropertyOutcome check_construct_containment(std::uint64_t seed, int cases) {
  return for_cases(seed, cases, [](std::mt19937_64& rng, int c, PropertyOutcome& out) {
    const SubstrateGraph g = random_graph(rng, 14, 40);
    ConstructionPolicy eta;
    eta.hops = static_cast<int>(rng() % 3);
    eta.max_nodes = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    if (rng() % 3 == 0) eta.min_confidence = 0.5;
    if (rng() % 3 == 0) eta.rel_types = {RelationshipType::AssociatedWith, RelationshipType::Owns};
    const Timestamp a = std::uniform_int_distribution<Timestamp>(0, 8'000)(rng);
    const Interval tau{a, a + std::uniform_int_distribution<Timestamp>(0, 6'000)(rng)};
    LearningObject o;
    if (rng() % 2 == 0 || g.edges().empty()) {
      std::vector<std::string> ids;
      for (const auto& [id, e] : g.entities()) ids.push_back(id);
      const std::string focal = pick(rng, ids);
      o = construct(g, FocalQuery::of_entity(focal), tau, eta);
      if (o.entities.size() > eta.max_nodes || !o.entities.count(focal)) {
        out.fail(fmt::format("case {}: entity object exceeds k or lost its focal", c));
      }
      if ((eta.hops == 0) != (o.cls == ObjectClass::EntityState)) {
        out.fail(fmt::format("case {}: wrong object class", c));
      }
    } else {
      const std::size_t e = std::uniform_int_distribution<std::size_t>(0, g.edges().size() - 1)(rng);
      if (!tau.contains(g.edges()[e].time)) {
        if (!rejects([&] { construct(g, FocalQuery::of_edge(e), tau, eta); },
                     ErrorCode::EmptySupport)) {
          out.fail(fmt::format("case {}: edge outside tau accepted", c));
        }
        return;
      }
      o = construct(g, FocalQuery::of_edge(e), tau, eta);
      if (o.entities.size() > 2 * eta.max_nodes) {
        out.fail(fmt::format("case {}: interaction object exceeds 2k", c));
      }
    }
    const auto v = check_containment(o, g);
    if (!v.ok()) out.fail(fmt::format("case {}: {}", c, v.violations.front().message));
    for (const auto& e : o.edges) {
      // An interaction object always carries its own focal edge.
      if (o.focal.edge == e.ref) continue;
      if (e.rel.provenance.confidence < eta.min_confidence) {
        out.fail(fmt::format("case {}: confidence filter ignored", c));
      }
    }
    if (!rejects([&] { construct(g, FocalQuery::of_entity("host:nobody"), tau, eta); },
                 ErrorCode::UnknownFocal)) {
      out.fail(fmt::format("case {}: unknown focal accepted", c));
    }
  });
}

PropertyOutcome check_motif_bruteforce(std::uint64_t seed, int cases) {
  return for_cases(seed, cases, [](std::mt19937_64& rng, int c, PropertyOutcome& out) {
    GraphDelta d;
    d.at = 0;
    const int n_proc = 3, n_file = 6;
    for (int i = 0; i < n_proc; ++i) {
      d.entity_upserts.push_back(make_entity(fmt::format("process:p{}", i), EntityType::Process));
    }
    for (int i = 0; i < n_file; ++i) {
      d.entity_upserts.push_back(make_entity(fmt::format("file:f{}", i), EntityType::File));
    }
    const int n_edges = std::uniform_int_distribution<int>(0, 50)(rng);
    for (int i = 0; i < n_edges; ++i) {
      const auto type = rng() % 4 == 0 ? RelationshipType::Reads : RelationshipType::Writes;
      const Timestamp t = std::uniform_int_distribution<Timestamp>(0, 600)(rng);
      d.edge_inserts.push_back(make_edge(fmt::format("process:p{}", rng() % n_proc),
                                         fmt::format("file:f{}", rng() % n_file), type, t));
    }
    SubstrateGraph g;
    g.apply(d);
    const int n = std::uniform_int_distribution<int>(2, 3)(rng);
    const Timestamp within = std::uniform_int_distribution<Timestamp>(10, 200)(rng);
    const Timestamp lo = std::uniform_int_distribution<Timestamp>(0, 200)(rng);
    const Interval window{lo, lo + std::uniform_int_distribution<Timestamp>(100, 600)(rng)};
    const auto got = match_motif(g, write_cascade(n, within), window);

    std::map<std::string, Timestamp> expected;  // anchor -> earliest qualifying start
    for (int p = 0; p < n_proc; ++p) {
      const std::string pid = fmt::format("process:p{}", p);
      std::vector<std::size_t> cand;
      for (std::size_t i = 0; i < g.edges().size(); ++i) {
        const auto& r = g.edges()[i];
        if (r.src == pid && r.type == RelationshipType::Writes && window.contains(r.time)) {
          cand.push_back(i);
        }
      }
      std::optional<Timestamp> best;
      std::vector<std::size_t> combo;
      std::function<void(std::size_t)> rec = [&](std::size_t from) {
        if (static_cast<int>(combo.size()) == n) {
          std::set<std::string> targets;
          Timestamp mn = std::numeric_limits<Timestamp>::max(), mx = kMinTime;
          for (auto i : combo) {
            targets.insert(g.edges()[i].dst);
            mn = std::min(mn, g.edges()[i].time.start);
            mx = std::max(mx, g.edges()[i].time.start);
          }
          if (static_cast<int>(targets.size()) == n && mx - mn <= within && (!best || mn < *best)) {
            best = mn;
          }
          return;
        }
        for (std::size_t k = from; k < cand.size(); ++k) {
          combo.push_back(cand[k]);
          rec(k + 1);
          combo.pop_back();
        }
      };
      rec(0);
      if (best) expected[pid] = *best;
    }
    if (got.size() != expected.size()) {
      out.fail(fmt::format("case {}: {} bindings vs {} by enumeration", c, got.size(),
                           expected.size()));
      return;
    }
    for (const auto& o : got) {
      auto it = expected.find(o.focal.entity);
      if (it == expected.end()) {
        out.fail(fmt::format("case {}: spurious anchor {}", c, o.focal.entity));
        continue;
      }
      std::set<std::size_t> refs, want;
      std::set<std::string> targets;
      for (const auto& e : o.edges) refs.insert(e.ref);
      for (std::size_t i = 0; i < g.edges().size(); ++i) {
        const auto& r = g.edges()[i];
        if (r.src == it->first && r.type == RelationshipType::Writes && window.contains(r.time) &&
            r.time.start >= it->second && r.time.start <= it->second + within) {
          want.insert(i);
          targets.insert(r.dst);
        }
      }
      const std::vector<std::string> bound(o.focal.binding.begin() + 1, o.focal.binding.end());
      if (o.support.start != it->second || refs != want ||
          bound != std::vector<std::string>(targets.begin(), targets.end())) {
        out.fail(fmt::format("case {}: binding for {} differs from enumeration", c, it->first));
      }
    }
  });
}

ViewFixture view_fixture() {
  GraphDelta d;
  d.at = 0;
  d.entity_upserts = {make_entity("user:alice", EntityType::User),
                      make_entity("host:h1", EntityType::Host),
                      make_entity("host:h2", EntityType::Host),
                      make_entity("process:cmd", EntityType::Process)};
  d.edge_inserts = {
      make_edge("user:alice", "host:h1", RelationshipType::AuthenticatesTo, 100, 0.9, "edr"),
      make_edge("user:alice", "host:h2", RelationshipType::AuthenticatesTo, 200, 0.6, "siem"),
      make_edge("user:alice", "process:cmd", RelationshipType::Executes, 300, 1.0, "edr")};
  ViewFixture f;
  f.graph.apply(d);
  ConstructionPolicy eta;
  eta.hops = 1;
  f.original = construct(f.graph, FocalQuery::of_entity("user:alice"), {0, 1000}, eta);
  return f;
}

std::vector<std::pair<std::string, LearningObject>> single_violation_candidates(
    const ViewFixture& f) {
  ViewTransform mask;
  mask.kind = ViewTransform::Kind::AttributeMask;
  mask.attributes = {"focal_in"};
  const LearningObject base = transform_view(f.original, mask, 0);
  std::vector<std::pair<std::string, LearningObject>> out;

  LearningObject focal = base;
  focal.focal.entity = "user:mallory";
  out.emplace_back("focal-identity", focal);

  LearningObject sig = base;
  sig.entities["process:cmd"].type = EntityType::File;
  out.emplace_back("signature", sig);

  LearningObject support = base;
  support.support.start -= 10;
  out.emplace_back("support", support);

  LearningObject prov = base;
  prov.edges.front().rel.provenance.lineage.clear();
  out.emplace_back("provenance", prov);

  LearningObject adm = base;
  std::erase_if(adm.edges, [](const ObjectEdge& e) {
    return e.rel.type == RelationshipType::AuthenticatesTo;
  });
  out.emplace_back("admissibility", adm);
  return out;
}

PropertyOutcome check_view_constraints() {
  PropertyOutcome out;
  const ViewFixture f = view_fixture();
  for (const auto& [code, cand] : single_violation_candidates(f)) {
    ++out.cases;
    const auto v = validate_view(f.original, cand);
    if (v.violations.size() != 1 || v.violations.front().code != code) {
      std::string got;
      for (const auto& x : v.violations) got += x.code + ";";
      out.fail(fmt::format("{} fixture reported [{}]", code, got));
    }
  }
  // Admissible transforms pass the gate.
  std::vector<ViewTransform> ok(4);
  ok[0].kind = ViewTransform::Kind::AttributeMask;
  ok[0].attributes = {"count:EXECUTES"};
  ok[1].kind = ViewTransform::Kind::SourceOmission;
  ok[1].source = "siem";
  ok[2].kind = ViewTransform::Kind::TemporalOffset;
  ok[2].trim_start = 50;
  ok[3].kind = ViewTransform::Kind::ConfidencePrune;
  ok[3].min_confidence = 0.7;
  for (const auto& v : ok) {
    ++out.cases;
    try {
      apply_view(f.original, v, 7);
    } catch (const Error& e) {
      out.fail(v.describe() + " rejected: " + e.what());
    }
  }
  // Pruning every AUTHENTICATES_TO edge is refused at the gate.
  ++out.cases;
  ViewTransform prune;
  prune.kind = ViewTransform::Kind::ConfidencePrune;
  prune.min_confidence = 0.95;
  if (!rejects([&] { apply_view(f.original, prune, 7); }, ErrorCode::InadmissibleView)) {
    out.fail("inadmissible confidence prune accepted");
  }
  return out;
}

std::vector<LearningObject> hard_negative_fixture() {
  GraphDelta d;
  d.at = 0;
  for (int h = 0; h < 20; ++h) {
    d.entity_upserts.push_back(make_entity(fmt::format("host:h{:02d}", h), EntityType::Host));
    d.entity_upserts.push_back(make_entity(fmt::format("file:f{:02d}", h), EntityType::File));
  }
  d.entity_upserts.push_back(make_entity("user:plant", EntityType::User));
  d.entity_upserts.push_back(make_entity("process:plant", EntityType::Process));
  for (int i = 0; i < 5; ++i) {
    d.edge_inserts.push_back(make_edge("user:plant", fmt::format("host:h{:02d}", i),
                                       RelationshipType::AuthenticatesTo, 10 + i));
    d.edge_inserts.push_back(make_edge("process:plant", fmt::format("file:f{:02d}", i),
                                       RelationshipType::Writes, 10 + i));
  }
  std::vector<int> sizes;
  for (int s = 1; s <= 19; ++s) {
    if (s != 5) sizes.push_back(s);
  }
  for (std::size_t u = 0; u < sizes.size(); ++u) {
    const std::string id = fmt::format("user:u{:02d}", u);
    d.entity_upserts.push_back(make_entity(id, EntityType::User));
    for (int h = 0; h < sizes[u]; ++h) {
      d.edge_inserts.push_back(make_edge(id, fmt::format("host:h{:02d}", h),
                                         RelationshipType::AuthenticatesTo, 10 + h));
    }
  }
  SubstrateGraph g;
  g.apply(d);
  ConstructionPolicy eta;
  eta.hops = 1;
  const Interval tau{0, 100};
  std::vector<LearningObject> out;
  out.push_back(construct(g, FocalQuery::of_entity("user:plant"), tau, eta));
  out.push_back(construct(g, FocalQuery::of_entity("process:plant"), tau, eta));
  for (std::size_t u = 0; u < sizes.size(); ++u) {
    out.push_back(construct(g, FocalQuery::of_entity(fmt::format("user:u{:02d}", u)), tau, eta));
  }
  return out;
}

PropertyOutcome check_hard_negative_recovery() {
  PropertyOutcome out;
  const auto objects = hard_negative_fixture();
  out.cases = static_cast<long>(objects.size());
  if (objects.size() != 20) out.fail("fixture is not 20 objects");
  const auto hard = pair_policy(objects, std::nullopt, PairPolicy::HardNegative);
  if (std::find(hard.begin(), hard.end(), ObjectPair{0, 1}) == hard.end()) {
    out.fail(fmt::format("planted pair missing from {} hard negatives", hard.size()));
  }
  if (summary_vector(objects[0]) != summary_vector(objects[1])) {
    out.fail("planted pair summaries differ");
  }
  const auto positives = pair_policy(objects, std::nullopt, PairPolicy::Positive);
  if (!positives.empty()) out.fail("distinct originals paired as positives");
  return out;
}

PropertyOutcome check_split_guard() {
  PropertyOutcome out;
  std::mt19937_64 rng(5);
  const SubstrateGraph g = random_graph(rng, 10, 30);
  const WindowIndexer idx{0, 1800};
  const Split a = time_split("EnvA", 10, 0.7, idx);
  const Split b = time_split("EnvA", 10, 0.5, idx);
  const Split other_env = time_split("EnvB", 10, 0.7, idx);
  const TrainHistory hist = TrainHistory::fit(g, a);
  auto expect = [&](const char* what, const std::function<void()>& f, ErrorCode code) {
    ++out.cases;
    if (!rejects(f, code)) out.fail(std::string(what) + " not rejected");
  };
  expect("different split", [&] { hist.require(b); }, ErrorCode::SplitMismatch);
  expect("different environment", [&] { hist.require(other_env); }, ErrorCode::SplitMismatch);
  expect("unfitted history", [&] { TrainHistory{}.require(a); }, ErrorCode::UnfittedHistory);
  expect("matrix over a foreign split",
         [&] { csts_lm_matrix(g, hist, b, idx, 10, {}, "EnvA"); }, ErrorCode::SplitMismatch);
  expect("zdt matrix over a foreign split",
         [&] { csts_zdt_matrix(g, hist, b, idx, 10, {}, "EnvA"); }, ErrorCode::SplitMismatch);
  ++out.cases;
  try {
    hist.require(a);
  } catch (const Error& e) {
    out.fail(std::string("matching split rejected: ") + e.what());
  }
  return out;
}

PropertyOutcome check_threshold_independence(std::uint64_t seed, int cases) {
  return for_cases(seed, cases, [](std::mt19937_64& rng, int c, PropertyOutcome& out) {
    ViabilitySettings s;
    s.q = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    std::vector<double> train(std::uniform_int_distribution<std::size_t>(1, 200)(rng));
    for (auto& x : train) x = std::uniform_real_distribution<double>(0, 6)(rng);
    std::vector<double> test(std::uniform_int_distribution<std::size_t>(0, 50)(rng));
    for (auto& x : test) x = std::uniform_real_distribution<double>(0, 6)(rng);
    const auto r1 = threshold_report(train, test, s);
    std::vector<double> mutated(std::uniform_int_distribution<std::size_t>(0, 80)(rng));
    for (auto& x : mutated) x = std::uniform_real_distribution<double>(-100, 100)(rng);
    const auto r2 = threshold_report(train, mutated, s);
    if (r1.tau != r2.tau || r1.train_windows_above != r2.train_windows_above ||
        r1.tau != quantile(train, s.q)) {
      out.fail(fmt::format("case {}: tau moved with test scores", c));
    }
    // Same through the token protocol: rewriting test windows leaves tau alone.
    TrainHistory hist;
    std::vector<WindowTokens> tr(5), te(5);
    for (int w = 0; w < 5; ++w) {
      tr[w].window_id = w;
      te[w].window_id = w;
      for (int k = 0; k < 4; ++k) {
        const std::string tok = fmt::format("process:t{}", rng() % 6);
        hist.add_token(Channel::Process, tok);
        tr[w].tokens[0].push_back(tok);
        te[w].tokens[0].push_back(fmt::format("process:t{}", rng() % 9));
      }
    }
    hist.mark_fitted("fixture");
    const auto p1 = viability_protocol(tr, te, hist, s);
    for (auto& w : te) w.tokens[0] = {fmt::format("process:novel{}", rng())};
    const auto p2 = viability_protocol(tr, te, hist, s);
    if (p1.tau != p2.tau) out.fail(fmt::format("case {}: protocol tau moved", c));
  });
}

}  // namespace csts::testing
