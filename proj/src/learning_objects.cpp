#include "csts/learning_objects.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <random>

#include <fmt/format.h>

#include "csts/error.hpp"
#include "csts/graph_io.hpp"
#include "csts/hash.hpp"
#include "csts/metrics.hpp"

namespace csts {

using nlohmann::json;

std::string_view to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::EntityState: return "entity-state";
    case ObjectClass::InteractionState: return "interaction-state";
    case ObjectClass::SubgraphState: return "subgraph-state";
    case ObjectClass::MotifState: return "motif-state";
  }
  return "?";
}

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::Tabular: return "tabular";
    case Modality::Temporal: return "temporal";
    case Modality::Graph: return "graph";
    case Modality::Provenance: return "provenance";
  }
  return "?";
}

bool MotifTemplate::connected() const {
  if (nodes.empty()) return false;
  std::vector<bool> seen(nodes.size(), false);
  std::queue<int> todo;
  todo.push(0);
  seen[0] = true;
  while (!todo.empty()) {
    int n = todo.front();
    todo.pop();
    for (const auto& e : edges) {
      for (auto [a, b] : {std::pair{e.src, e.dst}, std::pair{e.dst, e.src}}) {
        if (a == n && b >= 0 && b < static_cast<int>(nodes.size()) && !seen[b]) {
          seen[b] = true;
          todo.push(b);
        }
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
}

MotifTemplate write_cascade(int n, Timestamp within) {
  MotifTemplate t;
  t.name = fmt::format("write-cascade>={}/{}s", n, within);
  t.nodes = {{EntityType::Process, false}, {EntityType::File, true}};
  t.edges = {{0, 1, RelationshipType::Writes}};
  t.min_fanout = n;
  t.min_distinct_targets = n;
  t.max_duration = within;
  return t;
}

FocalQuery FocalQuery::of_entity(std::string id) {
  FocalQuery q;
  q.kind = Kind::Entity;
  q.entity = std::move(id);
  return q;
}

FocalQuery FocalQuery::of_edge(std::size_t edge_index) {
  FocalQuery q;
  q.kind = Kind::Edge;
  q.edge = edge_index;
  return q;
}

FocalQuery FocalQuery::of_motif(MotifTemplate t) {
  FocalQuery q;
  q.kind = Kind::Motif;
  q.motif = std::move(t);
  return q;
}

namespace {

std::string_view kind_name(FocalQuery::Kind k) {
  switch (k) {
    case FocalQuery::Kind::Entity: return "entity";
    case FocalQuery::Kind::Edge: return "edge";
    case FocalQuery::Kind::Motif: return "motif";
  }
  return "?";
}

std::vector<std::string> focal_entities(const LearningObject& o) {
  if (o.focal.kind == FocalQuery::Kind::Edge) {
    for (const auto& e : o.edges) {
      if (o.focal.edge && e.ref == *o.focal.edge) return {e.rel.src, e.rel.dst};
    }
    // The focal edge may have been dropped by a view; fall back to the binding.
    return o.focal.binding;
  }
  return {o.focal.entity};
}

void add_entity(LearningObject& o, const SubstrateGraph& g, const std::string& id) {
  const CanonicalEntity* e = g.find(id);
  if (!e) throw Error(ErrorCode::UnknownFocal, id);
  o.entities[id] = {e->type, e->source_meta.size()};
}

void add_edge(LearningObject& o, const SubstrateGraph& g, std::size_t ref) {
  if (std::any_of(o.edges.begin(), o.edges.end(), [&](const ObjectEdge& e) { return e.ref == ref; }))
    return;
  o.edges.push_back({ref, g.edges()[ref]});
}

void sort_edges(LearningObject& o) {
  std::sort(o.edges.begin(), o.edges.end(),
            [](const ObjectEdge& a, const ObjectEdge& b) { return a.ref < b.ref; });
}

bool admitted(const ConstructionPolicy& eta, const SubstrateGraph& g, std::size_t ref) {
  const auto& r = g.edges()[ref];
  if (!eta.rel_types.empty() && !eta.rel_types.count(r.type)) return false;
  if (r.provenance.confidence < eta.min_confidence) return false;
  if (!eta.entity_types.empty()) {
    for (const auto* id : {&r.src, &r.dst}) {
      const CanonicalEntity* e = g.find(*id);
      if (!e || !eta.entity_types.count(e->type)) return false;
    }
  }
  return true;
}

// Windowed summaries of the focal entities' incident edges inside `tau`.
void summarize(LearningObject& o, const SubstrateGraph& g, const std::vector<std::string>& focal,
               const Interval& tau, const ConstructionPolicy& eta) {
  std::map<std::string, double> f;
  std::set<std::string> neighbors;
  std::set<std::size_t> seen;
  double out = 0, in = 0;
  for (const auto& id : focal) {
    for (auto [list, outgoing] : {std::pair{&g.out_edges(id), true}, std::pair{&g.in_edges(id), false}}) {
      for (auto idx : *list) {
        const auto& r = g.edges()[idx];
        if (!tau.contains(r.time)) continue;
        if (!eta.rel_types.empty() && !eta.rel_types.count(r.type)) continue;
        (outgoing ? out : in) += 1;
        neighbors.insert(outgoing ? r.dst : r.src);
        if (seen.insert(idx).second) f["count:" + std::string(to_string(r.type))] += 1;
      }
    }
  }
  f["focal_out"] = out;
  f["focal_in"] = in;
  f["distinct_neighbors"] = static_cast<double>(neighbors.size());
  f["object_nodes"] = static_cast<double>(o.entities.size());
  f["object_edges"] = static_cast<double>(o.edges.size());
  o.features = std::move(f);
}

struct FanEdge {
  Timestamp t;
  std::size_t ref;
  std::string target;
};

}  // namespace

std::vector<LearningObject> match_motif(const SubstrateGraph& g, const MotifTemplate& t,
                                        const Interval& window) {
  if (!t.connected()) throw Error(ErrorCode::InvalidSpec, "motif pattern must be connected");
  int fan = -1;
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    if (t.nodes[i].fan) {
      if (fan >= 0) throw Error(ErrorCode::InvalidSpec, "motif allows one fan node");
      fan = static_cast<int>(i);
    }
  }
  if (fan == 0) throw Error(ErrorCode::InvalidSpec, "the anchor cannot be the fan node");
  const PatternEdge* fan_edge = nullptr;
  for (const auto& e : t.edges) {
    if (e.src == fan || e.dst == fan) {
      if (fan_edge) throw Error(ErrorCode::InvalidSpec, "fan node needs exactly one pattern edge");
      fan_edge = &e;
    }
  }

  auto edges_between = [&](const std::string& from, RelationshipType type, bool outgoing) {
    std::vector<std::size_t> out;
    for (auto idx : outgoing ? g.out_edges(from) : g.in_edges(from)) {
      const auto& r = g.edges()[idx];
      if (r.type == type && window.contains(r.time)) out.push_back(idx);
    }
    return out;
  };
  auto type_of = [&](const std::string& id) { return g.find(id)->type; };

  // Fixed (non-fan) nodes in pattern order after the anchor.
  std::vector<int> fixed;
  for (std::size_t i = 1; i < t.nodes.size(); ++i) {
    if (static_cast<int>(i) != fan) fixed.push_back(static_cast<int>(i));
  }

  std::vector<LearningObject> out;
  for (const auto& [anchor, ent] : g.entities()) {
    if (ent.type != t.nodes[0].type) continue;
    std::vector<std::string> bind(t.nodes.size());
    bind[0] = anchor;
    std::optional<LearningObject> found;

    std::function<void(std::size_t)> extend = [&](std::size_t k) {
      if (found) return;
      if (k == fixed.size()) {
        // Every pattern edge among fixed nodes must be realized.
        std::vector<std::size_t> realized;
        for (const auto& pe : t.edges) {
          if (pe.src == fan || pe.dst == fan) continue;
          auto cands = edges_between(bind[pe.src], pe.type, true);
          std::optional<std::size_t> best;
          for (auto idx : cands) {
            if (g.edges()[idx].dst != bind[pe.dst]) continue;
            if (!best || g.edges()[idx].time.start < g.edges()[*best].time.start) best = idx;
          }
          if (!best) return;
          realized.push_back(*best);
        }
        std::vector<std::size_t> fan_refs;
        std::vector<std::string> targets;
        if (fan_edge) {
          const bool outgoing = fan_edge->src != fan;
          const std::string& base = bind[outgoing ? fan_edge->src : fan_edge->dst];
          std::vector<FanEdge> fe;
          for (auto idx : edges_between(base, fan_edge->type, outgoing)) {
            const auto& r = g.edges()[idx];
            const std::string& other = outgoing ? r.dst : r.src;
            if (type_of(other) != t.nodes[fan].type) continue;
            if (std::find(bind.begin(), bind.end(), other) != bind.end()) continue;
            fe.push_back({r.time.start, idx, other});
          }
          std::sort(fe.begin(), fe.end(), [](const FanEdge& a, const FanEdge& b) {
            return std::tie(a.t, a.ref) < std::tie(b.t, b.ref);
          });
          bool ok = false;
          for (std::size_t i = 0; i < fe.size() && !ok; ++i) {
            std::set<std::string> distinct;
            std::vector<std::size_t> refs;
            for (std::size_t j = i; j < fe.size() && fe[j].t <= fe[i].t + t.max_duration; ++j) {
              distinct.insert(fe[j].target);
              refs.push_back(fe[j].ref);
            }
            if (static_cast<int>(refs.size()) >= t.min_fanout &&
                static_cast<int>(distinct.size()) >= t.min_distinct_targets) {
              ok = true;
              fan_refs = refs;
              targets.assign(distinct.begin(), distinct.end());
            }
          }
          if (!ok) return;
        }
        LearningObject o;
        o.cls = ObjectClass::MotifState;
        o.focal.kind = FocalQuery::Kind::Motif;
        o.focal.entity = anchor;
        for (std::size_t i = 0; i < bind.size(); ++i) {
          if (static_cast<int>(i) != fan) o.focal.binding.push_back(bind[i]);
        }
        o.focal.binding.insert(o.focal.binding.end(), targets.begin(), targets.end());
        for (const auto& id : o.focal.binding) add_entity(o, g, id);
        for (auto idx : realized) add_edge(o, g, idx);
        for (auto idx : fan_refs) add_edge(o, g, idx);
        sort_edges(o);
        Timestamp lo = std::numeric_limits<Timestamp>::max(), hi = kMinTime;
        for (const auto& e : o.edges) {
          lo = std::min(lo, e.rel.time.start);
          hi = std::max(hi, *e.rel.time.end);
        }
        o.support = o.edges.empty() ? window : Interval{lo, hi};
        o.features["fanout"] = static_cast<double>(fan_refs.size());
        o.features["distinct_targets"] = static_cast<double>(targets.size());
        o.features["duration"] = o.edges.empty() ? 0.0 : static_cast<double>(hi - lo);
        o.features["object_nodes"] = static_cast<double>(o.entities.size());
        o.features["object_edges"] = static_cast<double>(o.edges.size());
        o.modalities = ConstructionPolicy{}.modalities;
        found = std::move(o);
        return;
      }
      const int node = fixed[k];
      // Candidates come from a pattern edge linking `node` to an already bound node.
      for (const auto& pe : t.edges) {
        int other = pe.src == node ? pe.dst : pe.dst == node ? pe.src : -1;
        if (other < 0 || other == fan) continue;
        const bool bound = other == 0 || std::find(fixed.begin(), fixed.begin() + k, other) !=
                                             fixed.begin() + k;
        if (!bound) continue;
        std::set<std::string> cands;
        for (auto idx : edges_between(bind[other], pe.type, pe.src == other)) {
          const auto& r = g.edges()[idx];
          const std::string& c = pe.src == other ? r.dst : r.src;
          if (type_of(c) == t.nodes[node].type &&
              std::find(bind.begin(), bind.end(), c) == bind.end()) {
            cands.insert(c);
          }
        }
        for (const auto& c : cands) {
          bind[node] = c;
          extend(k + 1);
          bind[node].clear();
          if (found) return;
        }
        return;
      }
    };
    extend(0);
    if (found) out.push_back(std::move(*found));
  }
  return out;
}

LearningObject construct(const SubstrateGraph& g, const FocalQuery& q, const Interval& tau,
                         const ConstructionPolicy& eta) {
  if (!tau.well_formed()) throw Error(ErrorCode::InvalidSpec, "support interval is inverted");
  if (eta.max_nodes < 1 || eta.modalities.empty() || eta.hops < 0 || eta.hops > 2) {
    throw Error(ErrorCode::InvalidSpec, "construction policy needs k >= 1, modalities, h in 0..2");
  }
  LearningObject o;
  o.modalities = eta.modalities;
  o.support = tau;

  if (q.kind == FocalQuery::Kind::Motif) {
    if (!q.motif) throw Error(ErrorCode::InvalidSpec, "motif query without template");
    bool any = false;
    for (const auto& r : g.edges()) any = any || tau.contains(r.time);
    if (!any) throw Error(ErrorCode::EmptySupport, "no edges inside the query interval");
    auto matches = match_motif(g, *q.motif, tau);
    if (matches.empty()) throw Error(ErrorCode::UnknownFocal, "no binding for " + q.motif->name);
    LearningObject m = std::move(matches.front());
    m.modalities = eta.modalities;
    return m;
  }

  std::set<RelationshipType> filter = eta.rel_types;
  auto gather = [&](const std::string& id) {
    const Subgraph sg = neighborhood(g, id, eta.hops, tau, filter, eta.max_nodes);
    for (const auto& n : sg.nodes) {
      const CanonicalEntity* e = g.find(n);
      if (n == id || eta.entity_types.empty() || eta.entity_types.count(e->type)) {
        add_entity(o, g, n);
      }
    }
    for (auto idx : sg.edges) {
      const auto& r = g.edges()[idx];
      if (admitted(eta, g, idx) && o.entities.count(r.src) && o.entities.count(r.dst)) {
        add_edge(o, g, idx);
      }
    }
  };

  std::vector<std::string> focal;
  if (q.kind == FocalQuery::Kind::Entity) {
    if (!g.find(q.entity)) throw Error(ErrorCode::UnknownFocal, q.entity);
    o.cls = eta.hops == 0 ? ObjectClass::EntityState : ObjectClass::SubgraphState;
    o.focal.kind = FocalQuery::Kind::Entity;
    o.focal.entity = q.entity;
    add_entity(o, g, q.entity);
    if (eta.hops > 0) gather(q.entity);
    focal = {q.entity};
  } else {
    if (q.edge >= g.edges().size()) {
      throw Error(ErrorCode::UnknownFocal, fmt::format("edge #{}", q.edge));
    }
    const auto& r = g.edges()[q.edge];
    if (!tau.contains(r.time)) {
      throw Error(ErrorCode::EmptySupport, fmt::format("edge #{} lies outside the interval", q.edge));
    }
    o.cls = ObjectClass::InteractionState;
    o.focal.kind = FocalQuery::Kind::Edge;
    o.focal.edge = q.edge;
    o.focal.binding = {r.src, r.dst};
    add_entity(o, g, r.src);
    add_entity(o, g, r.dst);
    add_edge(o, g, q.edge);
    if (eta.hops > 0) {
      gather(r.src);
      gather(r.dst);
    }
    focal = {r.src, r.dst};
  }
  sort_edges(o);
  summarize(o, g, focal, tau, eta);
  return o;
}

ValidationResult check_containment(const LearningObject& o, const SubstrateGraph& g) {
  ValidationResult v;
  for (const auto& [id, e] : o.entities) {
    const CanonicalEntity* ge = g.find(id);
    if (!ge || ge->type != e.type) v.violations.push_back({"entity", id + " not in graph"});
  }
  for (const auto& e : o.edges) {
    if (e.ref >= g.edges().size() || !(g.edges()[e.ref] == e.rel)) {
      v.violations.push_back({"edge", fmt::format("edge #{} not in graph", e.ref)});
    }
    if (!o.entities.count(e.rel.src) || !o.entities.count(e.rel.dst)) {
      v.violations.push_back({"endpoint", fmt::format("edge #{} endpoint missing", e.ref)});
    }
    if (!o.support.contains(e.rel.time)) {
      v.violations.push_back({"support", fmt::format("edge #{} outside support", e.ref)});
    }
  }
  return v;
}

json LearningObject::to_json() const {
  json ents = json::object();
  for (const auto& [id, e] : entities) {
    ents[id] = {{"type", std::string(csts::to_string(e.type))}, {"lineage", e.lineage}};
  }
  json es = json::array();
  for (const auto& e : edges) {
    es.push_back({{"ref", e.ref}, {"edge", csts::to_json(e.rel)}});
  }
  json focal_j = {{"kind", std::string(kind_name(focal.kind))},
                  {"entity", focal.entity},
                  {"binding", focal.binding}};
  if (focal.edge) focal_j["edge"] = *focal.edge;
  std::vector<std::string> mods;
  for (auto m : modalities) mods.emplace_back(csts::to_string(m));
  return json{{"class", std::string(csts::to_string(cls))},
              {"entities", ents},
              {"edges", es},
              {"support", csts::to_json(support)},
              {"features", features},
              {"focal", focal_j},
              {"modalities", mods},
              {"masked", masked},
              {"derived_from", derived_from},
              {"view", view}};
}

std::string LearningObject::fingerprint() const { return csts::fingerprint(to_json().dump()); }

std::optional<RelationshipType> LearningObject::defining_type() const {
  if (focal.kind == FocalQuery::Kind::Edge) {
    for (const auto& e : edges) {
      if (focal.edge && e.ref == *focal.edge) return e.rel.type;
    }
    return std::nullopt;
  }
  std::map<RelationshipType, int> counts;
  for (const auto& e : edges) {
    if (e.rel.src == focal.entity || e.rel.dst == focal.entity) ++counts[e.rel.type];
  }
  std::optional<RelationshipType> best;
  int best_n = 0;
  for (const auto& [t, n] : counts) {
    if (n > best_n) {
      best = t;
      best_n = n;
    }
  }
  return best;
}

std::string ViewTransform::describe() const {
  switch (kind) {
    case Kind::AttributeMask: {
      std::string s = "attribute-mask(";
      for (const auto& a : attributes) s += a + ";";
      return s + ")";
    }
    case Kind::NeighborhoodSubsample: return fmt::format("neighborhood-subsample({})", keep_neighbors);
    case Kind::TemporalOffset: return fmt::format("temporal-offset(+{},-{})", trim_start, trim_end);
    case Kind::SourceOmission: return "source-omission(" + source + ")";
    case Kind::ModalityProjection: {
      std::string s = "modality-projection(";
      for (auto m : modalities) s += std::string(to_string(m)) + ";";
      return s + ")";
    }
    case Kind::ConfidencePrune: return fmt::format("confidence-prune({})", min_confidence);
  }
  return "?";
}

namespace {

void keep_edges_if(LearningObject& o, const std::function<bool(const ObjectEdge&)>& keep) {
  std::vector<ObjectEdge> kept;
  for (auto& e : o.edges) {
    if (keep(e)) kept.push_back(std::move(e));
  }
  o.edges = std::move(kept);
}

}  // namespace

LearningObject transform_view(const LearningObject& o, const ViewTransform& v, std::uint64_t seed) {
  LearningObject c = o;
  c.derived_from = o.fingerprint();
  c.view = v.describe();
  using K = ViewTransform::Kind;
  switch (v.kind) {
    case K::AttributeMask:
      for (const auto& a : v.attributes) {
        c.features.erase(a);
        c.masked.insert(a);
      }
      break;
    case K::NeighborhoodSubsample: {
      const auto focal = focal_entities(o);
      std::vector<std::string> others;
      for (const auto& [id, e] : o.entities) {
        if (std::find(focal.begin(), focal.end(), id) == focal.end()) others.push_back(id);
      }
      std::mt19937_64 rng(seed);
      std::shuffle(others.begin(), others.end(), rng);
      if (others.size() > v.keep_neighbors) others.resize(v.keep_neighbors);
      std::set<std::string> keep(others.begin(), others.end());
      keep.insert(focal.begin(), focal.end());
      for (auto it = c.entities.begin(); it != c.entities.end();) {
        it = keep.count(it->first) ? std::next(it) : c.entities.erase(it);
      }
      keep_edges_if(c, [&](const ObjectEdge& e) {
        return keep.count(e.rel.src) && keep.count(e.rel.dst);
      });
      break;
    }
    case K::TemporalOffset: {
      c.support.start = o.support.start + v.trim_start;
      if (o.support.end) c.support.end = *o.support.end - v.trim_end;
      keep_edges_if(c, [&](const ObjectEdge& e) { return c.support.contains(e.rel.time); });
      break;
    }
    case K::SourceOmission:
      keep_edges_if(c, [&](const ObjectEdge& e) { return e.rel.provenance.source_system != v.source; });
      break;
    case K::ModalityProjection: {
      std::set<Modality> kept;
      for (auto m : o.modalities) {
        if (v.modalities.count(m)) kept.insert(m);
      }
      c.modalities = kept;
      if (!kept.count(Modality::Tabular)) c.features.clear();
      break;
    }
    case K::ConfidencePrune:
      keep_edges_if(c, [&](const ObjectEdge& e) {
        return e.rel.provenance.confidence >= v.min_confidence;
      });
      break;
  }
  return c;
}

LearningObject apply_view(const LearningObject& o, const ViewTransform& v, std::uint64_t seed) {
  LearningObject c = transform_view(o, v, seed);
  auto vr = validate_view(o, c);
  if (!vr.ok()) {
    throw Error(ErrorCode::InadmissibleView,
                v.describe() + ": " + vr.violations.front().code + " (" +
                    vr.violations.front().message + ")");
  }
  return c;
}

ValidationResult validate_view(const LearningObject& original, const LearningObject& candidate) {
  ValidationResult v;
  if (candidate.derived_from != original.fingerprint()) {
    v.violations.push_back({"derived-from", "candidate does not name the original's fingerprint"});
  }
  // (1) focal identity
  bool focal_ok = candidate.focal == original.focal;
  for (const auto& id : focal_entities(original)) {
    auto it = candidate.entities.find(id);
    focal_ok = focal_ok && it != candidate.entities.end() &&
               it->second.type == original.entities.at(id).type;
  }
  if (!focal_ok) v.violations.push_back({"focal-identity", "focal changed or dropped"});
  // (2) retained edges stay signature-valid over retained entities
  for (const auto& e : candidate.edges) {
    auto s = candidate.entities.find(e.rel.src), d = candidate.entities.find(e.rel.dst);
    if (s == candidate.entities.end() || d == candidate.entities.end() ||
        !signature_admits(e.rel.type, s->second.type, d->second.type)) {
      v.violations.push_back({"signature", fmt::format("edge #{} no longer admitted", e.ref)});
      break;
    }
  }
  // (3) support: a sub-interval of the original covering every retained edge
  bool support_ok = candidate.support.well_formed() && original.support.contains(candidate.support);
  for (const auto& e : candidate.edges) support_ok = support_ok && candidate.support.contains(e.rel.time);
  if (!support_ok) v.violations.push_back({"support", "support not a covering sub-interval"});
  // (4) provenance recoverable on every retained element
  bool prov_ok = true;
  for (const auto& e : candidate.edges) {
    prov_ok = prov_ok && !e.rel.provenance.lineage.empty() && !e.rel.provenance.source_system.empty();
  }
  for (const auto& [id, e] : candidate.entities) prov_ok = prov_ok && e.lineage > 0;
  if (!prov_ok) v.violations.push_back({"provenance", "retained element without lineage"});
  // (5) semantic admissibility proxy
  if (auto t = original.defining_type()) {
    const bool kept = std::any_of(candidate.edges.begin(), candidate.edges.end(),
                                  [&](const ObjectEdge& e) { return e.rel.type == *t; });
    if (!kept) {
      v.violations.push_back({"admissibility", "no edge of the focal's defining type " +
                                                   std::string(to_string(*t)) + " retained"});
    }
  }
  return v;
}

std::vector<double> summary_vector(const LearningObject& o) {
  const auto focal = focal_entities(o);
  const std::string anchor = focal.empty() ? std::string() : focal.front();
  double out = 0, in = 0;
  std::set<std::string> neighbors;
  for (const auto& e : o.edges) {
    if (e.rel.src == anchor) {
      ++out;
      neighbors.insert(e.rel.dst);
    }
    if (e.rel.dst == anchor) {
      ++in;
      neighbors.insert(e.rel.src);
    }
  }
  return {static_cast<double>(o.edges.size()), static_cast<double>(neighbors.size()), out, in};
}

std::vector<double> edge_type_histogram(const LearningObject& o) {
  std::vector<double> h(kAllRelationshipTypes.size(), 0.0);
  for (const auto& e : o.edges) h[static_cast<std::size_t>(e.rel.type)] += 1;
  if (!o.edges.empty()) {
    for (auto& x : h) x /= static_cast<double>(o.edges.size());
  }
  return h;
}

namespace {

std::string focal_key(const LearningObject& o) {
  if (o.focal.kind == FocalQuery::Kind::Edge && o.focal.edge) {
    return fmt::format("edge:{}", *o.focal.edge);
  }
  return std::string(kind_name(o.focal.kind)) + ":" + o.focal.entity;
}

bool adjacent_windows(const LearningObject& a, const LearningObject& b) {
  constexpr Timestamp kWidth = 30 * 60;
  auto w = [](Timestamp t) { return t >= 0 ? t / kWidth : -((-t + kWidth - 1) / kWidth); };
  return std::llabs(w(a.support.start) - w(b.support.start)) == 1;
}

}  // namespace

std::vector<ObjectPair> pair_policy(const std::vector<LearningObject>& objects,
                                    const std::optional<std::vector<int>>& labels,
                                    PairPolicy policy) {
  if (objects.size() < 2) {
    throw Error(ErrorCode::InsufficientObjects, "pairing needs at least two objects");
  }
  if (labels && labels->size() != objects.size()) {
    throw Error(ErrorCode::InvalidSpec, "one label per object");
  }
  std::vector<std::string> fps, keys;
  for (const auto& o : objects) {
    fps.push_back(o.fingerprint());
    keys.push_back(focal_key(o));
  }
  std::vector<ObjectPair> out;
  const std::size_t n = objects.size();
  if (policy == PairPolicy::Positive) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto &a = objects[i], &b = objects[j];
        const bool views = (!a.derived_from.empty() && a.derived_from == b.derived_from) ||
                           a.derived_from == fps[j] || b.derived_from == fps[i];
        const bool adjacent = keys[i] == keys[j] && adjacent_windows(a, b);
        if (views || adjacent) out.push_back({i, j});
      }
    }
    return out;
  }
  std::vector<ObjectPair> negatives;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (keys[i] == keys[j]) continue;
      if (labels && (*labels)[i] == (*labels)[j]) continue;
      negatives.push_back({i, j});
    }
  }
  if (policy == PairPolicy::Negative) return negatives;
  if (negatives.empty()) return out;

  std::vector<double> dist, l1;
  for (const auto& p : negatives) {
    const auto sa = summary_vector(objects[p.a]), sb = summary_vector(objects[p.b]);
    const auto ha = edge_type_histogram(objects[p.a]), hb = edge_type_histogram(objects[p.b]);
    double d = 0, l = 0;
    for (std::size_t k = 0; k < sa.size(); ++k) d += (sa[k] - sb[k]) * (sa[k] - sb[k]);
    for (std::size_t k = 0; k < ha.size(); ++k) l += std::abs(ha[k] - hb[k]);
    dist.push_back(std::sqrt(d));
    l1.push_back(l);
  }
  const double near = quantile(dist, 0.1);
  const double median_l1 = quantile(l1, 0.5);
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    if (dist[k] <= near && l1[k] > median_l1) out.push_back(negatives[k]);
  }
  return out;
}

json to_json(const ObjectPair& p, const std::vector<LearningObject>& objects, PairPolicy policy) {
  const char* kind = policy == PairPolicy::Positive   ? "positive"
                     : policy == PairPolicy::Negative ? "negative"
                                                      : "hard-negative";
  return json{{"policy", kind},
              {"a", objects.at(p.a).fingerprint()},
              {"b", objects.at(p.b).fingerprint()}};
}

}  // namespace csts
