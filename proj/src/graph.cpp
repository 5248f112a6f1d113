#include "csts/graph.hpp"

#include <algorithm>
#include <deque>

#include "csts/error.hpp"

namespace csts {

namespace {

int rank(LifecycleState s) { return static_cast<int>(s); }

bool lifecycle_well_formed(const Lifecycle& lc) {
  LifecycleState cur = LifecycleState::Created;
  std::optional<Timestamp> last;
  for (const auto& tr : lc.transitions) {
    if (tr.from != cur || rank(tr.to) != rank(tr.from) + 1) return false;
    if (last && tr.at < *last) return false;
    last = tr.at;
    cur = tr.to;
  }
  return cur == lc.state;
}

void add_unique(std::vector<SourceLineage>& into, const SourceLineage& s) {
  if (std::find(into.begin(), into.end(), s) == into.end()) into.push_back(s);
}

Interval hull(const Interval& a, const Interval& b) {
  Interval out;
  out.start = std::min(a.start, b.start);
  if (a.end && b.end) out.end = std::max(*a.end, *b.end);
  return out;
}

const std::vector<std::size_t> kNoEdges;

}  // namespace

std::string_view to_string(LifecycleState s) {
  switch (s) {
    case LifecycleState::Created: return "Created";
    case LifecycleState::Active: return "Active";
    case LifecycleState::Dormant: return "Dormant";
    case LifecycleState::Retired: return "Retired";
  }
  return "?";
}

LifecycleState parse_lifecycle_state(std::string_view name) {
  for (auto s : {LifecycleState::Created, LifecycleState::Active, LifecycleState::Dormant,
                 LifecycleState::Retired}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::ParseError, "unknown lifecycle state '" + std::string(name) + "'");
}

const AttributeSchema& default_attribute_schema() {
  static const AttributeSchema schema = [] {
    using K = ScalarKind;
    AttributeSchema s;
    s[EntityType::Host] = {{"hostname", K::String}, {"community", K::String}, {"site", K::String},
                           {"os", K::String}};
    s[EntityType::User] = {{"username", K::String},
                           {"community", K::String},
                           {"logon_count", K::Integer},
                           {"privileged", K::Boolean},
                           {"last_logon", K::Timestamp}};
    s[EntityType::Process] = {{"image", K::String}, {"pid", K::Integer}};
    s[EntityType::File] = {{"path", K::String}, {"size", K::Integer}};
    s[EntityType::NetworkFlow] = {{"bytes", K::Integer}, {"duration", K::Float},
                                  {"first_seen", K::Timestamp}};
    s[EntityType::CloudResource] = {{"arn", K::String}, {"region", K::String}};
    s[EntityType::Credential] = {{"kind", K::String}, {"privileged", K::Boolean}};
    s[EntityType::ExternalEntity] = {{"address", K::String}, {"port", K::Integer},
                                     {"reputation", K::Float}};
    for (auto t : kAllEntityTypes) s[t]["surface"] = K::String;
    return s;
  }();
  return schema;
}

bool ValidationResult::has(std::string_view code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

ValidationResult validate_entity(const CanonicalEntity& e, const AttributeSchema& schema) {
  ValidationResult out;
  if (e.id.empty()) out.violations.push_back({"empty id", "entity id must be non-empty"});
  if (!e.validity.well_formed()) {
    out.violations.push_back({"inverted validity interval",
                              "t_start " + std::to_string(e.validity.start) + " > t_end " +
                                  std::to_string(*e.validity.end)});
  }
  if (e.source_meta.empty()) {
    out.violations.push_back({"missing provenance", "source_meta is empty"});
  }
  auto it = schema.find(e.type);
  for (const auto& [name, value] : e.attributes) {
    if (it == schema.end() || !it->second.count(name)) {
      out.violations.push_back({"unknown attribute", name});
      continue;
    }
    if (it->second.at(name) != kind_of(value)) {
      out.violations.push_back(
          {"type mismatch", name + " declared " + std::string(to_string(it->second.at(name))) +
                                " but holds " + std::string(to_string(kind_of(value)))});
    }
  }
  if (!lifecycle_well_formed(e.lifecycle)) {
    out.violations.push_back({"malformed lifecycle", "transition log is not a forward walk"});
  }
  return out;
}

void transition_lifecycle(CanonicalEntity& e, LifecycleState to, Timestamp at) {
  auto& lc = e.lifecycle;
  if (rank(to) != rank(lc.state) + 1) {
    throw Error(ErrorCode::IllegalTransition, e.id + ": " + std::string(to_string(lc.state)) +
                                                  " -> " + std::string(to_string(to)));
  }
  if (!lc.transitions.empty() && at < lc.transitions.back().at) {
    throw Error(ErrorCode::StaleTimestamp, e.id + ": transition at " + std::to_string(at) +
                                               " precedes " +
                                               std::to_string(lc.transitions.back().at));
  }
  lc.transitions.push_back({lc.state, to, at});
  lc.state = to;
}

SubstrateGraph::SubstrateGraph(AttributeSchema schema, std::string schema_version)
    : schema_(std::move(schema)), schema_version_(std::move(schema_version)) {}

const CanonicalEntity* SubstrateGraph::find(const std::string& id) const {
  auto it = entities_.find(id);
  return it == entities_.end() ? nullptr : &it->second;
}

const std::vector<std::size_t>& SubstrateGraph::out_edges(const std::string& id) const {
  auto it = out_index_.find(id);
  return it == out_index_.end() ? kNoEdges : it->second;
}

const std::vector<std::size_t>& SubstrateGraph::in_edges(const std::string& id) const {
  auto it = in_index_.find(id);
  return it == in_index_.end() ? kNoEdges : it->second;
}

bool SubstrateGraph::operator==(const SubstrateGraph& other) const {
  return schema_version_ == other.schema_version_ && entities_ == other.entities_ &&
         edges_ == other.edges_ && delta_log_ == other.delta_log_;
}

void SubstrateGraph::commit_edge(CanonicalRelationship r) {
  const std::size_t idx = edges_.size();
  out_index_[r.src].push_back(idx);
  in_index_[r.dst].push_back(idx);
  edges_.push_back(std::move(r));
}

void SubstrateGraph::apply(const GraphDelta& d) {
  if (!delta_log_.empty() && d.at < delta_log_.back().at) {
    throw Error(ErrorCode::OutOfOrderDelta, "delta at " + std::to_string(d.at) +
                                                " precedes last applied " +
                                                std::to_string(delta_log_.back().at));
  }

  // Stage every touched entity; nothing is committed until all checks pass.
  std::map<std::string, CanonicalEntity> staged;
  auto lookup = [&](const std::string& id) -> const CanonicalEntity* {
    if (auto it = staged.find(id); it != staged.end()) return &it->second;
    return find(id);
  };
  auto stage = [&](const std::string& id) -> CanonicalEntity& {
    if (auto it = staged.find(id); it != staged.end()) return it->second;
    const CanonicalEntity* cur = find(id);
    if (!cur) throw Error(ErrorCode::UnknownEntity, id);
    return staged.emplace(id, *cur).first->second;
  };

  for (const auto& e : d.entity_upserts) {
    auto vr = validate_entity(e, schema_);
    if (!vr.ok()) {
      throw Error(ErrorCode::InvalidEntity,
                  (e.id.empty() ? "<empty>" : e.id) + ": " + vr.violations.front().code);
    }
    if (const CanonicalEntity* existing = lookup(e.id)) {
      if (existing->type != e.type) {
        throw Error(ErrorCode::TypeMismatch, e.id + " is " +
                                                 std::string(to_string(existing->type)) +
                                                 ", upsert declares " +
                                                 std::string(to_string(e.type)));
      }
      CanonicalEntity& cur = stage(e.id);
      for (const auto& [k, v] : e.attributes) cur.attributes[k] = v;
      for (const auto& s : e.source_meta) add_unique(cur.source_meta, s);
      cur.validity = hull(cur.validity, e.validity);
    } else {
      staged.emplace(e.id, e);
    }
  }

  for (const auto& m : d.merges) {
    if (m.keep == m.absorb) throw Error(ErrorCode::TypeMismatch, "cannot merge entity into itself");
    const CanonicalEntity* keep = lookup(m.keep);
    const CanonicalEntity* absorb = lookup(m.absorb);
    if (!keep) throw Error(ErrorCode::UnknownEntity, m.keep);
    if (!absorb) throw Error(ErrorCode::UnknownEntity, m.absorb);
    if (keep->type != absorb->type) {
      throw Error(ErrorCode::TypeMismatch, m.keep + " and " + m.absorb + " differ in type");
    }
    CanonicalEntity& k = stage(m.keep);
    CanonicalEntity& a = stage(m.absorb);
    k.validity = hull(k.validity, a.validity);
    add_unique(k.source_meta, {"merge", {"merge_identities", "absorbed:" + m.absorb}});
    add_unique(a.source_meta, {"merge", {"merge_identities", "merged_into:" + m.keep}});
    while (a.lifecycle.state != LifecycleState::Retired) {
      transition_lifecycle(a, static_cast<LifecycleState>(rank(a.lifecycle.state) + 1), d.at);
    }
  }

  for (const auto& tr : d.lifecycle_transitions) {
    transition_lifecycle(stage(tr.entity_id), tr.to, tr.at);
  }

  for (const auto& r : d.edge_inserts) {
    const CanonicalEntity* src = lookup(r.src);
    const CanonicalEntity* dst = lookup(r.dst);
    if (!src) throw Error(ErrorCode::UnknownEntity, "edge source " + r.src);
    if (!dst) throw Error(ErrorCode::UnknownEntity, "edge target " + r.dst);
    if (!signature_admits(r.type, src->type, dst->type)) {
      throw Error(ErrorCode::SignatureViolation,
                  std::string(to_string(r.type)) + "(" + std::string(to_string(src->type)) + ", " +
                      std::string(to_string(dst->type)) + ")");
    }
    if (!r.time.well_formed() || r.time.is_open()) {
      throw Error(ErrorCode::TemporalMisalignment, "edge time must be a closed interval");
    }
    if (!src->validity.contains(r.time) || !dst->validity.contains(r.time)) {
      throw Error(ErrorCode::TemporalMisalignment,
                  r.src + " -> " + r.dst + " at " + std::to_string(r.time.start) +
                      " outside validity intersection");
    }
    if (!(r.provenance.confidence >= 0.0 && r.provenance.confidence <= 1.0)) {
      throw Error(ErrorCode::InvalidEntity, "edge confidence outside [0,1]");
    }
  }

  // Commit.
  for (auto& [id, e] : staged) entities_[id] = std::move(e);
  if (!d.merges.empty()) {
    for (const auto& m : d.merges) {
      auto moved_out = std::move(out_index_[m.absorb]);
      auto moved_in = std::move(in_index_[m.absorb]);
      out_index_.erase(m.absorb);
      in_index_.erase(m.absorb);
      const std::string step = "merge:" + m.absorb + "->" + m.keep;
      for (auto idx : moved_out) {
        edges_[idx].src = m.keep;
        edges_[idx].provenance.lineage.push_back(step);
      }
      for (auto idx : moved_in) {
        edges_[idx].dst = m.keep;
        // Self-loops already got the lineage step above.
        if (edges_[idx].provenance.lineage.empty() || edges_[idx].provenance.lineage.back() != step)
          edges_[idx].provenance.lineage.push_back(step);
      }
      auto& out = out_index_[m.keep];
      out.insert(out.end(), moved_out.begin(), moved_out.end());
      std::sort(out.begin(), out.end());
      auto& in = in_index_[m.keep];
      in.insert(in.end(), moved_in.begin(), moved_in.end());
      std::sort(in.begin(), in.end());
    }
  }
  for (const auto& r : d.edge_inserts) commit_edge(r);
  delta_log_.push_back(d);
}

SubstrateGraph apply_delta(SubstrateGraph g, const GraphDelta& d) {
  g.apply(d);
  return g;
}

void insert_edge(SubstrateGraph& g, const CanonicalRelationship& r) {
  GraphDelta d;
  d.at = r.time.start;
  if (!g.delta_log().empty()) d.at = std::max(d.at, g.delta_log().back().at);
  d.edge_inserts.push_back(r);
  g.apply(d);
}

SubstrateGraph replay(const std::vector<GraphDelta>& deltas, const AttributeSchema& schema,
                      const std::string& schema_version) {
  SubstrateGraph g(schema, schema_version);
  for (const auto& d : deltas) g.apply(d);
  return g;
}

SubstrateGraph snapshot_at(const SubstrateGraph& g, Timestamp t) {
  SubstrateGraph out(g.schema(), g.schema_version());
  for (const auto& d : g.delta_log()) {
    if (d.at > t) break;
    out.apply(d);
  }
  return out;
}

Subgraph neighborhood(const SubstrateGraph& g, const std::string& focal, int hops,
                      const Interval& window, const std::set<RelationshipType>& type_filter,
                      std::size_t max_nodes) {
  if (!g.find(focal)) throw Error(ErrorCode::UnknownEntity, focal);
  auto eligible = [&](std::size_t idx) {
    const auto& e = g.edges()[idx];
    return window.contains(e.time) && (type_filter.empty() || type_filter.count(e.type));
  };

  std::set<std::string> nodes{focal};
  std::vector<std::string> frontier{focal};
  for (int h = 0; h < hops && nodes.size() < max_nodes; ++h) {
    std::set<std::string> candidates;
    for (const auto& n : frontier) {
      for (auto idx : g.out_edges(n)) {
        if (eligible(idx) && !nodes.count(g.edges()[idx].dst)) candidates.insert(g.edges()[idx].dst);
      }
      for (auto idx : g.in_edges(n)) {
        if (eligible(idx) && !nodes.count(g.edges()[idx].src)) candidates.insert(g.edges()[idx].src);
      }
    }
    frontier.clear();
    for (const auto& c : candidates) {  // std::set iterates in canonical-id order
      if (nodes.size() >= max_nodes) break;
      nodes.insert(c);
      frontier.push_back(c);
    }
  }

  Subgraph out;
  out.nodes.assign(nodes.begin(), nodes.end());
  std::set<std::size_t> edge_set;
  for (const auto& n : out.nodes) {
    for (auto idx : g.out_edges(n)) {
      if (eligible(idx) && nodes.count(g.edges()[idx].dst)) edge_set.insert(idx);
    }
  }
  out.edges.assign(edge_set.begin(), edge_set.end());
  return out;
}

}  // namespace csts
