#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "csts/types.hpp"

namespace csts {

struct SourceLineage {
  std::string source_system;
  std::vector<std::string> lineage;

  bool operator==(const SourceLineage&) const = default;
};

struct Provenance {
  std::string source_system;
  Timestamp ingestion_time = 0;
  Interval valid_time;
  double confidence = 1.0;
  std::vector<std::string> lineage;

  bool operator==(const Provenance&) const = default;
};

enum class LifecycleState { Created, Active, Dormant, Retired };

std::string_view to_string(LifecycleState s);
LifecycleState parse_lifecycle_state(std::string_view name);

struct LifecycleTransition {
  LifecycleState from = LifecycleState::Created;
  LifecycleState to = LifecycleState::Active;
  Timestamp at = 0;

  bool operator==(const LifecycleTransition&) const = default;
};

struct Lifecycle {
  LifecycleState state = LifecycleState::Created;
  std::vector<LifecycleTransition> transitions;  // append-only

  bool operator==(const Lifecycle&) const = default;
};

struct CanonicalEntity {
  std::string id;
  EntityType type = EntityType::Host;
  AttributeMap attributes;
  std::vector<SourceLineage> source_meta;
  Interval validity;
  Lifecycle lifecycle;

  bool operator==(const CanonicalEntity&) const = default;
};

struct CanonicalRelationship {
  std::string src;
  std::string dst;
  RelationshipType type = RelationshipType::AssociatedWith;
  AttributeMap attributes;
  Interval time;  // closed; a point event has start == end
  Provenance provenance;

  bool operator==(const CanonicalRelationship&) const = default;
};

struct TransitionRequest {
  std::string entity_id;
  LifecycleState to = LifecycleState::Active;
  Timestamp at = 0;

  bool operator==(const TransitionRequest&) const = default;
};

/// Identity merge carried through the delta log so replay reproduces it.
struct IdentityMerge {
  std::string keep;
  std::string absorb;

  bool operator==(const IdentityMerge&) const = default;
};

struct GraphDelta {
  Timestamp at = 0;
  std::vector<CanonicalEntity> entity_upserts;
  std::vector<TransitionRequest> lifecycle_transitions;
  std::vector<CanonicalRelationship> edge_inserts;
  std::vector<IdentityMerge> merges;

  bool operator==(const GraphDelta&) const = default;
};

/// Declared attribute contract per entity type.
using AttributeSchema = std::map<EntityType, std::map<std::string, ScalarKind>>;

const AttributeSchema& default_attribute_schema();

struct Violation {
  std::string code;
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view code) const;
};

/// Violations are data: empty id, inverted interval, missing provenance,
/// unknown attribute, type mismatch, malformed lifecycle log.
ValidationResult validate_entity(const CanonicalEntity& e, const AttributeSchema& schema);

/// Appends a forward-chain transition; throws IllegalTransition or StaleTimestamp.
void transition_lifecycle(CanonicalEntity& e, LifecycleState to, Timestamp at);

/// Immutable-by-convention view of a bounded neighborhood.
struct Subgraph {
  std::vector<std::string> nodes;   // sorted canonical ids
  std::vector<std::size_t> edges;   // indices into SubstrateGraph::edges(), ascending

  bool operator==(const Subgraph&) const = default;
};

inline constexpr Timestamp kMinTime = std::numeric_limits<Timestamp>::min() / 4;

/// The time-indexed attributed multigraph. All mutation goes through `apply`,
/// which validates a whole delta before committing any of it.
class SubstrateGraph {
 public:
  explicit SubstrateGraph(AttributeSchema schema = default_attribute_schema(),
                          std::string schema_version = "1.0");

  const std::map<std::string, CanonicalEntity>& entities() const { return entities_; }
  const std::vector<CanonicalRelationship>& edges() const { return edges_; }
  const std::vector<GraphDelta>& delta_log() const { return delta_log_; }
  const std::string& schema_version() const { return schema_version_; }
  const AttributeSchema& schema() const { return schema_; }

  const CanonicalEntity* find(const std::string& id) const;
  const std::vector<std::size_t>& out_edges(const std::string& id) const;
  const std::vector<std::size_t>& in_edges(const std::string& id) const;

  void apply(const GraphDelta& d);

  /// Structural equality: entities, edges, delta log and schema version.
  bool operator==(const SubstrateGraph& other) const;

 private:
  void commit_edge(CanonicalRelationship r);

  AttributeSchema schema_;
  std::string schema_version_;
  std::map<std::string, CanonicalEntity> entities_;
  std::vector<CanonicalRelationship> edges_;
  std::vector<GraphDelta> delta_log_;
  std::map<std::string, std::vector<std::size_t>> out_index_;
  std::map<std::string, std::vector<std::size_t>> in_index_;
};

SubstrateGraph apply_delta(SubstrateGraph g, const GraphDelta& d);

/// Inserts one edge as its own delta stamped at max(last delta, edge start).
void insert_edge(SubstrateGraph& g, const CanonicalRelationship& r);

/// Replays every logged delta with `at <= t` into a fresh graph.
SubstrateGraph snapshot_at(const SubstrateGraph& g, Timestamp t);

/// Replays a delta sequence from the empty graph.
SubstrateGraph replay(const std::vector<GraphDelta>& deltas,
                      const AttributeSchema& schema = default_attribute_schema(),
                      const std::string& schema_version = "1.0");

/// Breadth-first typed neighborhood (edges traversed in either direction).
/// Only edges with time inside `window` and type in `type_filter` (all types
/// when empty) participate. Each BFS level is admitted in canonical-id order
/// until `max_nodes` is reached. Throws UnknownEntity.
Subgraph neighborhood(const SubstrateGraph& g, const std::string& focal, int hops,
                      const Interval& window, const std::set<RelationshipType>& type_filter,
                      std::size_t max_nodes);

}  // namespace csts
