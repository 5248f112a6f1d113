#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "csts/graph.hpp"

namespace csts {

enum class ObjectClass { EntityState, InteractionState, SubgraphState, MotifState };
enum class Modality { Tabular, Temporal, Graph, Provenance };

std::string_view to_string(ObjectClass c);
std::string_view to_string(Modality m);

struct PatternNode {
  EntityType type = EntityType::Process;
  bool fan = false;  // binds to a set of distinct entities instead of one
};

struct PatternEdge {
  int src = 0;
  int dst = 1;
  RelationshipType type = RelationshipType::Writes;
};

/// Typed pattern with node 0 as anchor and at most one fan node; κ bounds the
/// fan edges: at least min_fanout edges reaching at least
/// min_distinct_targets distinct entities, all within max_duration.
struct MotifTemplate {
  std::string name;
  std::vector<PatternNode> nodes;
  std::vector<PatternEdge> edges;
  int min_fanout = 1;
  Timestamp max_duration = 0;
  int min_distinct_targets = 1;

  bool connected() const;
};

/// "Process WRITES >= n distinct files within `within` seconds".
MotifTemplate write_cascade(int n, Timestamp within);

struct FocalQuery {
  enum class Kind { Entity, Edge, Motif } kind = Kind::Entity;
  std::string entity;
  std::size_t edge = 0;
  std::optional<MotifTemplate> motif;

  static FocalQuery of_entity(std::string id);
  static FocalQuery of_edge(std::size_t edge_index);
  static FocalQuery of_motif(MotifTemplate t);
};

struct ConstructionPolicy {
  int hops = 1;  // 0 (entity only), 1 or 2
  std::size_t max_nodes = 32;
  std::set<EntityType> entity_types;        // empty admits all
  std::set<RelationshipType> rel_types;     // empty admits all
  std::set<Modality> modalities{Modality::Tabular, Modality::Temporal, Modality::Graph,
                                Modality::Provenance};
  double min_confidence = 0.0;
};

struct ObjectEntity {
  EntityType type = EntityType::Host;
  std::size_t lineage = 0;  // number of source lineage entries in the graph

  bool operator==(const ObjectEntity&) const = default;
};

struct ObjectEdge {
  std::size_t ref = 0;  // index into the source graph's edges
  CanonicalRelationship rel;

  bool operator==(const ObjectEdge&) const = default;
};

struct Focal {
  FocalQuery::Kind kind = FocalQuery::Kind::Entity;
  std::string entity;                 // entity focal, or motif anchor
  std::optional<std::size_t> edge;    // edge focal
  std::vector<std::string> binding;   // motif node bindings (fan targets last)

  bool operator==(const Focal&) const = default;
};

struct LearningObject {
  ObjectClass cls = ObjectClass::EntityState;
  std::map<std::string, ObjectEntity> entities;
  std::vector<ObjectEdge> edges;  // ascending ref
  Interval support;
  std::map<std::string, double> features;
  Focal focal;
  std::set<Modality> modalities;
  std::set<std::string> masked;
  std::string derived_from;  // fingerprint of the original for views
  std::string view;          // transform description for views

  nlohmann::json to_json() const;
  /// Content hash of the canonical serialization.
  std::string fingerprint() const;
  /// Relationship type the focal is defined by, if any edge type qualifies.
  std::optional<RelationshipType> defining_type() const;
};

/// Earliest qualifying binding per anchor entity, in anchor-id order, using
/// only edges with time inside `window`.
std::vector<LearningObject> match_motif(const SubstrateGraph& g, const MotifTemplate& t,
                                        const Interval& window);

/// Ψ(G, q, τ, η). Throws UnknownFocal, EmptySupport, InvalidSpec.
LearningObject construct(const SubstrateGraph& g, const FocalQuery& q, const Interval& tau,
                         const ConstructionPolicy& eta);

/// Containment: entities/edges exist in g, endpoints retained, edge times in support.
ValidationResult check_containment(const LearningObject& o, const SubstrateGraph& g);

struct ViewTransform {
  enum class Kind {
    AttributeMask,
    NeighborhoodSubsample,
    TemporalOffset,
    SourceOmission,
    ModalityProjection,
    ConfidencePrune
  } kind = Kind::AttributeMask;
  std::set<std::string> attributes;    // AttributeMask
  std::size_t keep_neighbors = 0;      // NeighborhoodSubsample
  Timestamp trim_start = 0;            // TemporalOffset: support shrinks by these amounts
  Timestamp trim_end = 0;
  std::string source;                  // SourceOmission
  std::set<Modality> modalities;       // ModalityProjection
  double min_confidence = 0;           // ConfidencePrune

  std::string describe() const;
};

/// Applies `v` and validates the result; an inadmissible view throws
/// InadmissibleView instead of being returned.
LearningObject apply_view(const LearningObject& o, const ViewTransform& v, std::uint64_t seed);

/// The same transform without the admissibility gate (for diagnostics).
LearningObject transform_view(const LearningObject& o, const ViewTransform& v, std::uint64_t seed);

/// Five constraints: "focal-identity", "signature", "support", "provenance",
/// "admissibility"; plus "derived-from" when the candidate does not name the
/// original's fingerprint.
ValidationResult validate_view(const LearningObject& original, const LearningObject& candidate);

enum class PairPolicy { Positive, Negative, HardNegative };

struct ObjectPair {
  std::size_t a = 0;
  std::size_t b = 0;
  bool operator==(const ObjectPair&) const = default;
};

/// Tabular summary used for distances: object edges, distinct focal
/// neighbors, focal out/in degree.
std::vector<double> summary_vector(const LearningObject& o);
/// Fraction of object edges per relationship type (enumeration order).
std::vector<double> edge_type_histogram(const LearningObject& o);

/// Positives: views sharing an original (or a view and its original), and
/// adjacent 30-minute windows of one focal. Negatives: distinct focal
/// entities (and different labels when given). Hard negatives: negatives
/// within the bottom decile of summary distance whose edge-type histograms
/// differ by more than the median L1. Throws InsufficientObjects.
std::vector<ObjectPair> pair_policy(const std::vector<LearningObject>& objects,
                                    const std::optional<std::vector<int>>& labels,
                                    PairPolicy policy);

nlohmann::json to_json(const ObjectPair& p, const std::vector<LearningObject>& objects,
                       PairPolicy policy);

}  // namespace csts
