#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace csts {

/// Seconds since the Unix epoch (UTC).
using Timestamp = std::int64_t;

/// Closed interval [start, end]; an empty `end` is open (treated as +inf).
struct Interval {
  Timestamp start = 0;
  std::optional<Timestamp> end;

  static Interval point(Timestamp t) { return {t, t}; }
  static Interval open_from(Timestamp t) { return {t, std::nullopt}; }

  bool is_open() const { return !end.has_value(); }
  bool well_formed() const { return !end || start <= *end; }
  bool contains(Timestamp t) const { return t >= start && (!end || t <= *end); }
  bool contains(const Interval& other) const;
  std::optional<Interval> intersect(const Interval& other) const;

  bool operator==(const Interval&) const = default;
};

enum class EntityType {
  Host,
  User,
  Process,
  File,
  NetworkFlow,
  CloudResource,
  Credential,
  ExternalEntity,
};

inline constexpr std::array<EntityType, 8> kAllEntityTypes = {
    EntityType::Host,        EntityType::User,          EntityType::Process,
    EntityType::File,        EntityType::NetworkFlow,   EntityType::CloudResource,
    EntityType::Credential,  EntityType::ExternalEntity,
};

enum class RelationshipType {
  AuthenticatesTo,
  Executes,
  ConnectsTo,
  Reads,
  Writes,
  Modifies,
  Spawns,
  Owns,
  AssociatedWith,
};

inline constexpr std::array<RelationshipType, 9> kAllRelationshipTypes = {
    RelationshipType::AuthenticatesTo, RelationshipType::Executes, RelationshipType::ConnectsTo,
    RelationshipType::Reads,           RelationshipType::Writes,   RelationshipType::Modifies,
    RelationshipType::Spawns,          RelationshipType::Owns,     RelationshipType::AssociatedWith,
};

std::string_view to_string(EntityType t);
std::string_view to_string(RelationshipType t);
// Both throw Error(ParseError) on names outside the closed enumerations.
EntityType parse_entity_type(std::string_view name);
RelationshipType parse_relationship_type(std::string_view name);

/// Canonical id prefix ("host", "user", ...) for an entity type.
std::string_view id_prefix(EntityType t);

/// Whether the fixed domain/codomain table admits (src, dst) for `rel`.
bool signature_admits(RelationshipType rel, EntityType src, EntityType dst);

// Attribute scalars: string | integer | float | timestamp | boolean.
struct TimeValue {
  Timestamp seconds = 0;
  bool operator==(const TimeValue&) const = default;
};

using AttrValue = std::variant<std::string, std::int64_t, double, TimeValue, bool>;
using AttributeMap = std::map<std::string, AttrValue>;

enum class ScalarKind { String, Integer, Float, Timestamp, Boolean };

std::string_view to_string(ScalarKind k);
ScalarKind parse_scalar_kind(std::string_view name);
ScalarKind kind_of(const AttrValue& v);

}  // namespace csts
