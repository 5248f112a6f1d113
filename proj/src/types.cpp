#include "csts/types.hpp"

#include <algorithm>

#include "csts/error.hpp"

namespace csts {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownEntity: return "UnknownEntity";
    case ErrorCode::SignatureViolation: return "SignatureViolation";
    case ErrorCode::TemporalMisalignment: return "TemporalMisalignment";
    case ErrorCode::InvalidEntity: return "InvalidEntity";
    case ErrorCode::OutOfOrderDelta: return "OutOfOrderDelta";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::StaleTimestamp: return "StaleTimestamp";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::UnresolvableObservation: return "UnresolvableObservation";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::UnknownFormat: return "UnknownFormat";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::IncompatibleSchema: return "IncompatibleSchema";
    case ErrorCode::InfeasibleInjection: return "InfeasibleInjection";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnfittedHistory: return "UnfittedHistory";
    case ErrorCode::SplitMismatch: return "SplitMismatch";
    case ErrorCode::ViabilityGateFailure: return "ViabilityGateFailure";
    case ErrorCode::DegenerateClass: return "DegenerateClass";
    case ErrorCode::UnknownFocal: return "UnknownFocal";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::InadmissibleView: return "InadmissibleView";
    case ErrorCode::InsufficientObjects: return "InsufficientObjects";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
  }
  return "Unknown";
}

bool Interval::contains(const Interval& other) const {
  if (other.start < start) return false;
  if (!end) return true;
  if (!other.end) return false;
  return *other.end <= *end;
}

std::optional<Interval> Interval::intersect(const Interval& other) const {
  Interval out;
  out.start = std::max(start, other.start);
  if (end && other.end) {
    out.end = std::min(*end, *other.end);
  } else if (end) {
    out.end = end;
  } else {
    out.end = other.end;
  }
  if (!out.well_formed()) return std::nullopt;
  return out;
}

std::string_view to_string(EntityType t) {
  switch (t) {
    case EntityType::Host: return "Host";
    case EntityType::User: return "User";
    case EntityType::Process: return "Process";
    case EntityType::File: return "File";
    case EntityType::NetworkFlow: return "NetworkFlow";
    case EntityType::CloudResource: return "CloudResource";
    case EntityType::Credential: return "Credential";
    case EntityType::ExternalEntity: return "ExternalEntity";
  }
  return "?";
}

std::string_view to_string(RelationshipType t) {
  switch (t) {
    case RelationshipType::AuthenticatesTo: return "AUTHENTICATES_TO";
    case RelationshipType::Executes: return "EXECUTES";
    case RelationshipType::ConnectsTo: return "CONNECTS_TO";
    case RelationshipType::Reads: return "READS";
    case RelationshipType::Writes: return "WRITES";
    case RelationshipType::Modifies: return "MODIFIES";
    case RelationshipType::Spawns: return "SPAWNS";
    case RelationshipType::Owns: return "OWNS";
    case RelationshipType::AssociatedWith: return "ASSOCIATED_WITH";
  }
  return "?";
}

EntityType parse_entity_type(std::string_view name) {
  for (auto t : kAllEntityTypes) {
    if (to_string(t) == name) return t;
  }
  throw Error(ErrorCode::ParseError, "unknown entity type '" + std::string(name) + "'");
}

RelationshipType parse_relationship_type(std::string_view name) {
  for (auto t : kAllRelationshipTypes) {
    if (to_string(t) == name) return t;
  }
  throw Error(ErrorCode::ParseError, "unknown relationship type '" + std::string(name) + "'");
}

std::string_view id_prefix(EntityType t) {
  switch (t) {
    case EntityType::Host: return "host";
    case EntityType::User: return "user";
    case EntityType::Process: return "proc";
    case EntityType::File: return "file";
    case EntityType::NetworkFlow: return "flow";
    case EntityType::CloudResource: return "cloud";
    case EntityType::Credential: return "cred";
    case EntityType::ExternalEntity: return "ext";
  }
  return "?";
}

bool signature_admits(RelationshipType rel, EntityType src, EntityType dst) {
  using E = EntityType;
  auto in = [](E t, std::initializer_list<E> allowed) {
    return std::find(allowed.begin(), allowed.end(), t) != allowed.end();
  };
  switch (rel) {
    case RelationshipType::AuthenticatesTo:
      return in(src, {E::User, E::Credential}) && dst == E::Host;
    case RelationshipType::Executes:
      return in(src, {E::User, E::Host}) && dst == E::Process;
    case RelationshipType::Spawns:
      return src == E::Process && dst == E::Process;
    case RelationshipType::ConnectsTo:
      return in(src, {E::Host, E::Process}) && in(dst, {E::Host, E::ExternalEntity});
    case RelationshipType::Reads:
    case RelationshipType::Writes:
    case RelationshipType::Modifies:
      return src == E::Process && dst == E::File;
    case RelationshipType::Owns:
      return src == E::User && in(dst, {E::Credential, E::CloudResource, E::Host});
    case RelationshipType::AssociatedWith:
      return true;
  }
  return false;
}

std::string_view to_string(ScalarKind k) {
  switch (k) {
    case ScalarKind::String: return "string";
    case ScalarKind::Integer: return "integer";
    case ScalarKind::Float: return "float";
    case ScalarKind::Timestamp: return "timestamp";
    case ScalarKind::Boolean: return "boolean";
  }
  return "?";
}

ScalarKind parse_scalar_kind(std::string_view name) {
  for (auto k : {ScalarKind::String, ScalarKind::Integer, ScalarKind::Float, ScalarKind::Timestamp,
                 ScalarKind::Boolean}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown scalar kind '" + std::string(name) + "'");
}

ScalarKind kind_of(const AttrValue& v) {
  return static_cast<ScalarKind>(v.index());
}

}  // namespace csts
