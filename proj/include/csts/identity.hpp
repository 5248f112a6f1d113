#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "csts/graph.hpp"

namespace csts {

/// Normalization pipeline. Steps run in a fixed order (trim, realm strip,
/// lowercase, suffix strip) and the pipeline is iterated to a fixpoint, so
/// normalize(normalize(x)) == normalize(x) for every input.
struct NormalizationSteps {
  bool trim = true;
  bool lowercase = true;
  bool strip_realm_prefix = false;  // "CORP\alice" -> "alice", "C:\x\cmd.exe" -> "cmd.exe"
  std::vector<std::string> strip_suffixes;
};

std::string normalize(std::string_view surface, const NormalizationSteps& steps);

struct TypeResolutionRule {
  std::vector<std::string> keys;  // candidate raw fields, in priority order
  NormalizationSteps steps;
  std::map<std::string, std::string> aliases;  // normalized surface form -> canonical id
};

struct ResolutionPolicy {
  std::map<EntityType, TypeResolutionRule> rules;

  /// `{"Host": {"keys": [...], "strip_suffixes": [...], "aliases": {...}}, ...}`
  static ResolutionPolicy from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

ResolutionPolicy load_resolution_policy(const std::string& path);

struct RawObservation {
  std::string producer;
  EntityType entity_hint = EntityType::Host;
  std::map<std::string, std::string> raw_fields;
};

struct ResolutionOutcome {
  std::string canonical_id;
  std::string matched_key;
  std::string lineage_note;

  bool operator==(const ResolutionOutcome&) const = default;
};

/// Deterministic resolution R: O -> id. Alias table first, then
/// "<type-prefix>:<normalized key>". Throws UnresolvableObservation.
ResolutionOutcome resolve(const RawObservation& o, const ResolutionPolicy& p);

/// Builds the delta that folds `absorb` into `keep` (edges re-pointed, absorb
/// retired, lineage recorded on both).
GraphDelta merge_delta(const SubstrateGraph& g, const std::string& keep, const std::string& absorb,
                       Timestamp at);

/// Throws TypeMismatch or UnknownEntity; the input graph is untouched on error.
SubstrateGraph merge_identities(SubstrateGraph g, const std::string& keep,
                                const std::string& absorb, Timestamp at);

}  // namespace csts
