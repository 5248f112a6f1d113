#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "csts/graph.hpp"

namespace csts {

nlohmann::json to_json(const Interval& i);
Interval interval_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AttributeMap& attrs);
AttributeMap attributes_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CanonicalEntity& e);
CanonicalEntity entity_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CanonicalRelationship& r);
CanonicalRelationship relationship_from_json(const nlohmann::json& j);

/// One JSONL line: {"at", "entities", "transitions", "edges"} plus "merges"
/// when the delta carries identity merges.
nlohmann::json to_json(const GraphDelta& d);
GraphDelta delta_from_json(const nlohmann::json& j);

void write_delta_log(std::ostream& out, const SubstrateGraph& g);
void write_delta_log(const std::string& path, const SubstrateGraph& g);
std::vector<GraphDelta> read_delta_log(std::istream& in);
std::vector<GraphDelta> read_delta_log(const std::string& path);

}  // namespace csts
