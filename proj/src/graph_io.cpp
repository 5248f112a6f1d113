#include "csts/graph_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "csts/error.hpp"

namespace csts {

using nlohmann::json;

json to_json(const Interval& i) {
  json j;
  j["start"] = i.start;
  j["end"] = i.end ? json(*i.end) : json(nullptr);
  return j;
}

Interval interval_from_json(const json& j) {
  Interval i;
  i.start = j.at("start").get<Timestamp>();
  if (j.contains("end") && !j.at("end").is_null()) i.end = j.at("end").get<Timestamp>();
  return i;
}

json to_json(const AttributeMap& attrs) {
  json j = json::object();
  for (const auto& [name, value] : attrs) {
    json v;
    v["type"] = std::string(to_string(kind_of(value)));
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, TimeValue>) {
            v["value"] = x.seconds;
          } else {
            v["value"] = x;
          }
        },
        value);
    j[name] = std::move(v);
  }
  return j;
}

AttributeMap attributes_from_json(const json& j) {
  AttributeMap out;
  for (const auto& [name, v] : j.items()) {
    const auto& value = v.at("value");
    switch (parse_scalar_kind(v.at("type").get<std::string>())) {
      case ScalarKind::String: out[name] = value.get<std::string>(); break;
      case ScalarKind::Integer: out[name] = value.get<std::int64_t>(); break;
      case ScalarKind::Float: out[name] = value.get<double>(); break;
      case ScalarKind::Timestamp: out[name] = TimeValue{value.get<Timestamp>()}; break;
      case ScalarKind::Boolean: out[name] = value.get<bool>(); break;
    }
  }
  return out;
}

json to_json(const Provenance& p) {
  return json{{"source_system", p.source_system},
              {"ingestion_time", p.ingestion_time},
              {"valid_time", to_json(p.valid_time)},
              {"confidence", p.confidence},
              {"lineage", p.lineage}};
}

Provenance provenance_from_json(const json& j) {
  Provenance p;
  p.source_system = j.at("source_system").get<std::string>();
  p.ingestion_time = j.at("ingestion_time").get<Timestamp>();
  p.valid_time = interval_from_json(j.at("valid_time"));
  p.confidence = j.at("confidence").get<double>();
  p.lineage = j.at("lineage").get<std::vector<std::string>>();
  return p;
}

json to_json(const CanonicalEntity& e) {
  json sources = json::array();
  for (const auto& s : e.source_meta) {
    sources.push_back({{"source_system", s.source_system}, {"lineage", s.lineage}});
  }
  json transitions = json::array();
  for (const auto& t : e.lifecycle.transitions) {
    transitions.push_back({{"from", std::string(to_string(t.from))},
                           {"to", std::string(to_string(t.to))},
                           {"at", t.at}});
  }
  return json{{"id", e.id},
              {"type", std::string(to_string(e.type))},
              {"attributes", to_json(e.attributes)},
              {"source_meta", sources},
              {"validity", to_json(e.validity)},
              {"lifecycle",
               {{"state", std::string(to_string(e.lifecycle.state))}, {"transitions", transitions}}}};
}

CanonicalEntity entity_from_json(const json& j) {
  CanonicalEntity e;
  e.id = j.at("id").get<std::string>();
  e.type = parse_entity_type(j.at("type").get<std::string>());
  e.attributes = attributes_from_json(j.at("attributes"));
  for (const auto& s : j.at("source_meta")) {
    e.source_meta.push_back(
        {s.at("source_system").get<std::string>(), s.at("lineage").get<std::vector<std::string>>()});
  }
  e.validity = interval_from_json(j.at("validity"));
  const auto& lc = j.at("lifecycle");
  e.lifecycle.state = parse_lifecycle_state(lc.at("state").get<std::string>());
  for (const auto& t : lc.at("transitions")) {
    e.lifecycle.transitions.push_back({parse_lifecycle_state(t.at("from").get<std::string>()),
                                       parse_lifecycle_state(t.at("to").get<std::string>()),
                                       t.at("at").get<Timestamp>()});
  }
  return e;
}

json to_json(const CanonicalRelationship& r) {
  return json{{"src", r.src},
              {"dst", r.dst},
              {"type", std::string(to_string(r.type))},
              {"attributes", to_json(r.attributes)},
              {"time", to_json(r.time)},
              {"provenance", to_json(r.provenance)}};
}

CanonicalRelationship relationship_from_json(const json& j) {
  CanonicalRelationship r;
  r.src = j.at("src").get<std::string>();
  r.dst = j.at("dst").get<std::string>();
  r.type = parse_relationship_type(j.at("type").get<std::string>());
  r.attributes = attributes_from_json(j.at("attributes"));
  r.time = interval_from_json(j.at("time"));
  r.provenance = provenance_from_json(j.at("provenance"));
  return r;
}

json to_json(const GraphDelta& d) {
  json entities = json::array();
  for (const auto& e : d.entity_upserts) entities.push_back(to_json(e));
  json transitions = json::array();
  for (const auto& t : d.lifecycle_transitions) {
    transitions.push_back(
        {{"entity", t.entity_id}, {"to", std::string(to_string(t.to))}, {"at", t.at}});
  }
  json edges = json::array();
  for (const auto& r : d.edge_inserts) edges.push_back(to_json(r));
  json j{{"at", d.at}, {"entities", entities}, {"transitions", transitions}, {"edges", edges}};
  if (!d.merges.empty()) {
    json merges = json::array();
    for (const auto& m : d.merges) merges.push_back({{"keep", m.keep}, {"absorb", m.absorb}});
    j["merges"] = merges;
  }
  return j;
}

GraphDelta delta_from_json(const json& j) {
  GraphDelta d;
  d.at = j.at("at").get<Timestamp>();
  for (const auto& e : j.at("entities")) d.entity_upserts.push_back(entity_from_json(e));
  for (const auto& t : j.at("transitions")) {
    d.lifecycle_transitions.push_back({t.at("entity").get<std::string>(),
                                       parse_lifecycle_state(t.at("to").get<std::string>()),
                                       t.at("at").get<Timestamp>()});
  }
  for (const auto& r : j.at("edges")) d.edge_inserts.push_back(relationship_from_json(r));
  if (j.contains("merges")) {
    for (const auto& m : j.at("merges")) {
      d.merges.push_back({m.at("keep").get<std::string>(), m.at("absorb").get<std::string>()});
    }
  }
  return d;
}

void write_delta_log(std::ostream& out, const SubstrateGraph& g) {
  for (const auto& d : g.delta_log()) out << to_json(d).dump() << '\n';
}

void write_delta_log(const std::string& path, const SubstrateGraph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  write_delta_log(out, g);
}

std::vector<GraphDelta> read_delta_log(std::istream& in) {
  std::vector<GraphDelta> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(delta_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, "delta log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<GraphDelta> read_delta_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path);
  return read_delta_log(in);
}

}  // namespace csts
