#include "csts/adapter.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "csts/csv.hpp"
#include "csts/error.hpp"

namespace csts {

using nlohmann::json;

namespace {

std::pair<int, int> parse_version(const std::string& v) {
  auto dot = v.find('.');
  try {
    int major = std::stoi(v.substr(0, dot));
    int minor = dot == std::string::npos ? 0 : std::stoi(v.substr(dot + 1));
    return {major, minor};
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidSpec, "malformed schema version '" + v + "'");
  }
}

std::string json_scalar_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return {};
  return v.dump();
}

json endpoint_to_json(const EndpointMapping& m) {
  return json{{"field", m.field}, {"type", std::string(to_string(m.type))}, {"attributes", m.attributes}};
}

EndpointMapping endpoint_from_json(const json& j) {
  EndpointMapping m;
  m.field = j.at("field").get<std::string>();
  m.type = parse_entity_type(j.at("type").get<std::string>());
  if (j.contains("attributes")) {
    m.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
  }
  return m;
}

const std::string* resolved_logical(const AdapterSpec& spec, const std::string& logical) {
  if (spec.logical_fields.count(logical)) return &logical;
  if (auto it = spec.deprecated.find(logical); it != spec.deprecated.end()) {
    if (spec.logical_fields.count(it->second)) return &it->second;
  }
  return nullptr;
}

}  // namespace

RecordFormat format_for_path(const std::string& path) {
  if (path.ends_with(".csv")) return RecordFormat::Csv;
  if (path.ends_with(".jsonl")) return RecordFormat::Jsonl;
  throw Error(ErrorCode::UnknownFormat, path);
}

RecordStream parse_records(const std::string& path, RecordFormat format, const TimeBinding& time,
                           const std::string& producer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path);
  RecordStream out;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> key_union;

  auto finish = [&](std::map<std::string, std::string> fields) {
    TelemetryRecord rec;
    rec.producer = producer;
    rec.line_no = line_no;
    rec.t_i = static_cast<Timestamp>(line_no);
    std::optional<Timestamp> t;
    for (const auto& alias : time.aliases) {
      auto it = fields.find(alias);
      if (it == fields.end() || it->second.empty()) continue;
      t = parse_timestamp(it->second, time.formats);
      break;
    }
    if (!t) {
      out.skipped.push_back({line_no, "timestamp"});
      return;
    }
    rec.t_e = *t;
    rec.raw_fields = std::move(fields);
    out.records.push_back(std::move(rec));
  };

  if (format == RecordFormat::Csv) {
    if (!std::getline(in, line)) return out;
    out.columns = parse_csv_line(line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ++line_no;
      std::vector<std::string> cells;
      try {
        cells = parse_csv_line(line);
      } catch (const Error&) {
        out.skipped.push_back({line_no, "malformed line"});
        continue;
      }
      if (cells.size() != out.columns.size()) {
        out.skipped.push_back({line_no, "malformed line"});
        continue;
      }
      std::map<std::string, std::string> fields;
      for (std::size_t i = 0; i < cells.size(); ++i) fields[out.columns[i]] = std::move(cells[i]);
      finish(std::move(fields));
    }
  } else {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ++line_no;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        out.skipped.push_back({line_no, "malformed line"});
        continue;
      }
      if (!j.is_object()) {
        out.skipped.push_back({line_no, "malformed line"});
        continue;
      }
      std::map<std::string, std::string> fields;
      for (const auto& [k, v] : j.items()) {
        fields[k] = json_scalar_to_string(v);
        key_union.insert(k);
      }
      finish(std::move(fields));
    }
    out.columns.assign(key_union.begin(), key_union.end());
  }
  return out;
}

TimeBinding AdapterSpec::time_binding() const {
  TimeBinding b;
  if (const std::string* logical = resolved_logical(*this, time_field)) {
    b.aliases = logical_fields.at(*logical);
  }
  b.formats = timestamp_formats;
  return b;
}

AdapterSpec AdapterSpec::from_json(const json& j) {
  AdapterSpec s;
  try {
    s.name = j.at("name").get<std::string>();
    s.schema_version = j.value("schema_version", std::string(kSubstrateSchemaVersion));
    s.logical_fields = j.at("logical_fields").get<std::map<std::string, std::vector<std::string>>>();
    s.event_field = j.value("event_field", std::string("event"));
    s.time_field = j.value("time_field", std::string("ts"));
    s.event_id_field = j.value("event_id_field", std::string("event_id"));
    for (const auto& [kind, m] : j.at("event_kind_map").items()) {
      s.event_kind_map[kind] = {parse_relationship_type(m.at("rel").get<std::string>()),
                                endpoint_from_json(m.at("src")), endpoint_from_json(m.at("dst"))};
    }
    if (j.contains("kind_inference")) {
      for (const auto& r : j.at("kind_inference")) {
        s.kind_inference.push_back({r.at("field").get<std::string>(), r.at("kind").get<std::string>()});
      }
    }
    for (const auto& f : j.value("timestamp_formats", std::vector<std::string>{"epoch_seconds"})) {
      s.timestamp_formats.push_back(parse_timestamp_format(f));
    }
    s.required_fields = j.value("required_fields", std::vector<std::string>{});
    s.deprecated = j.value("deprecated", std::map<std::string, std::string>{});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, e.what());
  }
  validate_adapter_spec(s);
  return s;
}

json AdapterSpec::to_json() const {
  json kinds = json::object();
  for (const auto& [kind, m] : event_kind_map) {
    kinds[kind] = {{"rel", std::string(csts::to_string(m.rel))},
                   {"src", endpoint_to_json(m.src)},
                   {"dst", endpoint_to_json(m.dst)}};
  }
  json inference = json::array();
  for (const auto& r : kind_inference) inference.push_back({{"field", r.field}, {"kind", r.kind}});
  std::vector<std::string> formats;
  for (auto f : timestamp_formats) formats.emplace_back(csts::to_string(f));
  return json{{"name", name},
              {"schema_version", schema_version},
              {"logical_fields", logical_fields},
              {"event_field", event_field},
              {"time_field", time_field},
              {"event_id_field", event_id_field},
              {"event_kind_map", kinds},
              {"kind_inference", inference},
              {"timestamp_formats", formats},
              {"required_fields", required_fields},
              {"deprecated", deprecated}};
}

void validate_adapter_spec(const AdapterSpec& spec) {
  if (spec.name.empty()) throw Error(ErrorCode::InvalidSpec, "adapter spec needs a name");
  if (parse_version(spec.schema_version).first != parse_version(kSubstrateSchemaVersion).first) {
    throw Error(ErrorCode::IncompatibleSchema, spec.name + ": schema version " + spec.schema_version +
                                                   " incompatible with substrate " +
                                                   kSubstrateSchemaVersion);
  }
  if (spec.timestamp_formats.empty()) {
    throw Error(ErrorCode::InvalidSpec, spec.name + ": no timestamp formats declared");
  }
  auto require_declared = [&](const std::string& logical, const std::string& what) {
    if (!resolved_logical(spec, logical)) {
      throw Error(ErrorCode::IncompatibleSchema,
                  spec.name + ": " + what + " '" + logical +
                      "' is neither declared nor deprecated with a declared replacement");
    }
  };
  require_declared(spec.time_field, "time field");
  for (const auto& f : spec.required_fields) require_declared(f, "required field");
  for (const auto& [kind, m] : spec.event_kind_map) {
    if (!signature_admits(m.rel, m.src.type, m.dst.type)) {
      throw Error(ErrorCode::InvalidSpec,
                  spec.name + ": event kind '" + kind + "' maps to " + std::string(to_string(m.rel)) +
                      "(" + std::string(to_string(m.src.type)) + ", " +
                      std::string(to_string(m.dst.type)) + ") which the signature table rejects");
    }
    require_declared(m.src.field, "endpoint field");
    require_declared(m.dst.field, "endpoint field");
    for (const auto& [attr, field] : m.src.attributes) require_declared(field, "attribute field");
    for (const auto& [attr, field] : m.dst.attributes) require_declared(field, "attribute field");
  }
  for (const auto& r : spec.kind_inference) {
    require_declared(r.field, "inference field");
    if (!spec.event_kind_map.count(r.kind)) {
      throw Error(ErrorCode::InvalidSpec, spec.name + ": inference targets unknown kind '" + r.kind + "'");
    }
  }
}

void check_schema_evolution(const AdapterSpec& previous, const AdapterSpec& next) {
  validate_adapter_spec(next);
  auto pv = parse_version(previous.schema_version);
  auto nv = parse_version(next.schema_version);
  if (nv.first != pv.first || nv.second < pv.second) {
    throw Error(ErrorCode::IncompatibleSchema,
                "version " + next.schema_version + " does not evolve " + previous.schema_version);
  }
  for (const auto& [logical, aliases] : previous.logical_fields) {
    auto it = next.logical_fields.find(logical);
    if (it == next.logical_fields.end()) {
      if (!resolved_logical(next, logical)) {
        throw Error(ErrorCode::IncompatibleSchema,
                    "logical field '" + logical + "' removed without a deprecation alias");
      }
      continue;
    }
    for (const auto& raw : aliases) {
      if (std::find(it->second.begin(), it->second.end(), raw) == it->second.end()) {
        throw Error(ErrorCode::IncompatibleSchema, "raw name '" + raw + "' of '" + logical +
                                                       "' renamed without an alias mapping");
      }
    }
  }
}

AdapterSpec load_adapter_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read adapter spec " + path);
  try {
    return AdapterSpec::from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

namespace {

// Alias table shared by the two enterprise flavors. It covers the vendor
// renames applied by the perturbation levels (SubjectUserName,
// DestinationHostName, @timestamp, Computer).
AdapterSpec enterprise_adapter(const std::string& name) {
  AdapterSpec s;
  s.name = name;
  s.logical_fields = {
      {"event_id", {"event_id", "EventRecordID"}},
      {"ts", {"ts", "@timestamp", "timestamp", "TimeCreated"}},
      {"event", {"event", "event_type", "EventType"}},
      {"user", {"user", "SubjectUserName", "TargetUserName", "user_name"}},
      {"src_host", {"src_host", "Computer", "WorkstationName"}},
      {"dst_host", {"dst_host", "DestinationHostName", "TargetServerName"}},
      {"user_group", {"user_group", "ou"}},
      {"host_group", {"host_group", "site"}},
      {"process", {"process", "image", "NewProcessName"}},
      {"dest_ip", {"dest_ip", "DestinationIp", "remote_ip"}},
      {"dest_port", {"dest_port", "DestinationPort"}},
      {"logon_type", {"logon_type", "LogonType"}},
  };
  s.event_kind_map["logon"] = {RelationshipType::AuthenticatesTo,
                               {"user", EntityType::User, {{"community", "user_group"}}},
                               {"dst_host", EntityType::Host, {{"community", "host_group"}}}};
  s.event_kind_map["exec"] = {RelationshipType::Executes,
                              {"user", EntityType::User, {{"community", "user_group"}}},
                              {"process", EntityType::Process, {}}};
  s.event_kind_map["connect"] = {RelationshipType::ConnectsTo,
                                 {"src_host", EntityType::Host, {{"community", "host_group"}}},
                                 {"dest_ip", EntityType::ExternalEntity, {}}};
  // Event-kind recovery from per-kind sidecar columns when the label column is gone.
  s.kind_inference = {{"process", "exec"}, {"dest_ip", "connect"}, {"logon_type", "logon"}};
  s.timestamp_formats = {TimestampFormat::EpochSeconds, TimestampFormat::Iso8601};
  s.required_fields = {"ts", "user", "dst_host", "src_host"};
  validate_adapter_spec(s);
  return s;
}

}  // namespace

const AdapterSpec& env_a_adapter() {
  static const AdapterSpec s = enterprise_adapter("envA");
  return s;
}

const AdapterSpec& env_b_adapter() {
  static const AdapterSpec s = enterprise_adapter("envB");
  return s;
}

const AdapterSpec& provenance_adapter() {
  static const AdapterSpec s = [] {
    AdapterSpec a;
    a.name = "prov";
    a.logical_fields = {{"event_id", {"event_id", "uuid"}},
                        {"ts", {"ts", "timestampNanos", "@timestamp"}},
                        {"event", {"event", "type"}},
                        {"host", {"host", "hostname"}},
                        {"subject", {"subject", "subject_path"}},
                        {"object", {"object", "object_path", "remote_address"}}};
    a.event_kind_map["exec"] = {RelationshipType::Executes,
                                {"host", EntityType::Host, {}},
                                {"object", EntityType::Process, {}}};
    a.event_kind_map["spawn"] = {RelationshipType::Spawns,
                                 {"subject", EntityType::Process, {}},
                                 {"object", EntityType::Process, {}}};
    a.event_kind_map["read"] = {RelationshipType::Reads,
                                {"subject", EntityType::Process, {}},
                                {"object", EntityType::File, {}}};
    a.event_kind_map["write"] = {RelationshipType::Writes,
                                 {"subject", EntityType::Process, {}},
                                 {"object", EntityType::File, {}}};
    a.event_kind_map["modify"] = {RelationshipType::Modifies,
                                  {"subject", EntityType::Process, {}},
                                  {"object", EntityType::File, {}}};
    a.event_kind_map["connect"] = {RelationshipType::ConnectsTo,
                                   {"subject", EntityType::Process, {}},
                                   {"object", EntityType::ExternalEntity, {}}};
    a.timestamp_formats = {TimestampFormat::EpochSeconds, TimestampFormat::Iso8601};
    a.required_fields = {"ts", "event", "subject", "object"};
    validate_adapter_spec(a);
    return a;
  }();
  return s;
}

AdapterSpec adapter_by_name(const std::string& name_or_path) {
  if (name_or_path == "envA") return env_a_adapter();
  if (name_or_path == "envB") return env_b_adapter();
  if (name_or_path == "prov") return provenance_adapter();
  return load_adapter_spec(name_or_path);
}

const ResolutionPolicy& default_resolution_policy() {
  static const ResolutionPolicy p = [] {
    ResolutionPolicy policy;
    auto& host = policy.rules[EntityType::Host];
    host.keys = {"dst_host", "src_host", "host", "hostname", "computer"};
    host.steps.strip_realm_prefix = true;
    host.steps.strip_suffixes = {".corp.local", ".local"};
    auto& user = policy.rules[EntityType::User];
    user.keys = {"user", "username"};
    user.steps.strip_realm_prefix = true;
    auto& proc = policy.rules[EntityType::Process];
    proc.keys = {"process", "subject", "object", "image"};
    proc.steps.strip_realm_prefix = true;  // Windows image paths reduce to the image name
    auto& file = policy.rules[EntityType::File];
    file.keys = {"object", "file", "path"};
    file.steps.lowercase = false;
    auto& ext = policy.rules[EntityType::ExternalEntity];
    ext.keys = {"dest_ip", "object", "remote_address"};
    return policy;
  }();
  return p;
}

std::optional<std::string> recover_field(const TelemetryRecord& rec, const std::string& logical,
                                         const AdapterSpec& spec) {
  const std::string* name = resolved_logical(spec, logical);
  if (!name) return std::nullopt;
  for (const auto& alias : spec.logical_fields.at(*name)) {
    auto it = rec.raw_fields.find(alias);
    if (it != rec.raw_fields.end() && !it->second.empty()) return it->second;
  }
  return std::nullopt;
}

namespace {

// Raw name that satisfied `logical`, for lineage notes.
std::string recovered_from(const TelemetryRecord& rec, const std::string& logical,
                           const AdapterSpec& spec) {
  const std::string* name = resolved_logical(spec, logical);
  if (!name) return {};
  for (const auto& alias : spec.logical_fields.at(*name)) {
    auto it = rec.raw_fields.find(alias);
    if (it != rec.raw_fields.end() && !it->second.empty()) return alias;
  }
  return {};
}

}  // namespace

AdaptResult adapt(const TelemetryRecord& rec, const AdapterSpec& spec,
                  const ResolutionPolicy& policy) {
  std::vector<std::string> notes;
  auto kind = recover_field(rec, spec.event_field, spec);
  if (!kind) {
    for (const auto& rule : spec.kind_inference) {
      if (recover_field(rec, rule.field, spec)) {
        kind = rule.kind;
        notes.push_back("infer:" + spec.event_field + "=" + rule.kind);
        break;
      }
    }
  }
  if (!kind) return Skipped{rec.line_no, "unknown event kind"};
  auto mapping_it = spec.event_kind_map.find(*kind);
  if (mapping_it == spec.event_kind_map.end()) return Skipped{rec.line_no, "unknown event kind"};
  const EventMapping& m = mapping_it->second;

  auto build = [&](const EndpointMapping& ep, const char* role) -> std::optional<CanonicalEntity> {
    auto surface = recover_field(rec, ep.field, spec);
    if (!surface) return std::nullopt;
    RawObservation obs{rec.producer, ep.type, {{ep.field, *surface}}};
    ResolutionOutcome res;
    try {
      res = resolve(obs, policy);
    } catch (const Error&) {
      return std::nullopt;
    }
    const std::string raw = recovered_from(rec, ep.field, spec);
    if (const std::string* logical = resolved_logical(spec, ep.field);
        logical && raw != spec.logical_fields.at(*logical).front()) {
      notes.push_back(std::string("alias:") + role + "." + ep.field + "<-" + raw);
    }
    CanonicalEntity e;
    e.id = res.canonical_id;
    e.type = ep.type;
    e.attributes["surface"] = *surface;
    for (const auto& [attr, field] : ep.attributes) {
      if (auto v = recover_field(rec, field, spec)) e.attributes[attr] = *v;
    }
    e.source_meta.push_back({rec.producer, {"adapter:" + spec.name, "resolve"}});
    e.validity = Interval::open_from(rec.t_e);
    e.lifecycle.state = LifecycleState::Active;
    e.lifecycle.transitions.push_back({LifecycleState::Created, LifecycleState::Active, rec.t_e});
    return e;
  };

  auto src = build(m.src, "src");
  if (!src) return Skipped{rec.line_no, "unresolvable src"};
  auto dst = build(m.dst, "dst");
  if (!dst) return Skipped{rec.line_no, "unresolvable dst"};

  CanonicalRelationship r;
  r.src = src->id;
  r.dst = dst->id;
  r.type = m.rel;
  if (auto id = recover_field(rec, spec.event_id_field, spec)) r.attributes["event_id"] = *id;
  r.time = Interval::point(rec.t_e);
  r.provenance.source_system = rec.producer;
  r.provenance.ingestion_time = rec.t_i;
  r.provenance.valid_time = Interval::point(rec.t_e);
  r.provenance.confidence = 1.0;
  r.provenance.lineage = {"adapter:" + spec.name, "resolve"};
  r.provenance.lineage.insert(r.provenance.lineage.end(), notes.begin(), notes.end());

  GraphDelta d;
  d.at = rec.t_e;
  d.entity_upserts.push_back(std::move(*src));
  if (dst->id != d.entity_upserts.front().id) d.entity_upserts.push_back(std::move(*dst));
  d.edge_inserts.push_back(std::move(r));
  return d;
}

std::size_t IngestReport::skipped_total() const {
  std::size_t n = 0;
  for (const auto& [reason, count] : skipped) n += count;
  return n;
}

json IngestReport::to_json() const {
  return json{{"records", records}, {"emitted", emitted}, {"skipped", skipped},
              {"skipped_total", skipped_total()}};
}

IngestResult ingest_file(const std::string& path, const AdapterSpec& spec,
                         const ResolutionPolicy& policy, const std::string& producer) {
  auto stream = parse_records(path, format_for_path(path), spec.time_binding(),
                              producer.empty() ? spec.name : producer);
  IngestResult out;
  out.report.records = stream.records.size() + stream.skipped.size();
  for (const auto& s : stream.skipped) ++out.report.skipped[s.reason];

  struct Pending {
    Timestamp t_e;
    std::size_t line_no;
    GraphDelta delta;
  };
  std::vector<Pending> pending;
  pending.reserve(stream.records.size());
  for (const auto& rec : stream.records) {
    auto res = adapt(rec, spec, policy);
    if (auto* d = std::get_if<GraphDelta>(&res)) {
      pending.push_back({rec.t_e, rec.line_no, std::move(*d)});
    } else {
      ++out.report.skipped[std::get<Skipped>(res).reason];
    }
  }
  std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return std::tie(a.t_e, a.line_no) < std::tie(b.t_e, b.line_no);
  });
  for (auto& p : pending) {
    try {
      out.graph.apply(p.delta);
      ++out.report.emitted;
    } catch (const Error& e) {
      ++out.report.skipped["rejected: " + std::string(to_string(e.code()))];
    }
  }
  return out;
}

}  // namespace csts
