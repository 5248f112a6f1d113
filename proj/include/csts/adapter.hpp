#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "csts/graph.hpp"
#include "csts/identity.hpp"
#include "csts/timefmt.hpp"

namespace csts {

/// Version of the canonical substrate schema adapters must declare compatibility with.
inline constexpr const char* kSubstrateSchemaVersion = "1.0";

struct TelemetryRecord {
  std::string producer;
  std::map<std::string, std::string> raw_fields;
  Timestamp t_e = 0;
  Timestamp t_i = 0;
  std::size_t line_no = 0;
};

struct Skipped {
  std::size_t line_no = 0;
  std::string reason;
};

enum class RecordFormat { Csv, Jsonl };

/// Format from file extension (.csv / .jsonl); throws UnknownFormat.
RecordFormat format_for_path(const std::string& path);

/// Where the event timestamp lives and how it may be encoded.
struct TimeBinding {
  std::vector<std::string> aliases;
  std::vector<TimestampFormat> formats;
};

struct RecordStream {
  std::vector<std::string> columns;  // CSV header, or sorted key union for JSONL
  std::vector<TelemetryRecord> records;
  std::vector<Skipped> skipped;
};

/// Records in file order, line_no counted from the first data line (1-based);
/// t_i is a monotone per-file counter. Lines whose timestamp parses under no
/// declared format are Skipped("timestamp"). Throws IoFailure.
RecordStream parse_records(const std::string& path, RecordFormat format, const TimeBinding& time,
                           const std::string& producer);

struct EndpointMapping {
  std::string field;  // logical field holding the surface identifier
  EntityType type = EntityType::Host;
  std::map<std::string, std::string> attributes;  // entity attribute -> logical field
};

struct EventMapping {
  RelationshipType rel = RelationshipType::AssociatedWith;
  EndpointMapping src;
  EndpointMapping dst;
};

/// When the event-kind column is absent, the first rule whose field is
/// present decides the kind.
struct KindInference {
  std::string field;
  std::string kind;
};

struct AdapterSpec {
  std::string name;
  std::string schema_version = kSubstrateSchemaVersion;
  std::map<std::string, std::vector<std::string>> logical_fields;  // logical -> raw aliases
  std::string event_field = "event";
  std::string time_field = "ts";
  std::string event_id_field = "event_id";
  std::map<std::string, EventMapping> event_kind_map;
  std::vector<KindInference> kind_inference;
  std::vector<TimestampFormat> timestamp_formats;
  std::vector<std::string> required_fields;
  std::map<std::string, std::string> deprecated;  // removed logical field -> replacement

  TimeBinding time_binding() const;

  static AdapterSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Load-time checks: signature-compatible event typing, schema-version
/// compatibility with the substrate, required fields declared (or deprecated
/// with a declared replacement). Throws InvalidSpec / IncompatibleSchema.
void validate_adapter_spec(const AdapterSpec& spec);

/// Governance rules between releases of one adapter: additive changes pass,
/// dropped raw aliases (renames without alias) and removed logical fields
/// without a deprecation alias throw IncompatibleSchema.
void check_schema_evolution(const AdapterSpec& previous, const AdapterSpec& next);

AdapterSpec load_adapter_spec(const std::string& path);

const AdapterSpec& env_a_adapter();
const AdapterSpec& env_b_adapter();
const AdapterSpec& provenance_adapter();
/// "envA", "envB", "prov", or a path to a JSON spec.
AdapterSpec adapter_by_name(const std::string& name_or_path);

const ResolutionPolicy& default_resolution_policy();

/// First alias present (non-empty) in declared order; nullopt when none is.
std::optional<std::string> recover_field(const TelemetryRecord& rec, const std::string& logical,
                                         const AdapterSpec& spec);

using AdaptResult = std::variant<GraphDelta, Skipped>;

/// Maps one record to a delta (src/dst upserts + one provenance-carrying edge)
/// or to a categorized skip. Never throws on record content.
AdaptResult adapt(const TelemetryRecord& rec, const AdapterSpec& spec,
                  const ResolutionPolicy& policy);

struct IngestReport {
  std::size_t records = 0;
  std::size_t emitted = 0;
  std::map<std::string, std::size_t> skipped;  // reason -> count

  std::size_t skipped_total() const;
  nlohmann::json to_json() const;
};

struct IngestResult {
  SubstrateGraph graph;
  IngestReport report;
};

/// Parse, adapt, order deltas by (t_e, line_no) and apply.
IngestResult ingest_file(const std::string& path, const AdapterSpec& spec,
                         const ResolutionPolicy& policy, const std::string& producer = "");

}  // namespace csts
