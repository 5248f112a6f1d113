#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "csts/csv.hpp"

namespace csts {

enum class FieldRewrite { EpochToIso8601 };

/// A raw-schema edit. Within one application, format rewrites run first
/// (keyed by the incoming field name), then deletions, then renames.
struct PerturbationLevel {
  std::string name = "P0";
  std::map<std::string, std::string> rename_map;
  std::set<std::string> delete_set;
  std::map<std::string, FieldRewrite> format_rewrites;

  bool is_identity() const {
    return rename_map.empty() && delete_set.empty() && format_rewrites.empty();
  }
};

/// P0 identity; P1 renames user and dst_host; P2 adds the timestamp rename and
/// epoch-to-ISO rewrite; P3 adds deleting the event label and renaming src_host.
PerturbationLevel perturbation_level(std::string_view name);
const std::vector<std::string>& perturbation_level_names();

/// The edits of `to` that `from` does not already make, expressed against
/// `from`'s output, so that apply(increment(from,to), apply(from, x)) == apply(to, x).
PerturbationLevel increment(const PerturbationLevel& from, const PerturbationLevel& to);

void perturb_table(const PerturbationLevel& level, CsvTable& table);
nlohmann::json perturb_object(const PerturbationLevel& level, const nlohmann::json& record);

/// CSV or JSONL by extension; P0 copies bytes verbatim. Row count is preserved.
/// Throws IoFailure / UnknownFormat.
void perturb_file(const std::string& in_path, const std::string& out_path,
                  const PerturbationLevel& level);

}  // namespace csts
