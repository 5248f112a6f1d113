#include "csts/perturb.hpp"

#include <fstream>
#include <sstream>

#include "csts/adapter.hpp"
#include "csts/error.hpp"
#include "csts/timefmt.hpp"

namespace csts {

using nlohmann::json;

PerturbationLevel perturbation_level(std::string_view name) {
  PerturbationLevel l;
  l.name = std::string(name);
  if (name == "P0") return l;
  if (name != "P1" && name != "P2" && name != "P3") {
    throw Error(ErrorCode::ParseError, "unknown perturbation level '" + l.name + "'");
  }
  l.rename_map = {{"user", "SubjectUserName"}, {"dst_host", "DestinationHostName"}};
  if (name == "P1") return l;
  l.rename_map["ts"] = "@timestamp";
  l.format_rewrites["ts"] = FieldRewrite::EpochToIso8601;
  if (name == "P2") return l;
  l.delete_set.insert("event");
  l.rename_map["src_host"] = "Computer";
  return l;
}

const std::vector<std::string>& perturbation_level_names() {
  static const std::vector<std::string> names = {"P0", "P1", "P2", "P3"};
  return names;
}

PerturbationLevel increment(const PerturbationLevel& from, const PerturbationLevel& to) {
  PerturbationLevel d;
  d.name = to.name + "-" + from.name;
  auto renamed = [&](const std::string& f) {
    auto it = from.rename_map.find(f);
    return it == from.rename_map.end() ? f : it->second;
  };
  for (const auto& [src, dst] : to.rename_map) {
    auto it = from.rename_map.find(src);
    if (it == from.rename_map.end()) {
      d.rename_map[src] = dst;
    } else if (it->second != dst) {
      d.rename_map[it->second] = dst;
    }
  }
  for (const auto& f : to.delete_set) {
    if (!from.delete_set.count(f)) d.delete_set.insert(renamed(f));
  }
  for (const auto& [f, rule] : to.format_rewrites) {
    if (!from.format_rewrites.count(f)) d.format_rewrites[renamed(f)] = rule;
  }
  return d;
}

namespace {

std::string rewrite(FieldRewrite rule, const std::string& value) {
  switch (rule) {
    case FieldRewrite::EpochToIso8601:
      if (auto t = parse_epoch_seconds(value)) return format_iso8601(*t);
      return value;
  }
  return value;
}

}  // namespace

void perturb_table(const PerturbationLevel& level, CsvTable& table) {
  for (const auto& [field, rule] : level.format_rewrites) {
    int c = table.column(field);
    if (c < 0) continue;
    for (auto& row : table.rows) {
      if (static_cast<std::size_t>(c) < row.size()) row[c] = rewrite(rule, row[c]);
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (!level.delete_set.count(table.header[i])) keep.push_back(i);
  }
  auto project = [&](const std::vector<std::string>& row) {
    std::vector<std::string> out;
    out.reserve(keep.size());
    for (auto i : keep) out.push_back(i < row.size() ? row[i] : std::string());
    return out;
  };
  table.header = project(table.header);
  for (auto& row : table.rows) row = project(row);
  for (auto& h : table.header) {
    if (auto it = level.rename_map.find(h); it != level.rename_map.end()) h = it->second;
  }
}

json perturb_object(const PerturbationLevel& level, const json& record) {
  json out = json::object();
  for (const auto& [key, value] : record.items()) {
    if (level.delete_set.count(key)) continue;
    json v = value;
    if (auto it = level.format_rewrites.find(key); it != level.format_rewrites.end()) {
      const std::string raw = v.is_string() ? v.get<std::string>() : v.dump();
      const std::string rewritten = rewrite(it->second, raw);
      if (rewritten != raw) v = rewritten;
    }
    auto rn = level.rename_map.find(key);
    out[rn == level.rename_map.end() ? key : rn->second] = std::move(v);
  }
  return out;
}

void perturb_file(const std::string& in_path, const std::string& out_path,
                  const PerturbationLevel& level) {
  const RecordFormat format = format_for_path(in_path);
  if (level.is_identity()) {
    std::ifstream in(in_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + in_path);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + out_path);
    out << in.rdbuf();
    return;
  }
  if (format == RecordFormat::Csv) {
    CsvTable t = read_csv(in_path);
    perturb_table(level, t);
    write_csv(out_path, t);
    return;
  }
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + in_path);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + out_path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      // Unparseable lines pass through so row count is conserved.
      out << line << '\n';
      continue;
    }
    out << (j.is_object() ? perturb_object(level, j) : j).dump() << '\n';
  }
}

}  // namespace csts
