#include "csts/identity.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "csts/error.hpp"

namespace csts {

namespace {

std::string trimmed(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string normalize_once(std::string s, const NormalizationSteps& steps) {
  if (steps.trim) s = trimmed(s);
  if (steps.strip_realm_prefix) {
    if (auto pos = s.find_last_of('\\'); pos != std::string::npos) s = s.substr(pos + 1);
  }
  if (steps.lowercase) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  for (bool stripped = true; stripped;) {
    stripped = false;
    for (std::string suffix : steps.strip_suffixes) {
      if (steps.lowercase) {
        std::transform(suffix.begin(), suffix.end(), suffix.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      }
      if (!suffix.empty() && s.size() > suffix.size() && s.ends_with(suffix)) {
        s.resize(s.size() - suffix.size());
        stripped = true;
      }
    }
  }
  return s;
}

std::string describe(const NormalizationSteps& steps) {
  std::string out;
  auto add = [&](const std::string& s) { out += (out.empty() ? "" : ",") + s; };
  if (steps.trim) add("trim");
  if (steps.strip_realm_prefix) add("strip_realm");
  if (steps.lowercase) add("lowercase");
  for (const auto& s : steps.strip_suffixes) add("strip_suffix(" + s + ")");
  return out;
}

}  // namespace

std::string normalize(std::string_view surface, const NormalizationSteps& steps) {
  std::string cur(surface);
  for (;;) {
    std::string next = normalize_once(cur, steps);
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

ResolutionPolicy ResolutionPolicy::from_json(const nlohmann::json& j) {
  ResolutionPolicy p;
  for (const auto& [type_name, body] : j.items()) {
    TypeResolutionRule rule;
    rule.keys = body.at("keys").get<std::vector<std::string>>();
    rule.steps.trim = body.value("trim", true);
    rule.steps.lowercase = body.value("lowercase", true);
    rule.steps.strip_realm_prefix = body.value("strip_realm_prefix", false);
    rule.steps.strip_suffixes = body.value("strip_suffixes", std::vector<std::string>{});
    if (rule.keys.empty()) {
      throw Error(ErrorCode::InvalidSpec, type_name + ": resolution rule needs at least one key");
    }
    if (body.contains("aliases")) {
      for (const auto& [surface, id] : body.at("aliases").items()) {
        rule.aliases[normalize(surface, rule.steps)] = id.get<std::string>();
      }
    }
    p.rules[parse_entity_type(type_name)] = std::move(rule);
  }
  return p;
}

nlohmann::json ResolutionPolicy::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [type, rule] : rules) {
    j[std::string(csts::to_string(type))] = {{"keys", rule.keys},
                                             {"trim", rule.steps.trim},
                                             {"lowercase", rule.steps.lowercase},
                                             {"strip_realm_prefix", rule.steps.strip_realm_prefix},
                                             {"strip_suffixes", rule.steps.strip_suffixes},
                                             {"aliases", rule.aliases}};
  }
  return j;
}

ResolutionPolicy load_resolution_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read policy " + path);
  try {
    return ResolutionPolicy::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

ResolutionOutcome resolve(const RawObservation& o, const ResolutionPolicy& p) {
  auto rule_it = p.rules.find(o.entity_hint);
  if (rule_it == p.rules.end()) {
    throw Error(ErrorCode::UnresolvableObservation,
                "no resolution rule for " + std::string(to_string(o.entity_hint)));
  }
  const auto& rule = rule_it->second;
  for (const auto& key : rule.keys) {
    auto f = o.raw_fields.find(key);
    if (f == o.raw_fields.end()) continue;
    std::string norm = normalize(f->second, rule.steps);
    if (norm.empty()) continue;
    ResolutionOutcome out;
    out.matched_key = key;
    if (auto a = rule.aliases.find(norm); a != rule.aliases.end()) {
      out.canonical_id = a->second;
      out.lineage_note = "key=" + key + ";steps=" + describe(rule.steps) + ";alias=hit";
    } else {
      out.canonical_id = std::string(id_prefix(o.entity_hint)) + ":" + norm;
      out.lineage_note = "key=" + key + ";steps=" + describe(rule.steps) + ";alias=miss";
    }
    return out;
  }
  throw Error(ErrorCode::UnresolvableObservation,
              std::string(to_string(o.entity_hint)) + " observation from '" + o.producer +
                  "' carries none of the candidate key fields");
}

GraphDelta merge_delta(const SubstrateGraph& g, const std::string& keep, const std::string& absorb,
                       Timestamp at) {
  const auto* k = g.find(keep);
  const auto* a = g.find(absorb);
  if (!k) throw Error(ErrorCode::UnknownEntity, keep);
  if (!a) throw Error(ErrorCode::UnknownEntity, absorb);
  if (k->type != a->type) {
    throw Error(ErrorCode::TypeMismatch, keep + " is " + std::string(to_string(k->type)) + ", " +
                                             absorb + " is " + std::string(to_string(a->type)));
  }
  GraphDelta d;
  d.at = at;
  if (!g.delta_log().empty()) d.at = std::max(d.at, g.delta_log().back().at);
  d.merges.push_back({keep, absorb});
  return d;
}

SubstrateGraph merge_identities(SubstrateGraph g, const std::string& keep,
                                const std::string& absorb, Timestamp at) {
  g.apply(merge_delta(g, keep, absorb, at));
  return g;
}

}  // namespace csts
