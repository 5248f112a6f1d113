#include "csts/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "csts/adapter.hpp"
#include "csts/csv.hpp"
#include "csts/error.hpp"
#include "csts/graph_io.hpp"
#include "csts/hash.hpp"
#include "csts/perturb.hpp"

namespace csts {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Seed offsets per random stream.
constexpr std::uint64_t kEnvASeed = 1, kEnvBSeed = 2, kProducerSeed = 3, kDivergentSeed = 4,
                        kControlTrainSeed = 5, kControlTestSeed = 6;

EnvConfig env_from_json(const json& j) {
  EnvConfig e;
  e.profile = EnvProfile::from_json(j.value("profile", json::object()));
  for (const auto& inj : j.value("injections", json::array())) {
    e.injections.push_back(InjectionSpec::from_json(inj));
  }
  return e;
}

void write_text(const std::string& path, const std::string& text) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::MissingArtifact, path);
}

json read_json(const std::string& path) {
  require_file(path);
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

SubstrateGraph load_graph(const std::string& path) {
  require_file(path);
  return replay(read_delta_log(path));
}

FeatureMatrix load_matrix(const std::string& stem) {
  require_file(stem + ".csv");
  require_file(stem + ".json");
  return read_feature_matrix(stem);
}

std::string env_label(const std::string& env) { return env == "env_a" ? "EnvA" : "EnvB"; }

const char* kSettingIn = "EnvA->EnvA";
const char* kSettingCross = "EnvA->EnvB";

Split split_a(const ExperimentConfig& c) {
  return time_split("EnvA", c.n_windows(), c.train_fraction, c.indexer());
}

WindowIndexer producer_indexer(const ProducerProfile& p, const ViabilitySettings& s) {
  return WindowIndexer{p.start, static_cast<Timestamp>(s.window_minutes) * 60};
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  c.source = j;
  c.seed = j.value("seed", c.seed);
  c.duration_hours = j.value("duration_hours", c.duration_hours);
  c.window_minutes = j.value("window_minutes", c.window_minutes);
  c.train_fraction = j.value("train_fraction", c.train_fraction);
  if (c.window_minutes <= 0 || c.duration_hours < 0 || c.train_fraction <= 0 ||
      c.train_fraction >= 1) {
    throw Error(ErrorCode::InvalidSpec, "window_minutes > 0, duration_hours >= 0, 0 < train_fraction < 1");
  }
  c.env_a = env_from_json(j.value("env_a", json::object()));
  c.env_b = env_from_json(j.value("env_b", json::object()));
  c.levels = j.value("levels", c.levels);
  for (const auto& l : c.levels) perturbation_level(l);
  if (j.contains("tasks")) {
    c.tasks.clear();
    for (const auto& t : j["tasks"]) c.tasks.push_back(parse_task(t.get<std::string>()));
  }
  c.classifier = ClassifierSpec::from_json(j.value("classifier", json::object()));
  const json boot = j.value("bootstrap", json::object());
  c.eval.bootstrap_b = boot.value("B", c.eval.bootstrap_b);
  if (c.eval.bootstrap_b < 100) throw Error(ErrorCode::InvalidSpec, "bootstrap B must be >= 100");
  const json v = j.value("viability", json::object());
  auto& s = c.viability.settings;
  s.q = v.value("q", s.q);
  s.gate = v.value("gate", s.gate);
  s.window_minutes = v.value("window_minutes", s.window_minutes);
  if (v.contains("channels")) {
    s.channels.clear();
    for (const auto& ch : v["channels"]) s.channels.insert(parse_channel(ch.get<std::string>()));
  }
  c.viability.train = ProducerProfile::from_json(v.value("train", json::object()));
  c.viability.divergent = ProducerProfile::from_json(v.value("divergent", json::object()));
  c.viability.control_train = ProducerProfile::from_json(v.value("control_train", json::object()));
  c.viability.control_test = ProducerProfile::from_json(v.value("control_test", json::object()));
  c.out_dir = j.value("out_dir", c.out_dir);
  c.override_seed(c.seed);
  return c;
}

void ExperimentConfig::override_seed(std::uint64_t s) {
  seed = s;
  eval.bootstrap_seed = s;
  env_a.profile.seed = s + kEnvASeed;
  env_b.profile.seed = s + kEnvBSeed;
  viability.train.seed = s + kProducerSeed;
  viability.divergent.seed = s + kDivergentSeed;
  viability.control_train.seed = s + kControlTrainSeed;
  viability.control_test.seed = s + kControlTestSeed;
  if (!source.is_null()) source["seed"] = s;
}

std::string ExperimentConfig::fingerprint() const { return csts::fingerprint(source.dump()); }

WindowId ExperimentConfig::n_windows() const {
  return static_cast<WindowId>(duration_hours) * 60 / window_minutes;
}

WindowIndexer ExperimentConfig::indexer() const {
  return WindowIndexer{SynthClock{}.origin, static_cast<Timestamp>(window_minutes) * 60};
}

ExperimentConfig load_config(const std::string& path) {
  return ExperimentConfig::from_json(read_json(path));
}

json provenance_stamp(const ExperimentConfig& c) {
  return json{{"config", c.source}, {"config_fingerprint", c.fingerprint()}, {"version", kVersion}};
}

std::string Layout::raw(const std::string& env, const std::string& level) const {
  return level == "P0" ? fmt::format("{}/raw/{}.csv", root, env)
                       : fmt::format("{}/raw/{}.{}.csv", root, env, level);
}
std::string Layout::labels(const std::string& env) const {
  return fmt::format("{}/raw/{}.labels.jsonl", root, env);
}
std::string Layout::producer(const std::string& name) const {
  return fmt::format("{}/raw/producer_{}.csv", root, name);
}
std::string Layout::graph(const std::string& env, const std::string& level) const {
  return fmt::format("{}/graphs/{}.{}.jsonl", root, env, level);
}
std::string Layout::ingest_report(const std::string& env, const std::string& level) const {
  return fmt::format("{}/graphs/{}.{}.ingest.json", root, env, level);
}
std::string Layout::matrix(const std::string& pipeline, Task task, const std::string& env,
                           const std::string& level) const {
  return fmt::format("{}/features/{}_{}_{}.{}", root, pipeline, to_string(task), env, level);
}
std::string Layout::report(const std::string& name) const {
  return fmt::format("{}/reports/{}", root, name);
}
std::string Layout::table(const std::string& name) const {
  return fmt::format("{}/tables/{}", root, name);
}

void stage_synth(const ExperimentConfig& c) {
  const Layout L{c.out_dir};
  for (const auto& [name, env] : {std::pair{"env_a", &c.env_a}, std::pair{"env_b", &c.env_b}}) {
    const GeneratedEnv g = generate_env(env->profile, env->injections, c.duration_hours);
    fs::create_directories(fs::path(L.raw(name)).parent_path());
    write_env(g, L.raw(name), L.labels(name));
  }
  const auto& v = c.viability;
  for (const auto& [name, p] : {std::pair{"train", &v.train}, std::pair{"divergent", &v.divergent},
                                std::pair{"control_train", &v.control_train},
                                std::pair{"control_test", &v.control_test}}) {
    write_producer_fixture(*p, L.producer(name));
  }
}

void stage_perturb(const ExperimentConfig& c) {
  const Layout L{c.out_dir};
  require_file(L.raw("env_b"));
  for (const auto& level : c.levels) {
    if (level == "P0") continue;
    perturb_file(L.raw("env_b"), L.raw("env_b", level), perturbation_level(level));
  }
}

void stage_ingest(const ExperimentConfig& c) {
  const Layout L{c.out_dir};
  auto ingest = [&](const std::string& env, const std::string& level, const AdapterSpec& spec) {
    const std::string in = L.raw(env, level);
    require_file(in);
    IngestResult r = ingest_file(in, spec, default_resolution_policy(), env_label(env));
    fs::create_directories(fs::path(L.graph(env, level)).parent_path());
    write_delta_log(L.graph(env, level), r.graph);
    write_json(L.ingest_report(env, level), r.report.to_json());
  };
  ingest("env_a", "P0", env_a_adapter());
  for (const auto& level : c.levels) ingest("env_b", level, env_b_adapter());
}

void stage_features(const ExperimentConfig& c) {
  const Layout L{c.out_dir};
  const WindowIndexer idx = c.indexer();
  const WindowId n = c.n_windows();
  const Split split = split_a(c);
  const auto labels_a = read_labels(L.labels("env_a"));
  const auto labels_b = read_labels(L.labels("env_b"));
  const SubstrateGraph ga = load_graph(L.graph("env_a", "P0"));
  const TrainHistory hist = TrainHistory::fit(ga, split);
  require_file(L.raw("env_a"));
  const CsvTable raw_a = read_csv(L.raw("env_a"));

  auto csts_matrix = [&](Task task, const SubstrateGraph& g, const std::vector<WindowLabel>& labels,
                         const std::string& env) {
    return task == Task::LM ? csts_lm_matrix(g, hist, split, idx, n, labels, env)
                            : csts_zdt_matrix(g, hist, split, idx, n, labels, env);
  };
  auto write_baseline = [&](Task task, const CsvTable& raw, const std::vector<WindowLabel>& labels,
                            const std::string& env, const std::string& level) {
    const std::string stem = L.matrix("baseline", task, env, level);
    for (const char* ext : {".csv", ".json", ".error.json"}) fs::remove(stem + ext);
    try {
      write_feature_matrix(
          baseline_matrix(raw, baseline_binding(task), idx, n, labels, task, env_label(env)), stem);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MissingColumn) throw;
      write_json(stem + ".error.json", {{"code", std::string(to_string(e.code()))},
                                        {"detail", e.what()}});
    }
  };

  std::vector<std::pair<std::string, SubstrateGraph>> graphs_b;
  for (const auto& level : c.levels) graphs_b.emplace_back(level, load_graph(L.graph("env_b", level)));

  for (Task task : c.tasks) {
    fs::create_directories(fs::path(L.matrix("csts", task, "env_a")).parent_path());
    write_feature_matrix(csts_matrix(task, ga, labels_a, "EnvA"), L.matrix("csts", task, "env_a"));
    write_baseline(task, raw_a, labels_a, "env_a", "P0");
    for (const auto& [level, gb] : graphs_b) {
      write_feature_matrix(csts_matrix(task, gb, labels_b, "EnvB"),
                           L.matrix("csts", task, "env_b", level));
      require_file(L.raw("env_b", level));
      write_baseline(task, read_csv(L.raw("env_b", level)), labels_b, "env_b", level);
    }
  }
}

namespace {

struct Matrices {
  FeatureMatrix train, test_a;
};

Matrices split_matrix(const FeatureMatrix& m, const Split& s) {
  return {m.windows(s.train_begin, s.train_end), m.windows(s.test_begin, s.test_end)};
}

}  // namespace

std::vector<EvalReport> stage_eval(const ExperimentConfig& c) {
  const Layout L{c.out_dir};
  const Split split = split_a(c);
  std::vector<EvalReport> all;
  json stamped = provenance_stamp(c);
  for (Task task : c.tasks) {
    std::vector<EvalReport> transfer, robustness;
    for (const std::string pipeline : {"baseline", "csts"}) {
      const auto a = split_matrix(load_matrix(L.matrix(pipeline, task, "env_a")), split);
      transfer.push_back(evaluate(a.train, a.test_a, c.classifier, c.eval, kSettingIn));
    }
    for (const auto& level : c.levels) {
      for (const std::string pipeline : {"baseline", "csts"}) {
        const std::string stem = L.matrix(pipeline, task, "env_b", level);
        EvalReport r;
        if (fs::exists(stem + ".error.json")) {
          r = schema_failure_report(std::string(to_string(task)), kSettingCross, pipeline, level,
                                    read_json(stem + ".error.json").value("detail", ""));
        } else {
          const auto a = split_matrix(load_matrix(L.matrix(pipeline, task, "env_a")), split);
          r = evaluate(a.train, load_matrix(stem), c.classifier, c.eval, kSettingCross, level);
        }
        if (level == "P0") transfer.push_back(r);
        robustness.push_back(r);
      }
    }
    const std::string t = task == Task::LM ? "lm" : "zdt";
    write_text(L.table(t + "_transfer.csv"), reports_csv(transfer));
    if (task == Task::LM) write_text(L.table("lm_robustness.csv"), reports_csv(robustness));
    stamped[t + "_transfer"] = reports_json(transfer);
    stamped[t + "_robustness"] = reports_json(robustness);
    all.insert(all.end(), transfer.begin(), transfer.end());
    for (const auto& r : robustness) {
      if (r.level != "P0") all.push_back(r);
    }
  }
  write_json(L.report("eval.json"), stamped);
  return all;
}

json stage_diagnose(const ExperimentConfig& c) {
  const Layout L{c.out_dir};
  const Split split = split_a(c);
  json out = provenance_stamp(c);
  for (Task task : c.tasks) {
    const auto a = split_matrix(load_matrix(L.matrix("csts", task, "env_a")), split);
    const FeatureMatrix b = load_matrix(L.matrix("csts", task, "env_b", "P0"));
    const auto model = train_logistic(a.train.X(), a.train.y(), c.classifier);
    const Eigen::VectorXd scores = model.predict_proba(b.X());
    out[std::string(to_string(task))] = orientation_diagnostic(a.train, b, scores).to_json();
  }
  write_json(L.table("orientation.json"), out);
  return out;
}

namespace {

std::vector<WindowTokens> producer_windows(const std::string& csv, const WindowIndexer& idx,
                                           SubstrateGraph* keep = nullptr) {
  require_file(csv);
  IngestResult r = ingest_file(csv, provenance_adapter(), default_resolution_policy(), "prov");
  auto w = window_tokens(r.graph, idx);
  if (keep) *keep = std::move(r.graph);
  return w;
}

ViabilityReport producer_pair(const std::string& train_csv, const std::string& test_csv,
                              const WindowIndexer& train_idx, const WindowIndexer& test_idx,
                              const ViabilitySettings& s) {
  SubstrateGraph g;
  const auto train = producer_windows(train_csv, train_idx, &g);
  if (train.empty()) throw Error(ErrorCode::EmptySupport, train_csv + " has no windows");
  const TrainHistory hist = fit_token_history(g, train_idx);
  const auto test = producer_windows(test_csv, test_idx);
  return viability_protocol(train, test, hist, s);
}

}  // namespace

ViabilityReport viability_from_files(const std::string& train_csv, const std::string& test_csv,
                                     const ViabilitySettings& s) {
  const WindowIndexer idx{SynthClock{}.origin, static_cast<Timestamp>(s.window_minutes) * 60};
  return producer_pair(train_csv, test_csv, idx, idx, s);
}

ViabilityOutcome stage_viability(const ExperimentConfig& c) {
  const Layout L{c.out_dir};
  const auto& v = c.viability;
  ViabilityOutcome o;
  o.divergence = producer_pair(L.producer("train"), L.producer("divergent"),
                               producer_indexer(v.train, v.settings),
                               producer_indexer(v.divergent, v.settings), v.settings);
  o.control = producer_pair(L.producer("control_train"), L.producer("control_test"),
                            producer_indexer(v.control_train, v.settings),
                            producer_indexer(v.control_test, v.settings), v.settings);
  json out = provenance_stamp(c);
  json d = o.divergence.to_json();
  d["train_producer"] = v.train.name;
  d["test_producer"] = v.divergent.name;
  json ctl = o.control.to_json();
  ctl["train_producer"] = v.control_train.name;
  ctl["test_producer"] = v.control_test.name;
  ctl["test_fraction_above"] =
      o.control.n_test_windows == 0
          ? 0.0
          : static_cast<double>(o.control.test_windows_above) / o.control.n_test_windows;
  out["divergence"] = d;
  out["control"] = ctl;
  write_json(L.table("viability.json"), out);
  return o;
}

void run_repro(const ExperimentConfig& c) {
  stage_synth(c);
  stage_perturb(c);
  stage_ingest(c);
  stage_features(c);
  stage_eval(c);
  stage_diagnose(c);
  stage_viability(c);
  write_json(Layout{c.out_dir}.table("manifest.json"), provenance_stamp(c));
}

}  // namespace csts
