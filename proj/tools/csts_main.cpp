// csts: end-to-end experiment driver.
//
//   csts repro --config configs/default.json --out out
//   csts perturb --level P2 --in env_b.csv --out env_b.p2.csv
//   csts viability --train a.csv --test b.csv
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 viability gate.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "csts/adapter.hpp"
#include "csts/error.hpp"
#include "csts/experiment.hpp"
#include "csts/graph_io.hpp"
#include "csts/perturb.hpp"

namespace {

constexpr int kOk = 0, kUsage = 1, kDataError = 2, kGateFailure = 3;

struct Common {
  std::string config = CSTS_DEFAULT_CONFIG;
  std::string out;
  std::optional<std::uint64_t> seed;

  csts::ExperimentConfig load() const {
    auto c = csts::load_config(config);
    if (seed) c.override_seed(*seed);
    if (!out.empty()) c.out_dir = out;
    return c;
  }
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config, "experiment configuration (JSON)");
  cmd->add_option("--out", common.out, "output directory (overrides out_dir)");
  cmd->add_option("--seed", common.seed, "overrides the configured seed");
}

int report_viability(const csts::ViabilityReport& r, const std::string& label) {
  fmt::print("{}: tau={:.4f} test above={}/{} verdict={}\n", label, r.tau, r.test_windows_above,
             r.n_test_windows, r.viable ? "viable" : "not-viable");
  return r.viable ? kOk : kGateFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Canonical security telemetry substrate: experiment driver"};
  app.require_subcommand(1);
  Common common;

  auto* synth = app.add_subcommand("synth", "generate EnvA/EnvB telemetry and producer fixtures");
  add_common(synth, common);

  auto* perturb = app.add_subcommand("perturb", "apply schema perturbation levels");
  add_common(perturb, common);
  std::string level, in_path;
  perturb->add_option("--level", level, "single level (P0..P3) for --in");
  perturb->add_option("--in", in_path, "raw file to perturb; --out is then the output file");

  auto* ingest = app.add_subcommand("ingest", "canonicalize raw telemetry into delta logs");
  add_common(ingest, common);
  std::string adapter = "envB", graph_path;
  ingest->add_option("--in", in_path, "single raw file");
  ingest->add_option("--adapter", adapter, "envA | envB | prov | path to spec JSON");
  ingest->add_option("--graph", graph_path, "delta log output for --in");

  auto* features = app.add_subcommand("features", "window feature matrices for both pipelines");
  add_common(features, common);
  auto* eval = app.add_subcommand("eval", "transfer and robustness evaluation");
  add_common(eval, common);
  auto* diagnose = app.add_subcommand("diagnose", "semantic orientation diagnostic");
  add_common(diagnose, common);

  auto* viability = app.add_subcommand("viability", "train-only threshold viability protocol");
  add_common(viability, common);
  std::string train_csv, test_csv;
  viability->add_option("--train", train_csv, "train producer file (prov flavor)");
  viability->add_option("--test", test_csv, "test producer file (prov flavor)");

  auto* repro = app.add_subcommand("repro", "run every stage and write tables/");
  add_common(repro, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (perturb->parsed() && !in_path.empty()) {
      if (level.empty() || common.out.empty()) {
        fmt::print(stderr, "perturb --in needs --level and --out\n");
        return kUsage;
      }
      csts::perturb_file(in_path, common.out, csts::perturbation_level(level));
      return kOk;
    }
    if (ingest->parsed() && !in_path.empty()) {
      if (graph_path.empty()) {
        fmt::print(stderr, "ingest --in needs --graph\n");
        return kUsage;
      }
      auto r = csts::ingest_file(in_path, csts::adapter_by_name(adapter),
                                 csts::default_resolution_policy());
      csts::write_delta_log(graph_path, r.graph);
      fmt::print("{}\n", r.report.to_json().dump());
      return kOk;
    }
    if (viability->parsed() && (!train_csv.empty() || !test_csv.empty())) {
      if (train_csv.empty() || test_csv.empty()) {
        fmt::print(stderr, "viability needs both --train and --test\n");
        return kUsage;
      }
      csts::ViabilitySettings s;
      if (std::filesystem::exists(common.config)) s = common.load().viability.settings;
      const auto r = csts::viability_from_files(train_csv, test_csv, s);
      fmt::print("{}\n", r.to_json().dump(2));
      return report_viability(r, "viability");
    }

    const auto c = common.load();
    if (synth->parsed()) csts::stage_synth(c);
    if (perturb->parsed()) csts::stage_perturb(c);
    if (ingest->parsed()) csts::stage_ingest(c);
    if (features->parsed()) csts::stage_features(c);
    if (eval->parsed()) {
      for (const auto& r : csts::stage_eval(c)) {
        fmt::print("{:<4} {:<10} {:<8} {} {:<14} f1@0.5={:.3f} best_f1={:.3f} auroc={:.3f}\n",
                   r.task, r.setting, r.method, r.level, r.status, r.f1_at_05, r.best_f1,
                   r.auroc);
      }
    }
    if (diagnose->parsed()) fmt::print("{}\n", csts::stage_diagnose(c).dump(2));
    if (viability->parsed()) {
      const auto o = csts::stage_viability(c);
      report_viability(o.control, "control");
      return report_viability(o.divergence, "divergence");
    }
    if (repro->parsed()) {
      csts::run_repro(c);
      fmt::print("wrote {}/tables\n", c.out_dir);
    }
    return kOk;
  } catch (const csts::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return e.code() == csts::ErrorCode::ViabilityGateFailure ? kGateFailure : kDataError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kDataError;
  }
}
