#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "csts/types.hpp"

namespace csts {

enum class Task { LM, ZDT };

std::string_view to_string(Task t);
Task parse_task(std::string_view name);

/// Surface-form generator plus raw column layout of one vendor flavor.
enum class NamingScheme { EnvA, EnvB };

struct EnvProfile {
  std::string name = "EnvA";
  std::vector<int> users_per_community{8, 8, 8, 8, 8};
  std::vector<int> hosts_per_community{6, 6, 6, 6, 6};
  double benign_rate = 0.5;       // events per user-hour (population mean)
  double rate_sigma = 0.0;        // lognormal spread of the per-user rate multiplier
  double benign_diversity = 0.02; // chance a benign logon leaves the user's community
  double mix_logon = 0.5, mix_exec = 0.3, mix_connect = 0.2;
  int day_start_hour = 7;         // [0, day_start) is off-hours
  double night_factor = 1.0;      // off-hours rate multiplier (1 = flat)
  double day_factor = 1.0;
  int n_external = 15;            // benign external endpoint pool
  int fanout_hosts = 0;           // service hosts with many outbound contacts per window
  double fanout_day_rate = 0.0;   // mean contacts per service host per window
  double fanout_night_rate = 0.0;
  NamingScheme naming = NamingScheme::EnvA;
  std::uint64_t seed = 0;

  int n_users() const;
  int n_hosts() const;
  int community_of_user(int u) const;
  int community_of_host(int h) const;
  int first_host(int community) const;

  static EnvProfile from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct InjectionSpec {
  Task task = Task::LM;
  int n_campaigns = 0;              // LM
  int chain_length = 3;             // LM
  Timestamp dwell = 20 * 60;        // LM, seconds
  double target_positive_rate = 0;  // ZDT, fraction of windows
  int burst_size = 12;              // ZDT contacts per anomalous window
  int attack_hour_lo = 0;           // injections start within [lo, hi) hour of day
  int attack_hour_hi = 24;

  static InjectionSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct SynthEvent {
  Timestamp ts = 0;
  std::string kind;  // logon | exec | connect
  int user = -1;
  int src_host = -1;
  int dst_host = -1;
  std::string process;
  std::string external;
  int port = 0;
  std::optional<Task> attack;
  std::string event_id;  // assigned after ordering
};

struct WindowLabel {
  Timestamp window_start = 0;
  Task task = Task::LM;
  int label = 0;
  std::vector<std::string> event_ids;
};

struct GeneratedEnv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<SynthEvent> events;
  std::vector<WindowLabel> labels;
};

struct SynthClock {
  Timestamp origin = 1704067200;  // 2024-01-01T00:00:00Z
  Timestamp window = 30 * 60;
};

/// Benign activity: per-user Poisson process (diurnally modulated) over the
/// user's community hosts, leaving the community with probability
/// benign_diversity; service hosts add per-window outbound fan-out.
std::vector<SynthEvent> generate_benign(const EnvProfile& p, int duration_hours,
                                        const SynthClock& clock, std::mt19937_64& rng);

/// Appends LM campaigns: each picks one user and chain_length distinct hosts
/// outside its community, authenticating to and executing on each within the
/// dwell, all inside a single window. Throws InfeasibleInjection.
void inject_lateral_movement(std::vector<SynthEvent>& events, const EnvProfile& p,
                             const InjectionSpec& spec, int duration_hours,
                             const SynthClock& clock, std::mt19937_64& rng);

/// Appends ZDT bursts in exactly round(rate * n_windows) distinct windows:
/// one host contacting burst_size never-before-used external endpoints.
void inject_flow_anomalies(std::vector<SynthEvent>& events, const EnvProfile& p,
                           const InjectionSpec& spec, int duration_hours, const SynthClock& clock,
                           std::mt19937_64& rng);

/// Full environment: benign + injections, ordered, ids assigned, raw rows in
/// the profile's flavor, and per-window labels for every injected task.
/// Deterministic per profile seed.
GeneratedEnv generate_env(const EnvProfile& p, const std::vector<InjectionSpec>& injections,
                          int duration_hours, const SynthClock& clock = {});

void write_env(const GeneratedEnv& env, const std::string& csv_path,
               const std::string& labels_path);

nlohmann::json to_json(const WindowLabel& l);
WindowLabel window_label_from_json(const nlohmann::json& j);
std::vector<WindowLabel> read_labels(const std::string& path);

/// Provenance-style producer for the novelty/viability fixtures. Tokens per
/// channel are Zipf draws over a fixed vocabulary; head_only > 0 restricts
/// draws to the `head_only` most frequent tokens.
struct ProducerProfile {
  std::string name = "edr-x";
  int n_windows = 0;
  Timestamp start = 1704067200;
  Timestamp window = 30 * 60;
  double process_per_window = 12;
  double file_per_window = 20;
  double network_per_window = 6;
  int process_vocab = 40;
  int file_vocab = 60;
  int network_vocab = 30;
  double zipf_s = 1.1;
  int head_only = 0;
  std::vector<int> windows_without_process;
  std::uint64_t seed = 0;

  static ProducerProfile from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Rows in the "prov" flavor: event_id,ts,event,host,subject,object.
void write_producer_fixture(const ProducerProfile& p, const std::string& csv_path);

}  // namespace csts
