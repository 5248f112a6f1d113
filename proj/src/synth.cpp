#include "csts/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "csts/csv.hpp"
#include "csts/error.hpp"

namespace csts {

using nlohmann::json;

std::string_view to_string(Task t) { return t == Task::LM ? "LM" : "ZDT"; }

Task parse_task(std::string_view name) {
  if (name == "LM") return Task::LM;
  if (name == "ZDT") return Task::ZDT;
  throw Error(ErrorCode::ParseError, "unknown task '" + std::string(name) + "'");
}

int EnvProfile::n_users() const {
  return std::accumulate(users_per_community.begin(), users_per_community.end(), 0);
}

int EnvProfile::n_hosts() const {
  return std::accumulate(hosts_per_community.begin(), hosts_per_community.end(), 0);
}

namespace {

int block_of(const std::vector<int>& sizes, int idx) {
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (idx < sizes[c]) return static_cast<int>(c);
    idx -= sizes[c];
  }
  throw Error(ErrorCode::InvalidSpec, "index outside every community");
}

int block_start(const std::vector<int>& sizes, int c) {
  return std::accumulate(sizes.begin(), sizes.begin() + c, 0);
}

}  // namespace

int EnvProfile::community_of_user(int u) const { return block_of(users_per_community, u); }
int EnvProfile::community_of_host(int h) const { return block_of(hosts_per_community, h); }
int EnvProfile::first_host(int community) const {
  return block_start(hosts_per_community, community);
}

EnvProfile EnvProfile::from_json(const json& j) {
  EnvProfile p;
  p.name = j.value("name", p.name);
  p.users_per_community = j.value("users_per_community", p.users_per_community);
  p.hosts_per_community = j.value("hosts_per_community", p.hosts_per_community);
  p.benign_rate = j.value("benign_rate", p.benign_rate);
  p.rate_sigma = j.value("rate_sigma", p.rate_sigma);
  p.benign_diversity = j.value("benign_diversity", p.benign_diversity);
  p.mix_logon = j.value("mix_logon", p.mix_logon);
  p.mix_exec = j.value("mix_exec", p.mix_exec);
  p.mix_connect = j.value("mix_connect", p.mix_connect);
  p.day_start_hour = j.value("day_start_hour", p.day_start_hour);
  p.night_factor = j.value("night_factor", p.night_factor);
  p.day_factor = j.value("day_factor", p.day_factor);
  p.n_external = j.value("n_external", p.n_external);
  p.fanout_hosts = j.value("fanout_hosts", p.fanout_hosts);
  p.fanout_day_rate = j.value("fanout_day_rate", p.fanout_day_rate);
  p.fanout_night_rate = j.value("fanout_night_rate", p.fanout_night_rate);
  const std::string naming = j.value("naming", std::string("EnvA"));
  if (naming == "EnvA") {
    p.naming = NamingScheme::EnvA;
  } else if (naming == "EnvB") {
    p.naming = NamingScheme::EnvB;
  } else {
    throw Error(ErrorCode::InvalidSpec, "unknown naming scheme '" + naming + "'");
  }
  p.seed = j.value("seed", p.seed);
  if (p.users_per_community.size() != p.hosts_per_community.size() ||
      p.users_per_community.empty()) {
    throw Error(ErrorCode::InvalidSpec, p.name + ": every community needs users and hosts");
  }
  if (!(p.benign_diversity >= 0.0 && p.benign_diversity < 1.0)) {
    throw Error(ErrorCode::InvalidSpec, p.name + ": benign_diversity must lie in [0,1)");
  }
  if (p.fanout_hosts > p.n_hosts()) {
    throw Error(ErrorCode::InvalidSpec, p.name + ": more fan-out hosts than hosts");
  }
  return p;
}

json EnvProfile::to_json() const {
  return json{{"name", name},
              {"users_per_community", users_per_community},
              {"hosts_per_community", hosts_per_community},
              {"benign_rate", benign_rate},
              {"rate_sigma", rate_sigma},
              {"benign_diversity", benign_diversity},
              {"mix_logon", mix_logon},
              {"mix_exec", mix_exec},
              {"mix_connect", mix_connect},
              {"day_start_hour", day_start_hour},
              {"night_factor", night_factor},
              {"day_factor", day_factor},
              {"n_external", n_external},
              {"fanout_hosts", fanout_hosts},
              {"fanout_day_rate", fanout_day_rate},
              {"fanout_night_rate", fanout_night_rate},
              {"naming", naming == NamingScheme::EnvA ? "EnvA" : "EnvB"},
              {"seed", seed}};
}

InjectionSpec InjectionSpec::from_json(const json& j) {
  InjectionSpec s;
  s.task = parse_task(j.at("task").get<std::string>());
  s.n_campaigns = j.value("n_campaigns", s.n_campaigns);
  s.chain_length = j.value("chain_length", s.chain_length);
  s.dwell = j.value("dwell_seconds", s.dwell);
  s.target_positive_rate = j.value("target_positive_rate", s.target_positive_rate);
  s.burst_size = j.value("burst_size", s.burst_size);
  s.attack_hour_lo = j.value("attack_hour_lo", s.attack_hour_lo);
  s.attack_hour_hi = j.value("attack_hour_hi", s.attack_hour_hi);
  return s;
}

json InjectionSpec::to_json() const {
  return json{{"task", std::string(csts::to_string(task))},
              {"n_campaigns", n_campaigns},
              {"chain_length", chain_length},
              {"dwell_seconds", dwell},
              {"target_positive_rate", target_positive_rate},
              {"burst_size", burst_size},
              {"attack_hour_lo", attack_hour_lo},
              {"attack_hour_hi", attack_hour_hi}};
}

namespace {

const std::vector<std::string> kBenignProcesses = {
    "outlook.exe", "chrome.exe", "teams.exe",  "excel.exe",   "winword.exe",  "explorer.exe",
    "svchost.exe", "onedrive.exe", "cmd.exe", "powershell.exe", "acrord32.exe", "notepad.exe"};
const std::string kLateralTool = "psexesvc.exe";

// Disjoint address blocks per (scheme, purpose) keep surface forms from ever
// colliding across environments or across benign/injected traffic.
enum class ExtPool { Benign, Fanout, Burst };

std::string external_address(NamingScheme s, ExtPool pool, int k) {
  int first = 0, second = 0;
  if (s == NamingScheme::EnvA) {
    first = 198;
    second = pool == ExtPool::Benign ? 18 : pool == ExtPool::Fanout ? 19 : 51;
  } else {
    first = 100;
    second = pool == ExtPool::Benign ? 64 : pool == ExtPool::Fanout ? 80 : 96;
  }
  return fmt::format("{}.{}.{}.{}", first, second + k / 62500, (k / 250) % 250, k % 250 + 1);
}

Timestamp n_windows_for(int duration_hours, const SynthClock& clock) {
  return static_cast<Timestamp>(duration_hours) * 3600 / clock.window;
}

int hour_of_day(Timestamp t) { return static_cast<int>(((t % 86400) + 86400) % 86400 / 3600); }

int poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0) return 0;
  return std::poisson_distribution<int>(mean)(rng);
}

int primary_host(const EnvProfile& p, int u) {
  const int c = p.community_of_user(u);
  const int local = u - block_start(p.users_per_community, c);
  return p.first_host(c) + local % p.hosts_per_community[c];
}

std::vector<Timestamp> eligible_windows(int duration_hours, const SynthClock& clock, int lo,
                                        int hi) {
  std::vector<Timestamp> out;
  for (Timestamp w = 0; w < n_windows_for(duration_hours, clock); ++w) {
    const int h = hour_of_day(clock.origin + w * clock.window);
    if (h >= lo && h < hi) out.push_back(w);
  }
  return out;
}

std::vector<Timestamp> pick_windows(std::vector<Timestamp> pool, std::size_t n,
                                    std::mt19937_64& rng, const char* what) {
  if (n > pool.size()) {
    throw Error(ErrorCode::InfeasibleInjection,
                fmt::format("{}: {} windows requested, {} eligible", what, n, pool.size()));
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(n);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

}  // namespace

std::vector<SynthEvent> generate_benign(const EnvProfile& p, int duration_hours,
                                        const SynthClock& clock, std::mt19937_64& rng) {
  std::vector<SynthEvent> out;
  const int n_users = p.n_users(), n_hosts = p.n_hosts();
  std::uniform_int_distribution<Timestamp> second_of_hour(0, 3599);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_host(0, n_hosts - 1);
  std::uniform_int_distribution<int> any_ext(0, std::max(p.n_external, 1) - 1);
  const double mix_total = p.mix_logon + p.mix_exec + p.mix_connect;

  for (int u = 0; u < n_users; ++u) {
    double m = 1.0;
    if (p.rate_sigma > 0) {
      m = std::lognormal_distribution<double>(-0.5 * p.rate_sigma * p.rate_sigma,
                                              p.rate_sigma)(rng);
    }
    const int c = p.community_of_user(u);
    const int home = primary_host(p, u);
    std::uniform_int_distribution<int> community_host(p.first_host(c),
                                                      p.first_host(c) + p.hosts_per_community[c] - 1);
    // Each user favors a rotated slice of the process catalogue.
    std::discrete_distribution<int> process_pick = [&] {
      std::vector<double> w(kBenignProcesses.size());
      for (std::size_t i = 0; i < w.size(); ++i) {
        w[(i + u) % w.size()] = 1.0 / static_cast<double>(i + 1);
      }
      return std::discrete_distribution<int>(w.begin(), w.end());
    }();

    for (int h = 0; h < duration_hours; ++h) {
      const Timestamp hour_start = clock.origin + static_cast<Timestamp>(h) * 3600;
      const double f = hour_of_day(hour_start) < p.day_start_hour ? p.night_factor : p.day_factor;
      const int n = poisson(rng, p.benign_rate * m * f);
      for (int i = 0; i < n; ++i) {
        SynthEvent e;
        e.ts = hour_start + second_of_hour(rng);
        e.user = u;
        e.src_host = home;
        const double r = unit(rng) * mix_total;
        if (r < p.mix_logon) {
          e.kind = "logon";
          e.dst_host = unit(rng) < p.benign_diversity ? any_host(rng) : community_host(rng);
        } else if (r < p.mix_logon + p.mix_exec) {
          e.kind = "exec";
          e.process = kBenignProcesses[process_pick(rng)];
        } else {
          e.kind = "connect";
          e.user = -1;
          e.external = external_address(p.naming, ExtPool::Benign, any_ext(rng));
          e.port = unit(rng) < 0.8 ? 443 : 80;
        }
        out.push_back(std::move(e));
      }
    }
  }

  if (p.fanout_hosts > 0) {
    std::uniform_int_distribution<int> fanout_ext(0, 49999);
    std::uniform_int_distribution<Timestamp> in_window(0, clock.window - 1);
    for (Timestamp w = 0; w < n_windows_for(duration_hours, clock); ++w) {
      const Timestamp ws = clock.origin + w * clock.window;
      const bool night = hour_of_day(ws) < p.day_start_hour;
      for (int k = 0; k < p.fanout_hosts; ++k) {
        const int host = n_hosts - 1 - k;
        const int n = poisson(rng, night ? p.fanout_night_rate : p.fanout_day_rate);
        for (int i = 0; i < n; ++i) {
          SynthEvent e;
          e.ts = ws + in_window(rng);
          e.kind = "connect";
          e.src_host = host;
          e.external = external_address(p.naming, ExtPool::Fanout, fanout_ext(rng));
          e.port = 443;
          out.push_back(std::move(e));
        }
      }
    }
  }
  return out;
}

void inject_lateral_movement(std::vector<SynthEvent>& events, const EnvProfile& p,
                             const InjectionSpec& spec, int duration_hours,
                             const SynthClock& clock, std::mt19937_64& rng) {
  if (spec.n_campaigns <= 0) return;
  if (spec.chain_length < 1 || spec.dwell <= 0 || spec.dwell > clock.window) {
    throw Error(ErrorCode::InfeasibleInjection, "LM dwell must fit inside one window");
  }
  auto windows = pick_windows(
      eligible_windows(duration_hours, clock, spec.attack_hour_lo, spec.attack_hour_hi),
      static_cast<std::size_t>(spec.n_campaigns), rng, "LM");
  std::uniform_int_distribution<int> any_user(0, p.n_users() - 1);
  std::uniform_int_distribution<Timestamp> offset(0, clock.window - spec.dwell);
  const Timestamp hop_span = spec.dwell / spec.chain_length;
  std::uniform_int_distribution<Timestamp> jitter(0, std::max<Timestamp>(hop_span - 31, 0));

  for (Timestamp w : windows) {
    const int u = any_user(rng);
    const int c = p.community_of_user(u);
    std::vector<int> outside;
    for (int h = 0; h < p.n_hosts(); ++h) {
      if (p.community_of_host(h) != c) outside.push_back(h);
    }
    if (static_cast<int>(outside.size()) < spec.chain_length + 1) {
      throw Error(ErrorCode::InfeasibleInjection,
                  fmt::format("user {} has {} hosts outside its community, chain needs {}", u,
                              outside.size(), spec.chain_length + 1));
    }
    std::shuffle(outside.begin(), outside.end(), rng);
    const Timestamp start = clock.origin + w * clock.window + offset(rng);
    int prev = primary_host(p, u);
    for (int i = 0; i < spec.chain_length; ++i) {
      const Timestamp t = start + i * hop_span + jitter(rng);
      SynthEvent logon;
      logon.ts = t;
      logon.kind = "logon";
      logon.user = u;
      logon.src_host = prev;
      logon.dst_host = outside[i];
      logon.attack = Task::LM;
      SynthEvent exec;
      exec.ts = t + 30;
      exec.kind = "exec";
      exec.user = u;
      exec.src_host = outside[i];
      exec.process = kLateralTool;
      exec.attack = Task::LM;
      events.push_back(std::move(logon));
      events.push_back(std::move(exec));
      prev = outside[i];
    }
  }
}

void inject_flow_anomalies(std::vector<SynthEvent>& events, const EnvProfile& p,
                           const InjectionSpec& spec, int duration_hours, const SynthClock& clock,
                           std::mt19937_64& rng) {
  const auto n_windows = n_windows_for(duration_hours, clock);
  const auto n = static_cast<std::size_t>(
      std::llround(spec.target_positive_rate * static_cast<double>(n_windows)));
  if (n == 0) return;
  auto windows = pick_windows(
      eligible_windows(duration_hours, clock, spec.attack_hour_lo, spec.attack_hour_hi), n, rng,
      "ZDT");
  std::uniform_int_distribution<int> any_host(0, p.n_hosts() - 1 - p.fanout_hosts);
  std::uniform_int_distribution<Timestamp> in_window(0, clock.window - 1);
  const int ports[] = {4444, 8443, 6667, 1337};
  std::uniform_int_distribution<int> port_pick(0, 3);
  int fresh = 0;
  for (Timestamp w : windows) {
    const int host = any_host(rng);
    const Timestamp ws = clock.origin + w * clock.window;
    for (int i = 0; i < spec.burst_size; ++i) {
      SynthEvent e;
      e.ts = ws + in_window(rng);
      e.kind = "connect";
      e.src_host = host;
      e.external = external_address(p.naming, ExtPool::Burst, fresh++);
      e.port = ports[port_pick(rng)];
      e.attack = Task::ZDT;
      events.push_back(std::move(e));
    }
  }
}

namespace {

std::vector<std::string> header_for(NamingScheme s) {
  if (s == NamingScheme::EnvA) {
    return {"event_id", "ts",         "event",   "user",    "src_host",  "dst_host",
            "user_group", "host_group", "process", "dest_ip", "dest_port", "logon_type"};
  }
  return {"event_id", "ts", "src_host", "event", "logon_type", "user", "dst_host",
          "ou",       "site", "image",  "dest_ip", "dest_port", "severity"};
}

std::vector<std::string> format_row(const SynthEvent& e, const EnvProfile& p) {
  const bool a = p.naming == NamingScheme::EnvA;
  auto user = [&](int u) {
    return u < 0 ? std::string() : a ? fmt::format("u{:04d}", u) : fmt::format("CORP\\U{:04d}", u);
  };
  auto host = [&](int h) {
    return h < 0 ? std::string()
           : a   ? fmt::format("wks{:04d}", h)
                 : fmt::format("WKS{:04d}.CORP.LOCAL", h);
  };
  auto group = [&](int c) { return a ? fmt::format("grp{}", c) : fmt::format("Grp-{:02d}", c); };

  std::string user_group, host_group, process, dest_ip, dest_port, logon_type;
  if (e.user >= 0) user_group = group(p.community_of_user(e.user));
  if (e.kind == "logon") {
    host_group = group(p.community_of_host(e.dst_host));
    logon_type = "3";
  } else if (e.kind == "exec") {
    process = a ? e.process : "C:\\Windows\\System32\\" + upper(e.process);
  } else {
    host_group = group(p.community_of_host(e.src_host));
    dest_ip = e.external;
    dest_port = std::to_string(e.port);
  }
  const std::string ts = std::to_string(e.ts);
  if (a) {
    return {e.event_id,  ts,         e.kind,  user(e.user), host(e.src_host), host(e.dst_host),
            user_group,  host_group, process, dest_ip,      dest_port,        logon_type};
  }
  return {e.event_id, ts,         host(e.src_host), e.kind,  logon_type, user(e.user),
          host(e.dst_host), user_group, host_group, process, dest_ip, dest_port,
          e.attack ? "high" : "info"};
}

}  // namespace

GeneratedEnv generate_env(const EnvProfile& p, const std::vector<InjectionSpec>& injections,
                          int duration_hours, const SynthClock& clock) {
  GeneratedEnv env;
  env.header = header_for(p.naming);
  if (duration_hours < 0) throw Error(ErrorCode::InvalidSpec, "negative duration");
  std::mt19937_64 rng(p.seed);
  auto events = generate_benign(p, duration_hours, clock, rng);
  for (const auto& inj : injections) {
    if (inj.task == Task::LM) {
      inject_lateral_movement(events, p, inj, duration_hours, clock, rng);
    } else {
      inject_flow_anomalies(events, p, inj, duration_hours, clock, rng);
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const SynthEvent& x, const SynthEvent& y) { return x.ts < y.ts; });
  const char prefix = p.naming == NamingScheme::EnvA ? 'a' : 'b';
  for (std::size_t i = 0; i < events.size(); ++i) {
    events[i].event_id = fmt::format("{}{:07d}", prefix, i + 1);
    env.rows.push_back(format_row(events[i], p));
  }

  std::vector<Task> tasks;
  for (const auto& inj : injections) {
    if (std::find(tasks.begin(), tasks.end(), inj.task) == tasks.end()) tasks.push_back(inj.task);
  }
  const auto n_windows = n_windows_for(duration_hours, clock);
  for (Task t : tasks) {
    std::vector<WindowLabel> labels(static_cast<std::size_t>(n_windows));
    for (Timestamp w = 0; w < n_windows; ++w) {
      labels[w].window_start = clock.origin + w * clock.window;
      labels[w].task = t;
    }
    for (const auto& e : events) {
      if (e.attack != t) continue;
      auto w = (e.ts - clock.origin) / clock.window;
      if (w < 0 || w >= n_windows) continue;
      labels[w].label = 1;
      labels[w].event_ids.push_back(e.event_id);
    }
    env.labels.insert(env.labels.end(), labels.begin(), labels.end());
  }
  env.events = std::move(events);
  return env;
}

json to_json(const WindowLabel& l) {
  return json{{"window_start", l.window_start},
              {"task", std::string(to_string(l.task))},
              {"label", l.label},
              {"event_ids", l.event_ids}};
}

WindowLabel window_label_from_json(const json& j) {
  WindowLabel l;
  l.window_start = j.at("window_start").get<Timestamp>();
  l.task = parse_task(j.at("task").get<std::string>());
  l.label = j.at("label").get<int>();
  l.event_ids = j.value("event_ids", std::vector<std::string>{});
  return l;
}

void write_env(const GeneratedEnv& env, const std::string& csv_path,
               const std::string& labels_path) {
  write_csv(csv_path, CsvTable{env.header, env.rows});
  std::ofstream out(labels_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + labels_path);
  for (const auto& l : env.labels) out << to_json(l).dump() << '\n';
}

std::vector<WindowLabel> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingArtifact, "labels file " + path);
  std::vector<WindowLabel> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(window_label_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
  }
  return out;
}

ProducerProfile ProducerProfile::from_json(const json& j) {
  ProducerProfile p;
  p.name = j.value("name", p.name);
  p.n_windows = j.value("n_windows", p.n_windows);
  p.start = j.value("start", p.start);
  p.window = j.value("window_seconds", p.window);
  p.process_per_window = j.value("process_per_window", p.process_per_window);
  p.file_per_window = j.value("file_per_window", p.file_per_window);
  p.network_per_window = j.value("network_per_window", p.network_per_window);
  p.process_vocab = j.value("process_vocab", p.process_vocab);
  p.file_vocab = j.value("file_vocab", p.file_vocab);
  p.network_vocab = j.value("network_vocab", p.network_vocab);
  p.zipf_s = j.value("zipf_s", p.zipf_s);
  p.head_only = j.value("head_only", p.head_only);
  p.windows_without_process = j.value("windows_without_process", p.windows_without_process);
  p.seed = j.value("seed", p.seed);
  return p;
}

json ProducerProfile::to_json() const {
  return json{{"name", name},
              {"n_windows", n_windows},
              {"start", start},
              {"window_seconds", window},
              {"process_per_window", process_per_window},
              {"file_per_window", file_per_window},
              {"network_per_window", network_per_window},
              {"process_vocab", process_vocab},
              {"file_vocab", file_vocab},
              {"network_vocab", network_vocab},
              {"zipf_s", zipf_s},
              {"head_only", head_only},
              {"windows_without_process", windows_without_process},
              {"seed", seed}};
}

void write_producer_fixture(const ProducerProfile& p, const std::string& csv_path) {
  std::mt19937_64 rng(p.seed);
  auto zipf = [&](int vocab) {
    const int n = p.head_only > 0 ? std::min(p.head_only, vocab) : vocab;
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) w[r] = std::pow(static_cast<double>(r + 1), -p.zipf_s);
    return std::discrete_distribution<int>(w.begin(), w.end());
  };
  auto proc_pick = zipf(p.process_vocab);
  auto file_pick = zipf(p.file_vocab);
  auto net_pick = zipf(p.network_vocab);
  std::uniform_int_distribution<Timestamp> in_window(0, p.window - 1);
  std::uniform_int_distribution<int> coin(0, 1), file_op(0, 2);
  const char* file_ops[] = {"read", "write", "modify"};

  struct Row {
    Timestamp ts;
    std::vector<std::string> cells;
  };
  std::vector<Row> rows;
  auto proc = [](int r) { return fmt::format("/usr/bin/p{:03d}", r); };
  for (int w = 0; w < p.n_windows; ++w) {
    const Timestamp ws = p.start + static_cast<Timestamp>(w) * p.window;
    const bool no_process = std::find(p.windows_without_process.begin(),
                                      p.windows_without_process.end(),
                                      w) != p.windows_without_process.end();
    const int np = no_process ? 0 : poisson(rng, p.process_per_window);
    for (int i = 0; i < np; ++i) {
      if (coin(rng)) {
        rows.push_back({ws + in_window(rng), {"exec", "host01", "", proc(proc_pick(rng))}});
      } else {
        rows.push_back(
            {ws + in_window(rng), {"spawn", "host01", proc(proc_pick(rng)), proc(proc_pick(rng))}});
      }
    }
    const int nf = poisson(rng, p.file_per_window);
    for (int i = 0; i < nf; ++i) {
      rows.push_back({ws + in_window(rng),
                      {file_ops[file_op(rng)], "host01", proc(proc_pick(rng)),
                       fmt::format("/var/data/f{:03d}", file_pick(rng))}});
    }
    const int nn = poisson(rng, p.network_per_window);
    for (int i = 0; i < nn; ++i) {
      const int r = net_pick(rng);
      rows.push_back({ws + in_window(rng),
                      {"connect", "host01", proc(proc_pick(rng)),
                       fmt::format("10.20.{}.{}", r / 250, r % 250 + 1)}});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.ts < b.ts; });
  CsvTable t;
  t.header = {"event_id", "ts", "event", "host", "subject", "object"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& c = rows[i].cells;
    t.rows.push_back({fmt::format("{}-{:06d}", p.name, i + 1), std::to_string(rows[i].ts), c[0],
                      c[1], c[2], c[3]});
  }
  write_csv(csv_path, t);
}

}  // namespace csts
