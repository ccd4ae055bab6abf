#include "gpdc/errors.hpp"
#include "gpdc/harness.hpp"
#include "gpdc/policies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace gpdc {

namespace {

constexpr std::pair<Task, const char*> kTaskNames[] = {
    {Task::Estimation1D, "estimation-1d"},
    {Task::Gradient1D, "gradient-1d"},
    {Task::Elevation2D, "elevation-2d"},
    {Task::MaxSearch1D, "max-search-1d"},
    {Task::MaxSearchBenchmark, "max-search-benchmark"},
};

}  // namespace

const char* to_string(Task task) noexcept {
  for (const auto& [t, name] : kTaskNames) {
    if (t == task) return name;
  }
  return "?";
}

Task task_from_string(const std::string& name) {
  for (const auto& [t, n] : kTaskNames) {
    if (name == n) return t;
  }
  throw ConfigError("unknown task: " + name);
}

bool is_estimation_task(Task task) noexcept {
  return task == Task::Estimation1D || task == Task::Gradient1D || task == Task::Elevation2D;
}

void ExperimentConfig::apply_defaults() {
  if (widths.empty()) {
    switch (task) {
      case Task::Estimation1D:
        widths = {0, 0.0875, 0.175, 0.2625, 0.35, 0.4375, 0.525, 0.6125, 0.7};
        break;
      case Task::Gradient1D:
        widths = {0.02, 0.06, 0.12, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
        break;
      case Task::Elevation2D:
        widths = {0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4};
        break;
      default: break;
    }
  }
  if (grid_size == 0) {
    grid_size = (task == Task::Elevation2D || task == Task::MaxSearchBenchmark) ? 30 : 120;
  }
  if (candidates == 0 && task == Task::Elevation2D) candidates = 100;
}

namespace {

bool known_estimation_policy(const std::string& name) {
  if (name == "GP-DC" || name == "Random" || name == "VarMax") return true;
  if (name.rfind("VarMax@", 0) == 0) {
    double w = 0.0;
    const char* b = name.data() + 7;
    const char* e = name.data() + name.size();
    auto res = std::from_chars(b, e, w);
    return res.ec == std::errc() && res.ptr == e && w >= 0.0;
  }
  return false;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (replicas < 1) throw ConfigError("replicas must be >= 1");
  if (draws < 2) throw ConfigError("draws must be >= 2");
  if (grid_size != 0 && grid_size < 2) throw ConfigError("grid_size must be >= 2");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("noise must be a finite variance >= 0");
  if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("alpha must lie in (0, 2)");
  if (hyper_budget < 1) throw ConfigError("hyper_budget must be >= 1");
  if (interval_nodes < 2) throw ConfigError("interval_nodes must be >= 2");
  if (disk_degree < 1 || truth_disk_degree < 1) throw ConfigError("disk degrees must be >= 1");
  if (mes_samples < 1) throw ConfigError("mes_samples must be >= 1");
  if (policies.empty()) throw ConfigError("at least one policy is required");
  for (const auto& p : policies) {
    if (is_estimation_task(task)) {
      if (!known_estimation_policy(p)) throw ConfigError("unknown estimation policy: " + p);
    } else {
      try {
        (void)max_policy_from_string(p);
      } catch (const InvalidArgument&) {
        throw ConfigError("unknown max-search policy: " + p);
      }
    }
  }
  for (double w : widths) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("widths must be finite and >= 0");
    if (task == Task::Gradient1D && w == 0.0) throw ConfigError("gradient widths must be positive");
  }
  if (is_estimation_task(task) && widths.empty()) {
    throw ConfigError("width menu is empty (call apply_defaults or set widths)");
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text, std::size_t line) {
  T v{};
  const char* b = text.data();
  const char* e = text.data() + text.size();
  if (b != e && *b == '+') ++b;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) {
    throw ConfigError("line " + std::to_string(line) + ": invalid value for '" + key + "': " + text);
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text, std::size_t line) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("line " + std::to_string(line) + ": invalid boolean for '" + key + "': " + text);
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  using Setter = std::function<void(const std::string&, const std::string&, std::size_t)>;
  const std::vector<std::pair<std::string, Setter>> setters = {
      {"task", [&](auto&, auto& v, auto) { cfg.task = task_from_string(v); }},
      {"policies", [&](auto&, auto& v, auto) { cfg.policies = split_list(v); }},
      {"steps", [&](auto& k, auto& v, auto n) { cfg.steps = parse_number<int>(k, v, n); }},
      {"replicas", [&](auto& k, auto& v, auto n) { cfg.replicas = parse_number<int>(k, v, n); }},
      {"draws", [&](auto& k, auto& v, auto n) { cfg.draws = parse_number<int>(k, v, n); }},
      {"grid_size", [&](auto& k, auto& v, auto n) { cfg.grid_size = parse_number<std::size_t>(k, v, n); }},
      {"widths",
       [&](auto& k, auto& v, auto n) {
         cfg.widths.clear();
         for (const auto& item : split_list(v)) cfg.widths.push_back(parse_number<double>(k, item, n));
       }},
      {"seed", [&](auto& k, auto& v, auto n) { cfg.seed = parse_number<std::uint64_t>(k, v, n); }},
      {"noise", [&](auto& k, auto& v, auto n) { cfg.noise = parse_number<double>(k, v, n); }},
      {"output", [&](auto&, auto& v, auto) { cfg.output = v; }},
      {"alpha", [&](auto& k, auto& v, auto n) { cfg.alpha = parse_number<double>(k, v, n); }},
      {"candidates", [&](auto& k, auto& v, auto n) { cfg.candidates = parse_number<std::size_t>(k, v, n); }},
      {"grid_file", [&](auto&, auto& v, auto) { cfg.grid_file = v; }},
      {"benchmark",
       [&](auto&, auto& v, auto n) {
         try {
           cfg.benchmark = benchmark_from_string(v);
         } catch (const InvalidArgument&) {
           throw ConfigError("line " + std::to_string(n) + ": unknown benchmark: " + v);
         }
       }},
      {"hyper_budget", [&](auto& k, auto& v, auto n) { cfg.hyper_budget = parse_number<int>(k, v, n); }},
      {"interval_nodes", [&](auto& k, auto& v, auto n) { cfg.interval_nodes = parse_number<int>(k, v, n); }},
      {"disk_degree", [&](auto& k, auto& v, auto n) { cfg.disk_degree = parse_number<int>(k, v, n); }},
      {"truth_disk_degree",
       [&](auto& k, auto& v, auto n) { cfg.truth_disk_degree = parse_number<int>(k, v, n); }},
      {"mes_samples", [&](auto& k, auto& v, auto n) { cfg.mes_samples = parse_number<int>(k, v, n); }},
      {"timing", [&](auto& k, auto& v, auto n) { cfg.timing = parse_bool(k, v, n); }},
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = std::find_if(setters.begin(), setters.end(), [&](const auto& s) { return s.first == key; });
    if (it == setters.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    try {
      it->second(key, value, line_no);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.apply_defaults();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

}  // namespace gpdc
