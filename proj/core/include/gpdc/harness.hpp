#pragma once

#include "gpdc/kernels.hpp"
#include "gpdc/problems.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gpdc {

enum class Task { Estimation1D, Gradient1D, Elevation2D, MaxSearch1D, MaxSearchBenchmark };

[[nodiscard]] const char* to_string(Task task) noexcept;
[[nodiscard]] Task task_from_string(const std::string& name);
[[nodiscard]] bool is_estimation_task(Task task) noexcept;

struct ExperimentConfig {
  Task task = Task::Estimation1D;
  std::vector<std::string> policies;
  int steps = 33;  ///< policy-driven observations after the initial ones
  int replicas = 1;
  int draws = 200;             ///< M
  std::size_t grid_size = 0;    ///< N in 1-D, mesh side in 2-D; 0 picks the task default
  std::vector<double> widths;   ///< width or radius menu (estimation tasks)
  std::uint64_t seed = 0;
  double noise = 0.0;  ///< variance of i.i.d. noise added to observations
  std::string output;  ///< CSV path; empty for none
  double alpha = 1.0;
  std::size_t candidates = 0;  ///< per-width candidate subset; 0 picks the task default
  std::string grid_file;       ///< ASCII elevation grid (Elevation2D); empty uses synthetic_surface
  BenchmarkName benchmark = BenchmarkName::Branin;
  int hyper_budget = 20;
  int interval_nodes = 32;
  int disk_degree = 20;
  int truth_disk_degree = 30;
  int mes_samples = 100;
  bool timing = false;  ///< record wall-clock ms per step (otherwise 0, keeping output reproducible)

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  /// Fills task defaults (width menu, grid size, candidate subset) for unset fields.
  void apply_defaults();
};

/// Parses the flat `key = value` format; `#` starts a comment. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

struct RunRecord {
  int replica = 0;
  int step = 0;  ///< observation index, 1-based; initial queries come first
  std::string policy;
  OperatorKind kind = OperatorKind::Point;
  std::vector<double> location;
  double width = 0.0;
  double y = 0.0;
  double metric = 0.0;  ///< R² (estimation) or regret (maximum search) after this observation
  double ms = 0.0;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

inline constexpr const char* kCsvHeader = "replica,step,policy,kind,location,width,y,metric,ms";

void write_csv(std::ostream& out, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_csv(std::istream& in);
void write_csv_file(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_csv_file(const std::string& path);

/// 1 − SS_res/SS_tot. Throws UndefinedMetric for a constant truth, InvalidArgument on size
/// mismatch or fewer than 2 points.
double compute_r2(std::span<const double> predicted, std::span<const double> truth);
double compute_r2(const Vec& predicted, const Vec& truth);

/// Regret_T = true_max − max_{t ≤ T} y_t for T = 1..n.
std::vector<double> compute_regret(double true_max, std::span<const double> ys);

/// Σ_{T=from}^{to} regrets[T−1] (1-based, inclusive, clipped to the available range).
double cumulative_regret(std::span<const double> regrets, int from, int to);

/// Linear-interpolation percentile (p in [0, 100]).
double percentile(std::vector<double> values, double p);

struct PolicySummary {
  std::string policy;
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
  std::size_t replicas = 0;
};

struct SummaryOptions {
  int from = 1;
  int to = std::numeric_limits<int>::max();
  std::optional<std::string> normalize_by;
};

/// Per policy: median and quartiles over replicas of Σ metric over steps [from, to].
/// With `normalize_by`, every figure is divided by that policy's median.
std::vector<PolicySummary> summarize(const std::vector<RunRecord>& records,
                                     const SummaryOptions& opts = {});

/// Per policy: mean metric at each step (index 0 is step 1).
std::map<std::string, std::vector<double>> mean_metric_by_step(const std::vector<RunRecord>& records);

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::vector<std::string> failures;  ///< one message per failed (replica, policy)
};

/// Runs every (replica, policy) pair; replica r uses seed + r. Records are ordered by
/// (policy, replica, step). Writes the CSV when `cfg.output` is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace gpdc
