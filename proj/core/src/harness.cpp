#include "gpdc/harness.hpp"

#include "gpdc/errors.hpp"
#include "gpdc/gp.hpp"
#include "gpdc/policies.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace gpdc {

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double compute_r2(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size()) throw InvalidArgument("R² inputs differ in length");
  if (truth.size() < 2) throw InvalidArgument("R² needs at least 2 points");
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (predicted[i] - truth[i]) * (predicted[i] - truth[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (!(ss_tot > 0.0)) throw UndefinedMetric("R² is undefined for a constant truth");
  return 1.0 - ss_res / ss_tot;
}

double compute_r2(const Vec& predicted, const Vec& truth) {
  return compute_r2(std::span<const double>(predicted.data(), static_cast<std::size_t>(predicted.size())),
                    std::span<const double>(truth.data(), static_cast<std::size_t>(truth.size())));
}

std::vector<double> compute_regret(double true_max, std::span<const double> ys) {
  std::vector<double> out;
  out.reserve(ys.size());
  double best = -std::numeric_limits<double>::infinity();
  for (double y : ys) {
    best = std::max(best, y);
    out.push_back(true_max - best);
  }
  return out;
}

double cumulative_regret(std::span<const double> regrets, int from, int to) {
  const int lo = std::max(from, 1);
  const int hi = std::min<long long>(to, static_cast<long long>(regrets.size()));
  double acc = 0.0;
  for (int t = lo; t <= hi; ++t) acc += regrets[static_cast<std::size_t>(t - 1)];
  return acc;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgument("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw InvalidArgument("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= values.size()) return values.back();
  const double t = pos - static_cast<double>(i);
  return values[i] + t * (values[i + 1] - values[i]);
}

std::vector<PolicySummary> summarize(const std::vector<RunRecord>& records,
                                     const SummaryOptions& opts) {
  if (records.empty()) throw InvalidArgument("no records to summarize");
  std::vector<std::string> order;
  std::map<std::string, std::map<int, double>> totals;
  for (const auto& r : records) {
    if (!totals.contains(r.policy)) order.push_back(r.policy);
    auto& per_replica = totals[r.policy];
    double& acc = per_replica[r.replica];
    if (r.step >= opts.from && r.step <= opts.to) acc += r.metric;
  }
  std::vector<PolicySummary> out;
  for (const auto& name : order) {
    std::vector<double> v;
    for (const auto& [rep, total] : totals[name]) v.push_back(total);
    out.push_back({name, percentile(v, 50), percentile(v, 25), percentile(v, 75), v.size()});
  }
  if (opts.normalize_by) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const PolicySummary& s) { return s.policy == *opts.normalize_by; });
    if (it == out.end()) {
      throw InvalidArgument("no records for normalization policy " + *opts.normalize_by);
    }
    const double scale = it->median;
    if (!(scale != 0.0)) throw UndefinedMetric("normalization policy has a zero median");
    for (auto& s : out) {
      s.median /= scale;
      s.p25 /= scale;
      s.p75 /= scale;
    }
  }
  return out;
}

std::map<std::string, std::vector<double>> mean_metric_by_step(const std::vector<RunRecord>& records) {
  std::map<std::string, std::vector<double>> sums;
  std::map<std::string, std::vector<int>> counts;
  for (const auto& r : records) {
    if (r.step < 1) continue;
    auto& s = sums[r.policy];
    auto& c = counts[r.policy];
    const auto idx = static_cast<std::size_t>(r.step - 1);
    if (s.size() <= idx) {
      s.resize(idx + 1, 0.0);
      c.resize(idx + 1, 0);
    }
    s[idx] += r.metric;
    ++c[idx];
  }
  for (auto& [name, s] : sums) {
    const auto& c = counts[name];
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = c[i] > 0 ? s[i] / c[i] : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return sums;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

void put_number(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

double get_number(const std::string& text, std::size_t line) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) {
    throw FormatError("CSV line " + std::to_string(line) + ": bad number '" + text + "'");
  }
  return v;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.replica << ',' << r.step << ',' << r.policy << ',' << to_string(r.kind) << ',';
    for (std::size_t i = 0; i < r.location.size(); ++i) {
      if (i > 0) out << ';';
      put_number(out, r.location[i]);
    }
    out << ',';
    put_number(out, r.width);
    out << ',';
    put_number(out, r.y);
    out << ',';
    put_number(out, r.metric);
    out << ',';
    put_number(out, r.ms);
    out << '\n';
  }
}

std::vector<RunRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw FormatError("unexpected CSV header: " + line);
  std::vector<RunRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 9) throw FormatError("CSV line " + std::to_string(line_no) + ": expected 9 fields");
    RunRecord r;
    r.replica = static_cast<int>(get_number(f[0], line_no));
    r.step = static_cast<int>(get_number(f[1], line_no));
    r.policy = f[2];
    try {
      r.kind = operator_kind_from_string(f[3]);
    } catch (const Error&) {
      throw FormatError("CSV line " + std::to_string(line_no) + ": unknown operator kind '" + f[3] + "'");
    }
    std::stringstream loc(f[4]);
    while (std::getline(loc, cell, ';')) r.location.push_back(get_number(cell, line_no));
    r.width = get_number(f[5], line_no);
    r.y = get_number(f[6], line_no);
    r.metric = get_number(f[7], line_no);
    r.ms = get_number(f[8], line_no);
    out.push_back(std::move(r));
  }
  return out;
}

void write_csv_file(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write CSV file: " + path);
  write_csv(out, records);
  if (!out) throw IoError("failed writing CSV file: " + path);
}

std::vector<RunRecord> read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file: " + path);
  return read_csv(in);
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

struct Ground {
  std::optional<Curve> curve;
  std::optional<ElevationGrid> surface;
  std::optional<Benchmark> bench;
};

GPModel initial_model(const ExperimentConfig& cfg) {
  GPModel m;
  m.kernel.length_scale = 1.0;
  m.quadrature.interval_nodes = cfg.interval_nodes;
  m.quadrature.disk_degree = cfg.disk_degree;
  return m;
}

double observe_truth(const ExperimentConfig& cfg, const Ground& g, const ObservationOperator& op) {
  switch (cfg.task) {
    case Task::Estimation1D:
    case Task::Gradient1D:
    case Task::MaxSearch1D:
      switch (op.kind) {
        case OperatorKind::Point: return (*g.curve)(op.location[0]);
        case OperatorKind::IntervalMean: return true_interval_mean(*g.curve, op.location[0], op.width);
        case OperatorKind::SmoothedGradient:
          return true_smoothed_gradient(*g.curve, op.location[0], op.width);
        default: break;
      }
      break;
    case Task::Elevation2D:
      if (op.kind == OperatorKind::Point) return (*g.surface)(op.location[0], op.location[1]);
      if (op.kind == OperatorKind::DiskMean) {
        return true_disk_mean(*g.surface, op.location[0], op.location[1], op.width, cfg.truth_disk_degree);
      }
      break;
    case Task::MaxSearchBenchmark: {
      const auto x = g.bench->from_unit(op.location);
      return -eval_benchmark(*g.bench, x);
    }
  }
  throw UnsupportedOperation("operator not supported by this task");
}

OperatorKind task_operator(Task task) {
  switch (task) {
    case Task::Estimation1D: return OperatorKind::IntervalMean;
    case Task::Gradient1D: return OperatorKind::SmoothedGradient;
    case Task::Elevation2D: return OperatorKind::DiskMean;
    default: return OperatorKind::Point;
  }
}

Grid task_grid(const ExperimentConfig& cfg) {
  return (cfg.task == Task::Elevation2D || cfg.task == Task::MaxSearchBenchmark)
             ? Grid::mesh(cfg.grid_size)
             : Grid::uniform(cfg.grid_size);
}

Domain task_domain(const ExperimentConfig& cfg) {
  switch (cfg.task) {
    case Task::Elevation2D: return Domain::unit(2, Extension::Reflect);
    case Task::MaxSearchBenchmark: return Domain::unit(2);
    default: return Domain::unit(1, Extension::Constant);
  }
}

RunRecord make_record(int replica, int step, const std::string& policy, const ObservationOperator& op,
                      double y) {
  RunRecord r;
  r.replica = replica;
  r.step = step;
  r.policy = policy;
  r.kind = op.kind;
  r.location = op.location;
  r.width = op.width;
  r.y = y;
  return r;
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Initial observations are drawn from the replica stream so that every policy sees the same ones.
std::vector<ObservationOperator> initial_operators(const ExperimentConfig& cfg, const Grid& grid, Rng& rng) {
  std::vector<ObservationOperator> ops;
  switch (cfg.task) {
    case Task::Gradient1D:
      ops.push_back(ObservationOperator::point({0.0}));
      ops.push_back(ObservationOperator::point({1.0}));
      break;
    case Task::Estimation1D:
    case Task::Elevation2D: {
      const int dim = cfg.task == Task::Elevation2D ? 2 : 1;
      for (int i = 0; i < 2; ++i) {
        std::vector<double> x(static_cast<std::size_t>(dim));
        for (auto& v : x) v = uniform01(rng);
        const double w = cfg.widths[uniform_index(rng, cfg.widths.size())];
        ops.push_back(make_operator(task_operator(cfg.task), x, w));
      }
      break;
    }
    case Task::MaxSearch1D:
    case Task::MaxSearchBenchmark:
      for (int i = 0; i < 2; ++i) {
        const Vec p = grid.point(uniform_index(rng, grid.size()));
        ops.push_back(ObservationOperator::point({p.data(), p.data() + p.size()}));
      }
      break;
  }
  return ops;
}

double estimation_width_for(const std::string& policy, const std::vector<double>& widths) {
  if (policy.rfind("VarMax@", 0) == 0) return std::stod(policy.substr(7));
  return *std::min_element(widths.begin(), widths.end());
}

void run_estimation(const ExperimentConfig& cfg, const Ground& g, int replica, const std::string& policy,
                    std::vector<RunRecord>& out) {
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(replica);
  const Grid grid = task_grid(cfg);
  const Domain domain = task_domain(cfg);
  const Vec truth = g.curve ? g.curve->sample(grid) : g.surface->sample(grid);

  Rng init_rng = make_rng(seed, fnv1a("initial"));
  Rng noise_rng = make_rng(seed, fnv1a("noise"));
  AcquisitionState state(make_rng(seed, fnv1a(policy)));
  std::normal_distribution<double> noise(0.0, std::sqrt(cfg.noise));
  auto observe = [&](const ObservationOperator& op) {
    const double y = observe_truth(cfg, g, op);
    return cfg.noise > 0.0 ? y + noise(noise_rng) : y;
  };

  EstimationConfig ecfg;
  ecfg.widths = cfg.widths;
  ecfg.operator_kind = task_operator(cfg.task);
  ecfg.draws = cfg.draws;
  ecfg.grid = grid;
  ecfg.domain = domain;
  ecfg.alpha = cfg.alpha;
  ecfg.candidate_subset = cfg.candidates;
  ecfg.hyper_budget = cfg.hyper_budget;
  ecfg.refit = false;

  Dataset data;
  data.domain = domain;
  GPModel model = initial_model(cfg);
  CovarianceCache cache;

  auto record_metric = [&](RunRecord& rec) {
    model = fit_model(model, data, cfg.hyper_budget);
    const Posterior post = ConditionedGP(model, data, &cache).posterior(grid);
    rec.metric = compute_r2(post.mean, truth);
  };

  for (const auto& op : initial_operators(cfg, grid, init_rng)) {
    const auto start = Clock::now();
    const double y = observe(op);
    data.add(op, y);
    RunRecord rec = make_record(replica, static_cast<int>(data.size()), policy, op, y);
    record_metric(rec);
    if (cfg.timing) rec.ms = elapsed_ms(start);
    out.push_back(std::move(rec));
  }

  const double fixed_width = estimation_width_for(policy, cfg.widths);
  for (int s = 0; s < cfg.steps; ++s) {
    const auto start = Clock::now();
    state.step = static_cast<int>(data.size()) + 1;
    ObservationOperator op;
    if (policy == "GP-DC") {
      op = estimation_step(model, data, ecfg, state, &cache).op;
    } else if (policy == "Random") {
      op = random_estimation_query(ecfg, state.rng);
    } else {
      op = max_variance_step(model, data, ecfg, fixed_width, state, &cache).op;
    }
    const double y = observe(op);
    data.add(op, y);
    RunRecord rec = make_record(replica, static_cast<int>(data.size()), policy, op, y);
    record_metric(rec);
    if (cfg.timing) rec.ms = elapsed_ms(start);
    out.push_back(std::move(rec));
  }
}

void run_max_search(const ExperimentConfig& cfg, const Ground& g, int replica, const std::string& policy,
                    std::vector<RunRecord>& out) {
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(replica);
  const Grid grid = task_grid(cfg);
  const Domain domain = task_domain(cfg);
  // Regret is measured on noise-free values against the true maximum over the whole domain.
  const double true_max = g.curve ? g.curve->max_value() : -g.bench->known_min;

  Rng init_rng = make_rng(seed, fnv1a("initial"));
  Rng noise_rng = make_rng(seed, fnv1a("noise"));
  AcquisitionState state(make_rng(seed, fnv1a(policy)));
  std::normal_distribution<double> noise(0.0, std::sqrt(cfg.noise));

  MaxPolicy mp;
  mp.kind = max_policy_from_string(policy);
  mp.constants.alpha = cfg.alpha;
  mp.constants.draws = cfg.draws;
  mp.constants.mes_samples = cfg.mes_samples;
  mp.constants.hyper_budget = cfg.hyper_budget;

  Dataset data;
  data.domain = domain;
  GPModel model = initial_model(cfg);
  double best_f = -std::numeric_limits<double>::infinity();

  auto take = [&](const ObservationOperator& op, Clock::time_point start) {
    const double f = observe_truth(cfg, g, op);
    const double y = cfg.noise > 0.0 ? f + noise(noise_rng) : f;
    data.add(op, y);
    state.record_observation(y);
    best_f = std::max(best_f, f);
    RunRecord rec = make_record(replica, static_cast<int>(data.size()), policy, op, y);
    rec.metric = true_max - best_f;
    if (cfg.timing) rec.ms = elapsed_ms(start);
    out.push_back(std::move(rec));
  };

  for (const auto& op : initial_operators(cfg, grid, init_rng)) take(op, Clock::now());
  for (int s = 0; s < cfg.steps; ++s) {
    const auto start = Clock::now();
    state.step = static_cast<int>(data.size()) + 1;
    const MaxChoice choice = max_search_step(model, data, mp, grid, state);
    model = choice.model;
    const Vec p = grid.point(choice.index);
    take(ObservationOperator::point({p.data(), p.data() + p.size()}), start);
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.apply_defaults();
  cfg.validate();

  std::optional<ElevationGrid> surface;
  if (cfg.task == Task::Elevation2D) {
    surface = cfg.grid_file.empty() ? synthetic_surface(64, cfg.seed).rescaled()
                                    : load_elevation_grid(cfg.grid_file, "ascii");
  }

  ExperimentResult result;
  for (const auto& policy : cfg.policies) {
    for (int r = 0; r < cfg.replicas; ++r) {
      Ground g;
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
      std::vector<RunRecord> records;
      try {
        switch (cfg.task) {
          case Task::Estimation1D:
          case Task::Gradient1D:
          case Task::MaxSearch1D: g.curve = gen_random_function(seed); break;
          case Task::Elevation2D: g.surface = surface; break;
          case Task::MaxSearchBenchmark: g.bench = Benchmark::get(cfg.benchmark); break;
        }
        if (is_estimation_task(cfg.task)) {
          run_estimation(cfg, g, r, policy, records);
        } else {
          run_max_search(cfg, g, r, policy, records);
        }
      } catch (const std::exception& e) {
        result.failures.push_back("replica " + std::to_string(r) + ", policy " + policy + ": " + e.what());
      }
      result.records.insert(result.records.end(), records.begin(), records.end());
    }
  }
  if (!cfg.output.empty()) write_csv_file(cfg.output, result.records);
  return result;
}

}  // namespace gpdc
