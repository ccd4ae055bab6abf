// gpdc: run experiments, generate test functions, ingest elevation grids and summarize runs.

#include "gpdc/errors.hpp"
#include "gpdc/harness.hpp"
#include "gpdc/problems.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int cmd_run(const std::string& config_path) {
  gpdc::ExperimentConfig cfg;
  try {
    cfg = gpdc::load_config(config_path);
  } catch (const gpdc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const auto result = gpdc::run_experiment(cfg);
  for (const auto& f : result.failures) std::cerr << "failed: " << f << '\n';
  if (cfg.output.empty()) gpdc::write_csv(std::cout, result.records);
  std::cerr << result.records.size() << " records, " << result.failures.size() << " failures\n";
  return result.failures.empty() ? 0 : kExitRuntime;
}

int cmd_gen_functions(std::uint64_t seed, int count, const std::string& out_path) {
  if (count < 1) {
    std::cerr << "config error: --count must be >= 1\n";
    return kExitConfig;
  }
  std::ofstream out(out_path);
  if (!out) throw gpdc::IoError("cannot write " + out_path);
  char buf[64];
  for (int i = 0; i < count; ++i) {
    const auto f = gpdc::gen_random_function(seed + static_cast<std::uint64_t>(i));
    if (i == 0) out << count << ' ' << f.values().size() << '\n';
    for (std::size_t c = 0; c < f.values().size(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof buf, f.values()[c]);
      if (c > 0) out << ' ';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw gpdc::IoError("failed writing " + out_path);
  return 0;
}

int cmd_ingest(const std::string& in, const std::string& format, const std::string& out) {
  if (format != "ascii") {
    std::cerr << "config error: unsupported format '" << format << "'\n";
    return kExitConfig;
  }
  const auto grid = gpdc::load_elevation_grid(in, format);
  gpdc::save_elevation_grid(out, grid);
  std::cerr << grid.rows() << "x" << grid.cols() << " grid rescaled to [0, 1]\n";
  return 0;
}

int cmd_summarize(const std::string& in, const std::string& normalize_by, int from, int to) {
  const auto records = gpdc::read_csv_file(in);
  gpdc::SummaryOptions opts;
  opts.from = from;
  opts.to = to;
  if (!normalize_by.empty()) opts.normalize_by = normalize_by;
  std::printf("%-12s %10s %10s %10s %8s\n", "policy", "median", "p25", "p75", "replicas");
  for (const auto& s : gpdc::summarize(records, opts)) {
    std::printf("%-12s %10.4f %10.4f %10.4f %8zu\n", s.policy.c_str(), s.median, s.p25, s.p75,
                s.replicas);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GP-DC experiments: adaptive-width function estimation and maximum search"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment from a key = value config file");
  run->add_option("--config", config_path, "Config file")->required();

  std::uint64_t seed = 0;
  int count = 1;
  std::string out_path;
  auto* gen = app.add_subcommand("gen-functions", "Write random test functions, one per row");
  gen->add_option("--seed", seed, "Seed of the first function");
  gen->add_option("--count", count, "Number of functions");
  gen->add_option("--out", out_path, "Output file (ASCII grid format)")->required();

  std::string in_path;
  std::string format = "ascii";
  std::string ingest_out;
  auto* ingest = app.add_subcommand("ingest-grid", "Validate, rescale and rewrite an elevation grid");
  ingest->add_option("--in", in_path, "Input grid")->required();
  ingest->add_option("--format", format, "Input format")->default_val("ascii");
  ingest->add_option("--out", ingest_out, "Output grid")->required();

  std::string csv_path;
  std::string normalize_by;
  int from = 1;
  int to = std::numeric_limits<int>::max();
  auto* summarize = app.add_subcommand("summarize", "Median and quartiles of summed metrics per policy");
  summarize->add_option("--in", csv_path, "Run CSV")->required();
  summarize->add_option("--normalize-by", normalize_by, "Divide by this policy's median");
  summarize->add_option("--from", from, "First step included");
  summarize->add_option("--to", to, "Last step included");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*gen) return cmd_gen_functions(seed, count, out_path);
    if (*ingest) return cmd_ingest(in_path, format, ingest_out);
    if (*summarize) return cmd_summarize(csv_path, normalize_by, from, to);
  } catch (const gpdc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
