// loopsim: run feedback-loop experiments and summarize their traces.
//
//   loopsim run (--preset NAME | --config FILE) [--seeds LIST] [--out DIR]
//               [--parallel N] [--steps N] [--jsonl]
//   loopsim report DIR...
//   loopsim preset dump NAME
//   loopsim validate FILE
//
// Seed lists accept ranges and commas, e.g. "1-20" or "3,7,11". Without
// --seeds the single seed in LOOPSIM_DEFAULT_SEED is used, falling back to the
// configuration's own seed.
//
// Exit status: 0 on success, 1 when a run or file operation fails, 2 on bad
// usage or an invalid configuration.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loopsim/config.hpp"
#include "loopsim/error.hpp"
#include "loopsim/experiment.hpp"
#include "loopsim/presets.hpp"
#include "loopsim/trace_io.hpp"

namespace fs = std::filesystem;
using namespace loopsim;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::uint64_t parse_seed(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || text[0] == '-') {
    throw UsageError("invalid seed '" + text + "'");
  }
  return v;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    const std::string item = list.substr(start, comma - start);
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(parse_seed(item));
    } else {
      const auto lo = parse_seed(item.substr(0, dash));
      const auto hi = parse_seed(item.substr(dash + 1));
      if (hi < lo) throw UsageError("empty seed range '" + item + "'");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return seeds;
}

std::uint64_t default_seed(const SimulationConfig& config) {
  const char* env = std::getenv("LOOPSIM_DEFAULT_SEED");
  return env == nullptr ? config.seed : parse_seed(env);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

struct RunArgs {
  std::string preset;
  std::string config;
  std::string seeds;
  std::string out;
  std::size_t parallel = 1;
  std::size_t steps = 0;
  bool jsonl = false;
};

int cmd_run(const RunArgs& a) {
  SimulationConfig config = a.preset.empty() ? load_config(a.config) : preset(a.preset);
  if (a.steps > 0) {
    config.total_steps = a.steps;
    std::erase_if(config.checkpoints, [&](std::size_t s) { return s > a.steps; });
  }
  config.record_events = !a.out.empty();
  validate(config);
  const auto seeds = a.seeds.empty() ? std::vector<std::uint64_t>{default_seed(config)}
                                     : parse_seed_list(a.seeds);

  const auto result = run_experiment(config, seeds, a.parallel);
  if (!a.out.empty()) {
    const fs::path dir(a.out);
    fs::create_directories(dir);
    save_config(config, dir / "config.json");
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (!result.traces[i]) continue;
      const fs::path seed_dir = dir / ("seed-" + std::to_string(seeds[i]));
      fs::create_directories(seed_dir);
      const Trace& t = *result.traces[i];
      export_trace(t, TraceFormat::kEventsCsv, seed_dir / "events.csv");
      export_trace(t, TraceFormat::kCheckpointsCsv, seed_dir / "checkpoints.csv");
      export_trace(t, TraceFormat::kSeriesCsv, seed_dir / "series.csv");
      if (a.jsonl) export_trace(t, TraceFormat::kJsonl, seed_dir / "events.jsonl");
    }
    write_text(dir / "report.txt", format_report(result.report));
  }
  std::cout << format_report(result.report);
  return result.report.failures.empty() ? 0 : kExitFailure;
}

int cmd_report(const std::vector<std::string>& dirs) {
  std::vector<std::vector<CheckpointRow>> cps;
  std::vector<std::vector<SeriesRow>> series;
  std::vector<std::uint64_t> seeds;
  std::optional<SimulationConfig> config;
  for (const auto& d : dirs) {
    const fs::path dir(d);
    if (!fs::is_directory(dir)) throw IoError(d + " is not a directory");
    if (!config && fs::exists(dir / "config.json")) config = load_config(dir / "config.json");
    std::vector<fs::path> seed_dirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory() && entry.path().filename().string().starts_with("seed-")) {
        seed_dirs.push_back(entry.path());
      }
    }
    std::sort(seed_dirs.begin(), seed_dirs.end());
    for (const auto& sd : seed_dirs) {
      cps.push_back(import_checkpoints(sd / "checkpoints.csv"));
      series.push_back(fs::exists(sd / "series.csv") ? import_series(sd / "series.csv")
                                                     : std::vector<SeriesRow>{});
      seeds.push_back(parse_seed(sd.filename().string().substr(5)));
    }
  }
  if (cps.empty()) throw IoError("no seed-* trace directories found");
  // Series are optional per seed; average them only when every seed has one.
  const bool all_series =
      std::all_of(series.begin(), series.end(), [](const auto& s) { return !s.empty(); });
  AggregateReport report = aggregate(cps, all_series ? series : decltype(series){});
  report.seeds = seeds;
  if (config) report.bias = bias_annotation(config->feedback, config->train.test_fraction);
  std::cout << format_report(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate feedback loops in ML decision pipelines"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run an experiment over one or more seeds");
  auto* preset_opt = run->add_option("--preset", run_args.preset, "Built-in experiment");
  auto* config_opt = run->add_option("--config", run_args.config, "JSON configuration file");
  preset_opt->excludes(config_opt);
  run->add_option("--seeds", run_args.seeds, "Seed list, e.g. 1-20 or 3,7,11");
  run->add_option("--out", run_args.out, "Directory for traces and the report");
  run->add_option("--parallel", run_args.parallel, "Worker threads (0 = all cores)");
  run->add_option("--steps", run_args.steps, "Override total_steps");
  run->add_flag("--jsonl", run_args.jsonl, "Also write events.jsonl per seed");

  std::vector<std::string> report_dirs;
  auto* report = app.add_subcommand("report", "Aggregate traces written by run --out");
  report->add_option("dirs", report_dirs, "Output directories of earlier runs")->required();

  auto* preset_cmd = app.add_subcommand("preset", "Inspect built-in experiments");
  preset_cmd->require_subcommand(1);
  std::string dump_name;
  auto* dump = preset_cmd->add_subcommand("dump", "Print a preset as JSON");
  dump->add_option("name", dump_name, "Preset name")->required();

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a configuration file");
  validate_cmd->add_option("file", validate_path, "JSON configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) {
      if (run_args.preset.empty() && run_args.config.empty()) {
        throw UsageError("run needs --preset or --config");
      }
      return cmd_run(run_args);
    }
    if (*report) return cmd_report(report_dirs);
    if (*dump) {
      std::cout << config_to_json(preset(dump_name)).dump(2) << '\n';
      return 0;
    }
    if (*validate_cmd) {
      load_config(validate_path);
      std::cout << validate_path << ": ok\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
