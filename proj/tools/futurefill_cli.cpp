// futurefill command-line front end: verify | bench | slope | gen | filters.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or configuration
// error (including malformed input files), 3 I/O error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "futurefill/bench.hpp"
#include "futurefill/errors.hpp"
#include "futurefill/generate.hpp"
#include "futurefill/rng.hpp"
#include "futurefill/sequence_io.hpp"
#include "futurefill/spectral.hpp"
#include "futurefill/verify.hpp"

namespace ff = futurefill;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct Globals {
  std::uint64_t seed = 0;
  std::string output;
  bool json = false;
};

/// Opens the output path up front so an unwritable destination fails
/// before any work is done.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw ff::IoError("cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void close(const std::string& path) {
    if (!file_.is_open()) {
      std::cout.flush();
      return;
    }
    file_.close();
    if (!file_) throw ff::IoError("write to '" + path + "' failed");
  }

 private:
  std::ofstream file_;
};

json meter_json(const ff::CostMeter& m) {
  return json{{"mac_count", m.mac_count},
              {"ff_cost", m.ff_cost},
              {"cache_rebuilds", m.cache_rebuilds},
              {"peak_aux_elems", m.peak_aux_elems},
              {"peak_transform_elems", m.peak_transform_elems},
              {"fast_convolutions", m.fast_convolutions}};
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
  std::size_t max_length = 256;
  std::string fault = "none";
  bool omit_wall = false;
};

int cmd_verify(const Globals& g, const VerifyArgs& a) {
  ff::VerifyOptions opts;
  opts.seed = g.seed;
  opts.max_length = a.max_length;
  if (a.fault == "futurefill") {
    opts.fault = ff::Fault::futurefill_off_by_one;
  } else if (a.fault != "none") {
    throw ff::ConfigError("unknown fault '" + a.fault + "'");
  }
  Sink sink(g.output);
  const auto report = ff::run_verify(opts);
  const std::string report_json = report.to_json(!a.omit_wall).dump(2) + "\n";
  if (!g.output.empty()) {
    sink.stream() << report_json;
    sink.close(g.output);
  }
  if (g.json) {
    std::cout << report_json;
  } else {
    std::cout << report.to_text();
  }
  return report.passed() ? 0 : kExitVerifyFailed;
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
  std::vector<std::string> engines{"all"};
  std::vector<std::string> lengths;
  std::string mode = "scratch";
  std::optional<std::size_t> epoch_length;
  std::size_t prompt_length = 0;
  std::size_t channels = 1;
  std::size_t trials = 3;
  std::size_t warmup = 1;
  std::string filters = "random";
  std::string token_map = "clamp";
  bool parallel_channels = false;
};

std::vector<ff::EngineKind> parse_engines(const std::vector<std::string>& names) {
  std::vector<ff::EngineKind> out;
  for (const auto& name : names) {
    if (name == "all") {
      out.insert(out.end(), {ff::EngineKind::naive, ff::EngineKind::epoched, ff::EngineKind::continuous});
    } else {
      out.push_back(ff::parse_engine_kind(name));
    }
  }
  return out;
}

int cmd_bench(const Globals& g, const BenchArgs& a) {
  ff::BenchConfig cfg;
  cfg.engines = parse_engines(a.engines);
  for (const auto& text : a.lengths) {
    for (std::size_t l : ff::parse_lengths(text)) cfg.lengths.push_back(l);
  }
  cfg.mode = ff::parse_gen_mode(a.mode);
  cfg.epoch_length = a.epoch_length;
  cfg.prompt_length = a.prompt_length;
  if (cfg.mode == ff::GenMode::prompt && cfg.prompt_length == 0) {
    throw ff::ConfigError("prompt mode needs --prompt-length > 0");
  }
  cfg.channels = a.channels;
  cfg.trials = a.trials;
  cfg.warmup = a.warmup;
  cfg.seed = g.seed;
  cfg.filters = ff::parse_filter_source(a.filters);
  cfg.token_map = ff::parse_token_map(a.token_map);
  cfg.parallel_channels = a.parallel_channels;

  Sink sink(g.output);
  std::ostream& out = sink.stream();
  out << ff::kBenchCsvHeader << '\n';
  const auto records = ff::run_bench(cfg, [&](const ff::BenchRecord& r) {
    ff::write_bench_row(out, r);
    out.flush();
  });
  sink.close(g.output);

  const auto rows = ff::summarize(records);
  if (g.json) {
    json summary = json::array();
    for (const auto& r : rows) {
      summary.push_back(json{{"engine", r.engine},
                             {"L_gen", r.gen_length},
                             {"K_epoch", r.epoch_length},
                             {"trials_used", r.trials_used},
                             {"mean_wall_ns", r.mean_wall_ns},
                             {"mean_total_cost", r.mean_total_cost}});
    }
    std::cerr << summary.dump(2) << '\n';
  } else {
    for (const auto& r : rows) {
      std::cerr << r.engine << " L=" << r.gen_length << " mean_wall_ms=" << r.mean_wall_ns / 1e6
                << " mean_total_cost=" << r.mean_total_cost << '\n';
    }
  }
  return 0;
}

// ---- slope -----------------------------------------------------------------

struct SlopeArgs {
  std::string input;
  std::string metric = "total_cost";
  std::vector<std::string> engines;
};

int cmd_slope(const Globals& g, const SlopeArgs& a) {
  std::ifstream in(a.input, std::ios::binary);
  if (!in) throw ff::IoError("cannot open '" + a.input + "'");
  const auto records = ff::read_bench_csv(in, a.input);
  const ff::Metric metric = ff::parse_metric(a.metric);

  std::vector<std::string> engines = a.engines;
  if (engines.empty()) {
    for (const auto& r : records) {
      if (std::find(engines.begin(), engines.end(), r.engine) == engines.end()) engines.push_back(r.engine);
    }
  }
  if (engines.empty()) throw ff::ConfigError("slope: no records in '" + a.input + "'");

  json fits = json::array();
  for (const auto& engine : engines) {
    const auto fit = ff::fit_slope(records, metric, engine);
    fits.push_back(json{{"engine", fit.engine},
                        {"metric", ff::to_string(fit.metric)},
                        {"slope", fit.slope},
                        {"intercept", fit.intercept},
                        {"residual_rms", fit.residual_rms},
                        {"points", fit.points}});
  }
  Sink sink(g.output);
  sink.stream() << fits.dump(2) << '\n';
  sink.close(g.output);
  return 0;
}

// ---- gen -------------------------------------------------------------------

struct GenArgs {
  std::string mode = "scratch";
  std::string prompt_file;
  std::size_t length = 0;
  std::string engine = "continuous";
  std::optional<std::size_t> epoch_length;
  std::string filter = "random";
  std::string filter_file;
  std::size_t filter_index = 1;
  double seed_token = 1.0;
  std::string token_map = "identity";
};

int cmd_gen(const Globals& g, const GenArgs& a) {
  const ff::GenMode mode = ff::parse_gen_mode(a.mode);
  if (a.length == 0) throw ff::ConfigError("--length must be positive");
  ff::Signal prompt;
  if (mode == ff::GenMode::prompt) {
    if (a.prompt_file.empty()) throw ff::ConfigError("prompt mode needs --prompt");
    prompt = ff::load_sequence(a.prompt_file);
  }
  const std::size_t context = prompt.size() + a.length;

  ff::Signal taps;
  if (a.filter == "random") {
    ff::Rng rng(ff::stream_seed(g.seed, "gen-filter", context));
    taps = ff::random_filter_bank(context, 1, rng).filters[0];
  } else if (a.filter == "spectral") {
    if (a.filter_index < 1) throw ff::ConfigError("--filter-index is 1-based");
    taps = ff::spectral_filters(context, a.filter_index).filters[a.filter_index - 1];
  } else if (a.filter == "file") {
    if (a.filter_file.empty()) throw ff::ConfigError("--filter file needs --filter-file");
    // Taps past the context can never touch an output.
    const auto all = ff::load_sequence(a.filter_file);
    taps = all.slice(1, static_cast<std::ptrdiff_t>(std::min(all.size(), context)));
  } else {
    throw ff::ConfigError("unknown filter source '" + a.filter + "'");
  }
  const ff::Filter phi(std::move(taps), context);

  ff::EngineConfig engine{.kind = ff::parse_engine_kind(a.engine), .epoch_length = a.epoch_length};
  const ff::TokenMap map = ff::parse_token_map(a.token_map);

  Sink sink(g.output);
  const auto result = mode == ff::GenMode::scratch
                          ? ff::generate_scratch(phi, a.length, engine, a.seed_token, map)
                          : ff::generate_prompted(prompt, phi, a.length, engine, map);

  json meters{{"mode", ff::to_string(mode)},
              {"engine", ff::to_string(engine.kind)},
              {"K_epoch", engine.kind == ff::EngineKind::epoched ? ff::resolve_epoch_length(engine, a.length) : 0},
              {"L_prompt", prompt.size()},
              {"L_gen", a.length},
              {"prefill", meter_json(result.prefill)},
              {"decode", meter_json(result.decode)},
              {"peak_cache_elems", result.decode.peak_aux_elems}};

  ff::write_sequence(sink.stream(), result.outputs);
  sink.close(g.output);
  if (!g.output.empty() && g.output != "-") {
    const std::string sidecar = g.output + ".meters.json";
    std::ofstream side(sidecar, std::ios::binary | std::ios::trunc);
    if (!side) throw ff::IoError("cannot open '" + sidecar + "' for writing");
    side << meters.dump(2) << '\n';
    if (!side.flush()) throw ff::IoError("write to '" + sidecar + "' failed");
    if (g.json) std::cout << meters.dump(2) << '\n';
  } else if (g.json) {
    std::cerr << meters.dump(2) << '\n';
  }
  return 0;
}

// ---- filters ---------------------------------------------------------------

struct FiltersArgs {
  std::size_t length = 0;
  std::size_t count = 0;
};

int cmd_filters(const Globals& g, const FiltersArgs& a) {
  Sink sink(g.output);
  const auto bank = ff::spectral_filters(a.length, a.count);
  ff::write_filter_bank_csv(sink.stream(), bank);
  sink.close(g.output);
  if (g.json) {
    std::cerr << json{{"length", bank.length}, {"count", bank.count()}, {"eigenvalues", bank.eigenvalues}}.dump(2)
              << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FutureFill online convolution: verification, benchmarks and generation"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random stream");
  app.add_option("--output,-o", g.output, "Output path (stdout when omitted)");
  app.add_flag("--json", g.json, "Machine-readable output");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run the oracle verification suites");
  verify->add_option("--max-length", va.max_length, "Largest length checked exhaustively")
      ->check(CLI::PositiveNumber);
  verify->add_option("--inject-fault", va.fault, "Deliberate defect for smoke tests (none|futurefill)");
  verify->add_flag("--omit-wall", va.omit_wall, "Leave wall_ns out of the JSON report");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Measure generation cost per engine and length");
  bench->add_option("--engines,-e", ba.engines, "naive, epoched, continuous or all")->delimiter(',');
  bench->add_option("--lengths,-L", ba.lengths, "Lengths: 4096, 2^12, or 2^12..2^17")
      ->delimiter(',')
      ->required();
  bench->add_option("--mode", ba.mode, "scratch or prompt");
  bench->add_option("--epoch-length,-K", ba.epoch_length, "Epoch length override for epoched");
  bench->add_option("--prompt-length", ba.prompt_length, "Prompt length in prompt mode");
  bench->add_option("--channels", ba.channels, "Independent channels per trial");
  bench->add_option("--trials", ba.trials, "Measured trials per configuration");
  bench->add_option("--warmup", ba.warmup, "Unrecorded warmup trials");
  bench->add_option("--filters", ba.filters, "random or spectral");
  bench->add_option("--token-map", ba.token_map, "identity, clamp or clamp:lo:hi");
  bench->add_flag("--parallel-channels", ba.parallel_channels, "One thread per channel");

  SlopeArgs sa;
  auto* slope = app.add_subcommand("slope", "Fit log-log slopes to a bench CSV");
  slope->add_option("input", sa.input, "Bench CSV")->required();
  slope->add_option("--metric", sa.metric,
                    "mac_count, ff_cost, total_cost (mac_count+ff_cost), wall_ns, ...");
  slope->add_option("--engine", sa.engines, "Restrict to these engines")->delimiter(',');

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Generate a sequence and report its meters");
  gen->add_option("--mode", ga.mode, "scratch or prompt");
  gen->add_option("--prompt", ga.prompt_file, "Prompt file, one value per line");
  gen->add_option("--length,-n", ga.length, "Number of outputs to generate")->required();
  gen->add_option("--engine", ga.engine, "naive, epoched or continuous");
  gen->add_option("--epoch-length,-K", ga.epoch_length, "Epoch length for epoched");
  gen->add_option("--filter", ga.filter, "random, spectral or file");
  gen->add_option("--filter-file", ga.filter_file, "Filter taps, one value per line");
  gen->add_option("--filter-index", ga.filter_index, "Which spectral filter (1-based)");
  gen->add_option("--seed-token", ga.seed_token, "First input in scratch mode");
  gen->add_option("--token-map", ga.token_map, "identity, clamp or clamp:lo:hi");

  FiltersArgs fa;
  auto* filters = app.add_subcommand("filters", "Export a spectral filter bank as CSV");
  filters->add_option("--length,-L", fa.length, "Filter length")->required();
  filters->add_option("--count,-k", fa.count, "Number of filters")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*verify) return cmd_verify(g, va);
    if (*bench) return cmd_bench(g, ba);
    if (*slope) return cmd_slope(g, sa);
    if (*gen) return cmd_gen(g, ga);
    if (*filters) return cmd_filters(g, fa);
  } catch (const ff::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ff::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerifyFailed;
  }
  return kExitUsage;
}
