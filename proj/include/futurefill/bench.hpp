#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "futurefill/engines.hpp"
#include "futurefill/generate.hpp"

namespace futurefill {

enum class GenMode { scratch, prompt };
enum class FilterSource { random, spectral };

GenMode parse_gen_mode(std::string_view text);
std::string_view to_string(GenMode mode);
FilterSource parse_filter_source(std::string_view text);

struct BenchConfig {
  std::vector<EngineKind> engines{EngineKind::naive, EngineKind::epoched, EngineKind::continuous};
  /// Generation lengths, ascending.
  std::vector<std::size_t> lengths;
  GenMode mode = GenMode::scratch;
  /// Epoched only; nullopt selects optimal_epoch_length(L_gen).
  std::optional<std::size_t> epoch_length;
  std::size_t prompt_length = 0;
  std::size_t channels = 1;
  std::size_t trials = 3;
  std::size_t warmup = 1;
  std::uint64_t seed = 0;
  FilterSource filters = FilterSource::random;
  /// Bounded by default so long feedback runs stay finite.
  TokenMap token_map = TokenMap::clamp(-1.0, 1.0);
  /// Run channels of one trial on separate threads.
  bool parallel_channels = false;
};

/// One measured trial. Column order of the CSV follows the field order.
struct BenchRecord {
  std::string engine;
  GenMode mode = GenMode::scratch;
  std::size_t gen_length = 0;
  std::size_t prompt_length = 0;
  /// Epoch length K for epoched runs, 0 otherwise.
  std::size_t epoch_length = 0;
  std::size_t channels = 1;
  std::size_t trial = 0;
  std::uint64_t wall_ns = 0;
  std::uint64_t mac_count = 0;
  std::uint64_t ff_cost = 0;
  std::uint64_t cache_rebuilds = 0;
  std::uint64_t peak_aux_elems = 0;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

inline constexpr const char* kBenchCsvHeader =
    "engine,mode,L_gen,L_prompt,K_epoch,channels,trial,wall_ns,mac_count,ff_cost,"
    "cache_rebuilds,peak_aux_elems";

/// Data for channel c at length L comes from stream_seed(seed, "data", L, c),
/// so every engine and trial sees the same filters and prompts.
std::vector<BenchRecord> run_bench(const BenchConfig& config,
                                   const std::function<void(const BenchRecord&)>& on_record = {});

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);
void write_bench_row(std::ostream& out, const BenchRecord& record);
std::vector<BenchRecord> read_bench_csv(std::istream& in, const std::string& source = "<stream>");

enum class Metric { mac_count, ff_cost, total_cost, wall_ns, cache_rebuilds, peak_aux_elems };
Metric parse_metric(std::string_view text);
std::string_view to_string(Metric metric);
double metric_value(const BenchRecord& record, Metric metric);

/// Mean over trials with the first trial dropped whenever more than one
/// trial exists (the first run absorbs cold caches).
double summary_mean(const std::vector<BenchRecord>& trials, Metric metric);

struct SummaryRow {
  std::string engine;
  std::size_t gen_length = 0;
  std::size_t epoch_length = 0;
  std::size_t trials_used = 0;
  double mean_wall_ns = 0.0;
  double mean_total_cost = 0.0;
};
std::vector<SummaryRow> summarize(const std::vector<BenchRecord>& records);

/// Least squares fit of log2(metric) against log2(L_gen) over per-L means.
struct SlopeFit {
  std::string engine;
  Metric metric = Metric::total_cost;
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  std::size_t points = 0;
};

/// Requires at least 4 distinct lengths for the engine (ConfigError otherwise).
SlopeFit fit_slope(const std::vector<BenchRecord>& records, Metric metric, const std::string& engine);

/// Parses "4096", "2^12", or an inclusive power-of-two range "2^12..2^17".
std::vector<std::size_t> parse_lengths(std::string_view text);

}  // namespace futurefill
