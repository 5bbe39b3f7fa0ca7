#include "futurefill/bench.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <thread>

#include "futurefill/errors.hpp"
#include "futurefill/rng.hpp"
#include "futurefill/spectral.hpp"

namespace futurefill {

GenMode parse_gen_mode(std::string_view text) {
  if (text == "scratch") return GenMode::scratch;
  if (text == "prompt") return GenMode::prompt;
  throw ConfigError("unknown mode '" + std::string(text) + "' (expected scratch or prompt)");
}

std::string_view to_string(GenMode mode) { return mode == GenMode::scratch ? "scratch" : "prompt"; }

FilterSource parse_filter_source(std::string_view text) {
  if (text == "random") return FilterSource::random;
  if (text == "spectral") return FilterSource::spectral;
  throw ConfigError("unknown filter source '" + std::string(text) + "'");
}

namespace {

struct ChannelData {
  Filter filter;
  Signal prompt;
};

std::vector<ChannelData> make_channels(const BenchConfig& config, std::size_t gen_length) {
  const std::size_t length = config.prompt_length + gen_length;
  std::vector<ChannelData> channels;
  std::optional<SpectralFilterBank> bank;
  if (config.filters == FilterSource::spectral) bank = spectral_filters(length, config.channels);
  for (std::size_t c = 0; c < config.channels; ++c) {
    Rng rng(stream_seed(config.seed, "data", gen_length, c));
    Signal taps = bank ? bank->filters[c] : random_filter_bank(length, 1, rng).filters[0];
    std::vector<double> prompt(config.mode == GenMode::prompt ? config.prompt_length : 0);
    for (auto& x : prompt) x = rng.uniform(-1.0, 1.0);
    channels.push_back({Filter(std::move(taps), length), Signal(std::move(prompt))});
  }
  return channels;
}

CostMeter run_channel(const BenchConfig& config, const EngineConfig& engine, const ChannelData& data,
                      std::size_t gen_length) {
  if (config.mode == GenMode::scratch) {
    return generate_scratch(data.filter, gen_length, engine, 1.0, config.token_map).decode;
  }
  const auto r = generate_prompted(data.prompt, data.filter, gen_length, engine, config.token_map);
  CostMeter total = r.decode;
  total.mac_count += r.prefill.mac_count;
  total.ff_cost += r.prefill.ff_cost;
  total.fast_convolutions += r.prefill.fast_convolutions;
  return total;
}

BenchRecord run_trial(const BenchConfig& config, const EngineConfig& engine,
                      const std::vector<ChannelData>& channels, std::size_t gen_length) {
  std::vector<CostMeter> meters(channels.size());
  const auto start = std::chrono::steady_clock::now();
  if (config.parallel_channels && channels.size() > 1) {
    std::vector<std::jthread> workers;
    for (std::size_t c = 0; c < channels.size(); ++c) {
      workers.emplace_back([&, c] { meters[c] = run_channel(config, engine, channels[c], gen_length); });
    }
  } else {
    for (std::size_t c = 0; c < channels.size(); ++c) {
      meters[c] = run_channel(config, engine, channels[c], gen_length);
    }
  }
  const auto stop = std::chrono::steady_clock::now();

  CostMeter total;
  for (const auto& m : meters) total = combine_concurrent(total, m);
  BenchRecord rec;
  rec.engine = std::string(to_string(engine.kind));
  rec.mode = config.mode;
  rec.gen_length = gen_length;
  rec.prompt_length = config.mode == GenMode::prompt ? config.prompt_length : 0;
  rec.epoch_length = engine.kind == EngineKind::epoched ? resolve_epoch_length(engine, gen_length) : 0;
  rec.channels = channels.size();
  rec.wall_ns = static_cast<std::uint64_t>(std::max<std::int64_t>(
      1, std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count()));
  rec.mac_count = total.mac_count;
  rec.ff_cost = total.ff_cost;
  rec.cache_rebuilds = total.cache_rebuilds;
  rec.peak_aux_elems = total.peak_aux_elems;
  return rec;
}

}  // namespace

std::vector<BenchRecord> run_bench(const BenchConfig& config,
                                   const std::function<void(const BenchRecord&)>& on_record) {
  if (config.lengths.empty()) throw ConfigError("bench: no lengths given");
  if (!std::is_sorted(config.lengths.begin(), config.lengths.end())) {
    throw ConfigError("bench: lengths must be ascending");
  }
  if (config.trials < 1) throw ConfigError("bench: trials must be >= 1");
  if (config.channels < 1) throw ConfigError("bench: channels must be >= 1");
  if (config.engines.empty()) throw ConfigError("bench: no engines given");
  for (std::size_t len : config.lengths) {
    if (len == 0) throw ConfigError("bench: lengths must be positive");
    if (config.filters == FilterSource::spectral &&
        len + config.prompt_length > kMaxEigensolveLength) {
      throw ConfigError("bench: spectral filters of length " +
                        std::to_string(len + config.prompt_length) + " exceed the eigensolve cap of " +
                        std::to_string(kMaxEigensolveLength));
    }
    if (config.epoch_length && *config.epoch_length > len) {
      throw ConfigError("bench: epoch length exceeds generation length " + std::to_string(len));
    }
  }

  std::vector<BenchRecord> records;
  for (EngineKind kind : config.engines) {
    EngineConfig engine{.kind = kind, .epoch_length = config.epoch_length};
    for (std::size_t len : config.lengths) {
      const auto channels = make_channels(config, len);
      for (std::size_t w = 0; w < config.warmup; ++w) run_trial(config, engine, channels, len);
      for (std::size_t trial = 0; trial < config.trials; ++trial) {
        BenchRecord rec = run_trial(config, engine, channels, len);
        rec.trial = trial;
        if (on_record) on_record(rec);
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

void write_bench_row(std::ostream& out, const BenchRecord& r) {
  out << r.engine << ',' << to_string(r.mode) << ',' << r.gen_length << ',' << r.prompt_length << ','
      << r.epoch_length << ',' << r.channels << ',' << r.trial << ',' << r.wall_ns << ','
      << r.mac_count << ',' << r.ff_cost << ',' << r.cache_rebuilds << ',' << r.peak_aux_elems
      << '\n';
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << kBenchCsvHeader << '\n';
  for (const auto& r : records) write_bench_row(out, r);
}

namespace {

template <typename T>
T parse_uint(std::string_view text, const std::string& source, std::size_t line, const char* column) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(source, line, std::string("bad ") + column + " value '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::vector<BenchRecord> read_bench_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kBenchCsvHeader) throw ParseError(source, 1, "unexpected header");

  std::vector<BenchRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 12) throw ParseError(source, lineno, "expected 12 columns");
    BenchRecord r;
    r.engine = std::string(f[0]);
    try {
      r.mode = parse_gen_mode(f[1]);
    } catch (const ConfigError& e) {
      throw ParseError(source, lineno, e.what());
    }
    r.gen_length = parse_uint<std::size_t>(f[2], source, lineno, "L_gen");
    r.prompt_length = parse_uint<std::size_t>(f[3], source, lineno, "L_prompt");
    r.epoch_length = parse_uint<std::size_t>(f[4], source, lineno, "K_epoch");
    r.channels = parse_uint<std::size_t>(f[5], source, lineno, "channels");
    r.trial = parse_uint<std::size_t>(f[6], source, lineno, "trial");
    r.wall_ns = parse_uint<std::uint64_t>(f[7], source, lineno, "wall_ns");
    r.mac_count = parse_uint<std::uint64_t>(f[8], source, lineno, "mac_count");
    r.ff_cost = parse_uint<std::uint64_t>(f[9], source, lineno, "ff_cost");
    r.cache_rebuilds = parse_uint<std::uint64_t>(f[10], source, lineno, "cache_rebuilds");
    r.peak_aux_elems = parse_uint<std::uint64_t>(f[11], source, lineno, "peak_aux_elems");
    records.push_back(std::move(r));
  }
  return records;
}

Metric parse_metric(std::string_view text) {
  if (text == "mac_count") return Metric::mac_count;
  if (text == "ff_cost") return Metric::ff_cost;
  if (text == "total_cost" || text == "mac_count+ff_cost") return Metric::total_cost;
  if (text == "wall_ns") return Metric::wall_ns;
  if (text == "cache_rebuilds") return Metric::cache_rebuilds;
  if (text == "peak_aux_elems") return Metric::peak_aux_elems;
  throw ConfigError("unknown metric '" + std::string(text) + "'");
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::mac_count: return "mac_count";
    case Metric::ff_cost: return "ff_cost";
    case Metric::total_cost: return "total_cost";
    case Metric::wall_ns: return "wall_ns";
    case Metric::cache_rebuilds: return "cache_rebuilds";
    case Metric::peak_aux_elems: return "peak_aux_elems";
  }
  return "?";
}

double metric_value(const BenchRecord& r, Metric metric) {
  switch (metric) {
    case Metric::mac_count: return static_cast<double>(r.mac_count);
    case Metric::ff_cost: return static_cast<double>(r.ff_cost);
    case Metric::total_cost: return static_cast<double>(r.mac_count + r.ff_cost);
    case Metric::wall_ns: return static_cast<double>(r.wall_ns);
    case Metric::cache_rebuilds: return static_cast<double>(r.cache_rebuilds);
    case Metric::peak_aux_elems: return static_cast<double>(r.peak_aux_elems);
  }
  return 0.0;
}

double summary_mean(const std::vector<BenchRecord>& trials, Metric metric) {
  if (trials.empty()) return 0.0;
  std::vector<const BenchRecord*> sorted;
  for (const auto& r : trials) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->trial < b->trial; });
  const std::size_t skip = sorted.size() > 1 ? 1 : 0;
  double sum = 0.0;
  for (std::size_t i = skip; i < sorted.size(); ++i) sum += metric_value(*sorted[i], metric);
  return sum / static_cast<double>(sorted.size() - skip);
}

namespace {

std::map<std::pair<std::string, std::size_t>, std::vector<BenchRecord>> group(
    const std::vector<BenchRecord>& records) {
  std::map<std::pair<std::string, std::size_t>, std::vector<BenchRecord>> groups;
  for (const auto& r : records) groups[{r.engine, r.gen_length}].push_back(r);
  return groups;
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<BenchRecord>& records) {
  std::vector<SummaryRow> rows;
  for (const auto& [key, trials] : group(records)) {
    SummaryRow row;
    row.engine = key.first;
    row.gen_length = key.second;
    row.epoch_length = trials.front().epoch_length;
    row.trials_used = trials.size() > 1 ? trials.size() - 1 : 1;
    row.mean_wall_ns = summary_mean(trials, Metric::wall_ns);
    row.mean_total_cost = summary_mean(trials, Metric::total_cost);
    rows.push_back(std::move(row));
  }
  return rows;
}

SlopeFit fit_slope(const std::vector<BenchRecord>& records, Metric metric, const std::string& engine) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [key, trials] : group(records)) {
    if (key.first != engine) continue;
    const double mean = summary_mean(trials, metric);
    if (!(mean > 0.0)) {
      throw ConfigError("slope: metric " + std::string(to_string(metric)) + " is zero for " + engine +
                        " at L=" + std::to_string(key.second));
    }
    xs.push_back(std::log2(static_cast<double>(key.second)));
    ys.push_back(std::log2(mean));
  }
  if (xs.size() < 4) {
    throw ConfigError("slope: need at least 4 distinct lengths for " + engine + ", have " +
                      std::to_string(xs.size()));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  SlopeFit fit;
  fit.engine = engine;
  fit.metric = metric;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / n);
  fit.points = xs.size();
  return fit;
}

namespace {

std::size_t parse_one_length(std::string_view text) {
  std::size_t value = 0;
  if (text.starts_with("2^")) {
    unsigned exp = 0;
    const auto body = text.substr(2);
    const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), exp);
    if (ec != std::errc() || ptr != body.data() + body.size() || exp > 40) {
      throw ConfigError("bad length '" + std::string(text) + "'");
    }
    return std::size_t{1} << exp;
  }
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value == 0) {
    throw ConfigError("bad length '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::vector<std::size_t> parse_lengths(std::string_view text) {
  std::vector<std::size_t> out;
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const std::size_t lo = parse_one_length(text.substr(0, dots));
    const std::size_t hi = parse_one_length(text.substr(dots + 2));
    if (!std::has_single_bit(lo) || !std::has_single_bit(hi) || lo > hi) {
      throw ConfigError("length range must run between ascending powers of two");
    }
    for (std::size_t l = lo; l <= hi; l <<= 1) out.push_back(l);
    return out;
  }
  out.push_back(parse_one_length(text));
  return out;
}

}  // namespace futurefill
