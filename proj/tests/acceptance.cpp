// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Pass criterion numbers to run a subset.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "futurefill/bench.hpp"
#include "futurefill/conv.hpp"
#include "futurefill/engines.hpp"
#include "futurefill/generate.hpp"
#include "futurefill/rng.hpp"
#include "futurefill/verify.hpp"

#ifndef FUTUREFILL_CLI_PATH
#error "FUTUREFILL_CLI_PATH must name the CLI binary"
#endif

using namespace futurefill;

namespace {

constexpr std::uint64_t kSeed = 20240607;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
  void absorb(const SuiteResult& s) {
    detail << ' ' << s.name << ": " << s.instances << " instances, max_error=" << s.max_error << ';';
    if (!s.passed) {
      pass = false;
      detail << " [failed instance: " << s.failure.dump() << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void exactness(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  o.absorb(suite_oracle_equivalence(
      kSeed, {.exhaustive_max = 256, .random_lengths = {1024, 4096, 16384}, .random_cases = 50}));
  const double secs = seconds_since(start);
  o.detail << " runtime " << secs << " s;";
  o.require(secs < 120.0, "runtime under 2 min");
}

void futurefill_identity(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  o.absorb(suite_futurefill(kSeed, 1000, 512));
  const double secs = seconds_since(start);
  o.detail << " runtime " << secs << " s;";
  o.require(secs < 10.0, "runtime under 10 s");
}

void split_identity(Outcome& o) {
  o.absorb(suite_split_identity(kSeed, 64, 4096, 32));
}

void epoched_accounting(Outcome& o) {
  for (unsigned j = 10; j <= 17; ++j) {
    const std::size_t length = std::size_t{1} << j;
    const std::size_t k = optimal_epoch_length(length);
    Rng rng(stream_seed(kSeed, "criterion-4", length));
    std::vector<double> taps(length);
    for (auto& x : taps) x = rng.uniform(-1.0, 1.0);
    EpochedEngine engine(Filter(Signal(std::move(taps)), length), length, k);
    for (std::size_t t = 0; t < length; ++t) engine.push(rng.uniform(-1.0, 1.0));
    const auto& m = engine.meter();
    o.detail << " L=2^" << j << " K=" << k << " rebuilds=" << m.cache_rebuilds
             << " peak_aux=" << m.peak_aux_elems << ';';
    o.require(m.cache_rebuilds == length / k, "rebuilds == floor(L/K) at 2^" + std::to_string(j));
    o.require(m.peak_aux_elems <= 4 * k, "peak_aux <= 4K at 2^" + std::to_string(j));
  }
  const std::size_t k65536 = optimal_epoch_length(65536);
  o.detail << " K(65536)=" << k65536 << ';';
  o.require(k65536 == 1024, "K(65536) == 1024");
}

void continuous_accounting(Outcome& o) {
  std::uint64_t worst_ratio_num = 0, worst_ratio_den = 1;
  for (unsigned j = 0; j <= 17; ++j) {
    const std::size_t length = std::size_t{1} << j;
    Rng rng(stream_seed(kSeed, "criterion-5", length));
    std::vector<double> taps(length);
    for (auto& x : taps) x = rng.uniform(-1.0, 1.0);
    ContinuousEngine engine(Filter(Signal(std::move(taps)), length), length, {.audit_cache = true});
    for (std::size_t t = 0; t < length; ++t) engine.push(rng.uniform(-1.0, 1.0));

    std::uint64_t closed = 0;
    for (std::uint64_t t = 1; t < length; ++t) {
      const unsigned k = k_of_t(t, j);
      closed += std::max(1u, k) * (std::uint64_t{1} << k);
    }
    const std::uint64_t bound = 3ull * length * j * j;
    const auto ff = engine.meter().ff_cost;
    o.require(ff == closed, "ff_cost matches the schedule sum at 2^" + std::to_string(j));
    o.require(ff <= bound, "ff_cost <= 3 L log2^2 L at 2^" + std::to_string(j));
    o.require(engine.lemma_violations() == 0, "write-once cache at 2^" + std::to_string(j));
    if (bound > 0 && ff * worst_ratio_den > worst_ratio_num * bound) {
      worst_ratio_num = ff;
      worst_ratio_den = bound;
    }
  }
  o.detail << " L=2^0..2^17, max ff_cost/bound="
           << static_cast<double>(worst_ratio_num) / static_cast<double>(worst_ratio_den)
           << ", lemma violations 0 required;";
}

void scaling_slopes(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  BenchConfig cfg;
  cfg.lengths = parse_lengths("2^12..2^17");
  cfg.trials = 1;
  cfg.warmup = 0;
  cfg.seed = kSeed;
  const auto records = run_bench(cfg);
  const auto naive = fit_slope(records, Metric::mac_count, "naive");
  const auto naive_total = fit_slope(records, Metric::total_cost, "naive");
  const auto cont = fit_slope(records, Metric::total_cost, "continuous");
  const auto ep = fit_slope(records, Metric::total_cost, "epoched");
  const double secs = seconds_since(start);
  o.detail << " naive mac slope=" << naive.slope << " (total " << naive_total.slope << ")"
           << "; continuous total slope=" << cont.slope << "; epoched total slope=" << ep.slope
           << "; runtime " << secs << " s;";
  o.require(std::abs(naive.slope - 2.0) <= 0.02, "naive slope 2.00 +- 0.02");
  o.require(std::abs(naive_total.slope - 2.0) <= 0.02, "naive total slope 2.00 +- 0.02");
  o.require(cont.slope <= 1.35, "continuous slope <= 1.35");
  o.require(ep.slope >= 1.40 && ep.slope <= 1.65, "epoched slope in [1.40, 1.65]");
  o.require(secs < 300.0, "runtime under 5 min");
}

void wall_clock(Outcome& o) {
  BenchConfig cfg;
  cfg.lengths = {65536};
  cfg.seed = kSeed;
  const auto records = run_bench(cfg);
  std::vector<BenchRecord> naive, ep, cont;
  for (const auto& r : records) {
    (r.engine == "naive" ? naive : r.engine == "epoched" ? ep : cont).push_back(r);
  }
  const double tn = summary_mean(naive, Metric::wall_ns);
  const double te = summary_mean(ep, Metric::wall_ns);
  const double tc = summary_mean(cont, Metric::wall_ns);
  o.detail << " L=2^16 mean wall ms: naive=" << tn / 1e6 << " epoched=" << te / 1e6
           << " continuous=" << tc / 1e6 << "; speedups epoched=" << tn / te
           << "x continuous=" << tn / tc << "x;";
  o.require(tn / te >= 3.0, "epoched >= 3x over naive");
  o.require(tn / tc >= 3.0, "continuous >= 3x over naive");
}

void prompted(Outcome& o) {
  o.absorb(suite_prompted(kSeed, 64, 64));
  const std::size_t count = 256;
  std::set<std::uint64_t> peaks;
  for (std::size_t p : {std::size_t{1} << 10, std::size_t{1} << 13, std::size_t{1} << 15}) {
    Rng rng(stream_seed(kSeed, "criterion-8", p));
    std::vector<double> prompt(p), taps(p + count);
    for (auto& x : prompt) x = rng.uniform(-1.0, 1.0);
    for (auto& x : taps) x = rng.uniform(-1.0, 1.0) / static_cast<double>(p + count);
    const Filter phi(Signal(std::move(taps)), p + count);
    for (EngineKind kind : {EngineKind::naive, EngineKind::epoched, EngineKind::continuous}) {
      const auto r = generate_prompted(Signal(prompt), phi, count, {.kind = kind});
      o.require(r.decode.peak_aux_elems <= 4 * count,
                std::string(to_string(kind)) + " decode peak <= 4K at L_prompt=" + std::to_string(p));
      o.require(r.prefill.fast_convolutions == 1, "prefill uses one fast convolution");
      if (kind == EngineKind::continuous) peaks.insert(r.decode.peak_aux_elems);
    }
  }
  o.detail << " decode peak_aux at K=256 across L_prompt 2^10,2^13,2^15: ";
  for (auto v : peaks) o.detail << v << ' ';
  o.require(peaks.size() == 1, "decode peak independent of prompt length");
}

void spectral(Outcome& o) {
  o.absorb(suite_hankel(64));
  o.absorb(suite_filter_bank(64, 8));
  o.absorb(suite_gradient(kSeed, 50));
  const auto trace = teacher_student(kSeed, 2000);
  o.detail << " teacher-student loss first decile=" << trace.first_decile_mean
           << " last decile=" << trace.last_decile_mean << ';';
  o.require(trace.last_decile_mean < trace.first_decile_mean, "loss decreases over 2000 steps");
}

void strip_wall(nlohmann::json& j) {
  if (j.is_object()) {
    j.erase("wall_ns");
    for (auto& [key, value] : j.items()) strip_wall(value);
  } else if (j.is_array()) {
    for (auto& value : j) strip_wall(value);
  }
}

void cli_determinism(Outcome& o) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("futurefill-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::array<std::string, 2> reports;
  for (int run = 0; run < 2; ++run) {
    const auto path = dir / ("verify" + std::to_string(run) + ".json");
    const std::string cmd = std::string("\"") + FUTUREFILL_CLI_PATH + "\" verify --seed 7 --json --output \"" +
                            path.string() + "\" > /dev/null";
    const auto start = std::chrono::steady_clock::now();
    const int status = std::system(cmd.c_str());
    const double secs = seconds_since(start);
    o.detail << " run " << run + 1 << ": status=" << status << " " << secs << " s;";
    o.require(status == 0, "verify exits 0");
    o.require(secs < 300.0, "verify under 5 min");
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      auto j = nlohmann::json::parse(buf.str());
      strip_wall(j);
      reports[static_cast<std::size_t>(run)] = j.dump();
    } catch (const std::exception& e) {
      o.require(false, std::string("report parses: ") + e.what());
    }
  }
  std::filesystem::remove_all(dir);
  o.require(!reports[0].empty() && reports[0] == reports[1], "reports identical without wall_ns");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"exactness against the direct oracle", exactness},
      {"futurefill equals the full-convolution slice", futurefill_identity},
      {"split identity", split_identity},
      {"epoched rebuild count and memory", epoched_accounting},
      {"continuous ff_cost bound and write-once cache", continuous_accounting},
      {"scaling slopes of deterministic counters", scaling_slopes},
      {"wall-clock speedup at L=2^16", wall_clock},
      {"prompted generation", prompted},
      {"spectral module", spectral},
      {"CLI determinism", cli_determinism},
  };
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(static_cast<std::size_t>(std::atoi(argv[i])));

  int failures = 0;
  for (std::size_t n = 1; n <= criteria.size(); ++n) {
    if (!selected.empty() && !selected.contains(n)) continue;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[n - 1].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << n << " (" << criteria[n - 1].first << "): " << (o.pass ? "PASS" : "FAIL")
              << " |" << o.detail.str() << " (" << seconds_since(start) << " s)" << std::endl;
    if (!o.pass) ++failures;
  }
  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED") << '\n';
  return failures == 0 ? 0 : 1;
}
