#include "futurefill/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "futurefill/conv.hpp"
#include "futurefill/engines.hpp"
#include "futurefill/errors.hpp"
#include "futurefill/generate.hpp"
#include "futurefill/oracles.hpp"
#include "futurefill/rng.hpp"
#include "futurefill/spectral.hpp"

namespace futurefill {

namespace {

using json = nlohmann::ordered_json;

Signal random_signal(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Signal(std::move(v));
}

double max_abs(const Signal& s) {
  double m = 0.0;
  for (double x : s.values()) m = std::max(m, std::abs(x));
  return m;
}

/// max|a-b| / (1 + max|b|); infinite on length mismatch.
double relative_error(const Signal& got, const Signal& want) {
  if (got.size() != want.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) m = std::max(m, std::abs(got[i] - want[i]));
  return m / (1.0 + max_abs(want));
}

// Vectors short enough to paste into a replay are kept; longer ones are
// regenerated from the instance seed.
json small_signal(const Signal& s) {
  if (s.size() > 64) return nullptr;
  return json(s.values());
}

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

class SuiteRun {
 public:
  SuiteRun(std::string name, double tolerance) : start_(std::chrono::steady_clock::now()) {
    result_.name = std::move(name);
    result_.tolerance = tolerance;
  }

  /// Records one instance; the first failing one is kept for replay.
  bool record(double error, const std::function<json()>& describe) {
    ++result_.instances;
    if (!std::isfinite(error)) error = INFINITY;
    result_.max_error = std::max(result_.max_error, error);
    const bool ok = error <= result_.tolerance;
    if (!ok && result_.passed) {
      result_.passed = false;
      result_.failure = describe();
      result_.failure["error"] = std::isfinite(error) ? json(error) : json("inf");
    }
    return ok;
  }

  bool check(bool ok, const std::function<json()>& describe) { return record(ok ? 0.0 : INFINITY, describe); }

  SuiteResult finish() {
    result_.wall_ns = static_cast<std::uint64_t>(std::max<std::int64_t>(
        1, std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start_)
               .count()));
    return std::move(result_);
  }

 private:
  SuiteResult result_;
  std::chrono::steady_clock::time_point start_;
};

Signal run_engine(const EngineConfig& config, const Filter& phi, const Signal& u) {
  auto engine = make_engine(config, phi, u.size());
  std::vector<double> out(u.size());
  for (std::size_t t = 0; t < u.size(); ++t) out[t] = engine->push(u[t]);
  return Signal(std::move(out));
}

std::vector<EngineConfig> equivalence_configs(std::size_t length) {
  std::vector<EngineConfig> configs{{.kind = EngineKind::naive}, {.kind = EngineKind::continuous}};
  std::set<std::size_t> ks{1, static_cast<std::size_t>(std::sqrt(static_cast<double>(length))), length};
  if (length >= 2) ks.insert(optimal_epoch_length(length));
  for (std::size_t k : ks) {
    if (k >= 1) configs.push_back({.kind = EngineKind::epoched, .epoch_length = k});
  }
  return configs;
}

void equivalence_case(SuiteRun& run, std::uint64_t seed, std::size_t length, std::size_t index) {
  const std::uint64_t instance_seed = stream_seed(seed, "equivalence", length, index);
  Rng rng(instance_seed);
  const Signal taps = random_signal(rng, length);
  const Signal u = random_signal(rng, length);
  const Filter phi(taps, length);
  const Signal want = oracle::conv_full_direct(u, taps).slice(1, static_cast<std::ptrdiff_t>(length));
  for (const auto& config : equivalence_configs(length)) {
    const Signal got = run_engine(config, phi, u);
    run.record(relative_error(got, want), [&] {
      return json{{"length", length},
                  {"case", index},
                  {"instance_seed", instance_seed},
                  {"engine", to_string(config.kind)},
                  {"epoch_length", config.epoch_length.value_or(0)},
                  {"filter", small_signal(taps)},
                  {"inputs", small_signal(u)}};
    });
  }
}

}  // namespace

SuiteResult suite_oracle_equivalence(std::uint64_t seed, const EquivalenceParams& params) {
  SuiteRun run("oracle_equivalence", 1e-8);
  for (std::size_t length = 1; length <= params.exhaustive_max; ++length) {
    equivalence_case(run, seed, length, 0);
  }
  for (std::size_t length : params.random_lengths) {
    for (std::size_t c = 0; c < params.random_cases; ++c) equivalence_case(run, seed, length, c);
  }
  return run.finish();
}

SuiteResult suite_futurefill(std::uint64_t seed, std::size_t instances, std::size_t max_length,
                             Fault fault) {
  SuiteRun run("futurefill", 1e-10);
  for (std::size_t n = 0; n < instances; ++n) {
    const std::uint64_t instance_seed = stream_seed(seed, "futurefill", n);
    Rng rng(instance_seed);
    const std::size_t t1 = rng.below(max_length + 1);
    const std::size_t t2 = 1 + rng.below(max_length);
    const Signal v = random_signal(rng, t1);
    const Signal w = random_signal(rng, t2);
    Signal got;
    if (fault == Fault::futurefill_off_by_one) {
      const auto first = static_cast<std::ptrdiff_t>(t1) + 2;
      got = conv_full(v, w).slice(first, first + static_cast<std::ptrdiff_t>(t2) - 2);
    } else {
      got = futurefill(v, w);
    }
    const Signal want = oracle::futurefill_direct(v, w);
    run.record(relative_error(got, want), [&] {
      return json{{"case", n},
                  {"instance_seed", instance_seed},
                  {"t1", t1},
                  {"t2", t2},
                  {"v", small_signal(v)},
                  {"w", small_signal(w)}};
    });
  }
  return run.finish();
}

SuiteResult suite_split_identity(std::uint64_t seed, std::size_t exhaustive_max, std::size_t random_length,
                                 std::size_t random_splits) {
  SuiteRun run("split_identity", 0.0);
  const auto one = [&](std::size_t length, std::size_t t1, std::size_t index) {
    const std::uint64_t instance_seed = stream_seed(seed, "split", length, index);
    Rng rng(instance_seed);
    const Signal a = random_signal(rng, length);
    const Signal b = random_signal(rng, length);
    run.check(split_check(a, b, t1), [&] {
      return json{{"length", length}, {"t1", t1}, {"instance_seed", instance_seed},
                  {"a", small_signal(a)}, {"b", small_signal(b)}};
    });
  };
  for (std::size_t length = 1; length <= exhaustive_max; ++length) {
    for (std::size_t t1 = 1; t1 <= length; ++t1) one(length, t1, 0);
  }
  if (random_length > 0) {
    Rng picks(stream_seed(seed, "split-points", random_length));
    for (std::size_t n = 0; n < random_splits; ++n) {
      one(random_length, 1 + picks.below(random_length), n + 1);
    }
  }
  return run.finish();
}

SuiteResult suite_cache_lemma(std::uint64_t seed, std::size_t max_length) {
  SuiteRun run("cache_lemma", 0.0);
  std::vector<std::size_t> lengths;
  for (std::size_t l = 1; l <= max_length; ++l) lengths.push_back(l);
  for (std::size_t l = 512; l <= 4096; l *= 2) {
    if (l > max_length) lengths.push_back(l);
  }
  for (std::size_t length : lengths) {
    for (std::size_t limit : {std::size_t{0}, std::size_t{16}}) {
      Rng rng(stream_seed(seed, "lemma", length, limit));
      const Filter phi(random_signal(rng, length), length);
      ContinuousEngine engine(phi, length, {.direct_block_limit = limit, .audit_cache = true});
      for (std::size_t t = 0; t < length; ++t) engine.push(rng.uniform(-1.0, 1.0));
      run.check(engine.lemma_violations() == 0, [&] {
        return json{{"length", length},
                    {"direct_block_limit", limit},
                    {"violations", engine.lemma_violations()}};
      });
    }
  }
  return run.finish();
}

SuiteResult suite_cost_bounds(unsigned max_log2) {
  SuiteRun run("cost_bounds", 0.0);
  for (unsigned j = 0; j <= max_log2; ++j) {
    const std::size_t length = std::size_t{1} << j;
    const Filter phi(Signal::zeros(length), length);

    ContinuousEngine cont(phi, length);
    for (std::size_t t = 0; t < length; ++t) cont.push(0.0);
    std::uint64_t closed = 0;
    for (std::uint64_t t = 1; t < length; ++t) {
      const unsigned k = k_of_t(t, j);
      closed += std::max(1u, k) * (std::uint64_t{1} << k);
    }
    const std::uint64_t bound = 3ull * length * j * j;
    const auto ff = cont.meter().ff_cost;
    run.check(ff == closed && ff <= bound, [&] {
      return json{{"check", "continuous_ff_cost"}, {"length", length}, {"ff_cost", ff},
                  {"closed_form", closed}, {"bound", bound}};
    });

    if (length >= 2) {
      const std::size_t k = optimal_epoch_length(length);
      EpochedEngine ep(phi, length, k);
      for (std::size_t t = 0; t < length; ++t) ep.push(0.0);
      const auto& m = ep.meter();
      run.check(m.cache_rebuilds == length / k && m.peak_aux_elems <= 4 * k, [&] {
        return json{{"check", "epoched_accounting"}, {"length", length}, {"epoch_length", k},
                    {"cache_rebuilds", m.cache_rebuilds}, {"peak_aux_elems", m.peak_aux_elems}};
      });
    }

    if (j <= 12) {
      NaiveEngine naive(phi, length);
      for (std::size_t t = 0; t < length; ++t) naive.push(0.0);
      const std::uint64_t want = std::uint64_t{length} * (length + 1) / 2;
      run.check(naive.meter().mac_count == want, [&] {
        return json{{"check", "naive_mac_count"}, {"length", length},
                    {"mac_count", naive.meter().mac_count}, {"closed_form", want}};
      });
    }
  }
  run.check(optimal_epoch_length(65536) == 1024, [] {
    return json{{"check", "optimal_epoch_length"}, {"length", 65536},
                {"epoch_length", optimal_epoch_length(65536)}};
  });
  return run.finish();
}

SuiteResult suite_prompted(std::uint64_t seed, std::size_t max_prompt, std::size_t max_count) {
  SuiteRun run("prompted", 1e-8);
  const std::vector<EngineConfig> engines{
      {.kind = EngineKind::naive}, {.kind = EngineKind::epoched}, {.kind = EngineKind::continuous}};
  for (std::size_t p = 0; p <= max_prompt; ++p) {
    for (std::size_t count = 1; count <= max_count; ++count) {
      const std::uint64_t instance_seed = stream_seed(seed, "prompted", p, count);
      Rng rng(instance_seed);
      const Signal prompt = random_signal(rng, p);
      // Identity feedback needs a contracting filter to stay bounded;
      // clamped feedback tolerates full-scale taps.
      const bool clamp = (p + count) % 2 == 1;
      const double scale = clamp ? 1.0 : 0.5 / static_cast<double>(p + count);
      const Filter phi(random_signal(rng, p + count, -scale, scale), p + count);
      const TokenMap map = clamp ? TokenMap::clamp(-1.0, 1.0) : TokenMap::identity();
      const Signal want = oracle::oracle_prompted(prompt, phi, count, map);
      for (const auto& engine : engines) {
        const auto got = generate_prompted(prompt, phi, count, engine, map);
        const bool accounting = got.prefill.fast_convolutions == (p > 0 ? 1u : 0u) &&
                                got.decode.peak_aux_elems <= 4 * count;
        const double err = accounting ? relative_error(got.outputs, want) : INFINITY;
        run.record(err, [&] {
          return json{{"prompt_length", p},
                      {"count", count},
                      {"instance_seed", instance_seed},
                      {"engine", to_string(engine.kind)},
                      {"token_map", clamp ? "clamp:-1:1" : "identity"},
                      {"prefill_fast_convolutions", got.prefill.fast_convolutions},
                      {"decode_peak_aux_elems", got.decode.peak_aux_elems},
                      {"prompt", small_signal(prompt)},
                      {"filter", small_signal(phi.taps())}};
        });
      }
    }
  }
  return run.finish();
}

SuiteResult suite_hankel(std::size_t max_index_sum) {
  SuiteRun run("hankel", 1e-12);
  for (std::size_t i = 1; i < max_index_sum; ++i) {
    for (std::size_t j = 1; i + j <= max_index_sum; ++j) {
      const double err = std::abs(hankel_entry(i, j) - oracle::hankel_entry_quadrature(i, j));
      run.record(err, [&] { return json{{"i", i}, {"j", j}}; });
    }
  }
  return run.finish();
}

SuiteResult suite_filter_bank(std::size_t length, std::size_t count) {
  SuiteRun run("filter_bank", 1e-8);
  const auto bank = spectral_filters(length, count);
  std::stringstream csv;
  write_filter_bank_csv(csv, bank);
  const auto reloaded = read_filter_bank_csv(csv);
  const Eigen::MatrixXd phi = reloaded.as_matrix();
  const Eigen::MatrixXd gram = phi.transpose() * phi;
  const auto k = static_cast<Eigen::Index>(count);
  run.record((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff(), [&] {
    return json{{"check", "orthonormality"}, {"length", length}, {"count", count}};
  });
  run.check(reloaded.as_matrix() == bank.as_matrix(), [&] {
    return json{{"check", "csv_round_trip"}, {"length", length}, {"count", count}};
  });
  return run.finish();
}

SuiteResult suite_gradient(std::uint64_t seed, std::size_t instances) {
  SuiteRun run("gradient", 1e-5);
  for (std::size_t n = 0; n < instances; ++n) {
    const std::uint64_t instance_seed = stream_seed(seed, "gradient", n);
    Rng rng(instance_seed);
    const Eigen::Index d_in = 1 + static_cast<Eigen::Index>(rng.below(3));
    const Eigen::Index d_out = 1 + static_cast<Eigen::Index>(rng.below(3));
    const std::size_t k = 1 + rng.below(3);
    const auto bank = spectral_filters(16, k);
    std::vector<Eigen::MatrixXd> mats;
    for (std::size_t i = 0; i < k; ++i) mats.push_back(random_matrix(rng, d_out, d_in));
    StuRunner runner(StuModel::full(bank, mats), {}, 16);
    const std::size_t warm = 1 + rng.below(16);
    for (std::size_t t = 0; t < warm; ++t) runner.step(random_vector(rng, d_in));
    const Eigen::MatrixXd feats = runner.features();
    const Eigen::VectorXd target = random_vector(rng, d_out);
    const auto grads = stu_loss_gradient(mats, feats, target);
    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      for (Eigen::Index r = 0; r < d_out; ++r) {
        for (Eigen::Index c = 0; c < d_in; ++c) {
          auto plus = mats;
          auto minus = mats;
          plus[i](r, c) += h;
          minus[i](r, c) -= h;
          const double fd = (stu_loss(plus, feats, target) - stu_loss(minus, feats, target)) / (2 * h);
          worst = std::max(worst, std::abs(fd - grads[i](r, c)) / std::max(1.0, std::abs(fd)));
        }
      }
    }
    run.record(worst, [&] {
      return json{{"case", n}, {"instance_seed", instance_seed}, {"d_in", d_in}, {"d_out", d_out},
                  {"filters", k}, {"warm_steps", warm}};
    });
  }
  return run.finish();
}

TeacherStudentTrace teacher_student(std::uint64_t seed, std::size_t steps, double eta) {
  if (steps < 10) throw ConfigError("teacher_student: need at least 10 steps");
  Rng rng(stream_seed(seed, "teacher-student"));
  const auto bank = spectral_filters(32, 4);
  const Eigen::Index d_in = 2;
  const Eigen::Index d_out = 1;
  std::vector<Eigen::MatrixXd> teacher_mats;
  std::vector<Eigen::MatrixXd> student_mats;
  for (std::size_t i = 0; i < bank.count(); ++i) {
    teacher_mats.push_back(random_matrix(rng, d_out, d_in));
    student_mats.push_back(Eigen::MatrixXd::Zero(d_out, d_in));
  }
  StuRunner teacher(StuModel::full(bank, teacher_mats), {}, steps);
  StuRunner student(StuModel::full(bank, student_mats), {}, steps);

  TeacherStudentTrace trace;
  for (std::size_t t = 0; t < steps; ++t) {
    const Eigen::VectorXd u = random_vector(rng, d_in);
    const Eigen::VectorXd y = teacher.step(u);
    trace.losses.push_back(student.ogd_step(u, y, eta));
  }
  const std::size_t decile = steps / 10;
  for (std::size_t t = 0; t < decile; ++t) {
    trace.first_decile_mean += trace.losses[t];
    trace.last_decile_mean += trace.losses[steps - decile + t];
  }
  trace.first_decile_mean /= static_cast<double>(decile);
  trace.last_decile_mean /= static_cast<double>(decile);
  return trace;
}

SuiteResult suite_teacher_student(std::uint64_t seed, std::size_t steps) {
  SuiteRun run("teacher_student", 0.0);
  const auto trace = teacher_student(seed, steps);
  run.check(trace.last_decile_mean < trace.first_decile_mean, [&] {
    return json{{"steps", steps},
                {"first_decile_mean", trace.first_decile_mean},
                {"last_decile_mean", trace.last_decile_mean}};
  });
  return run.finish();
}

bool VerifyReport::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed; });
}

nlohmann::ordered_json VerifyReport::to_json(bool include_wall) const {
  json out;
  out["seed"] = seed;
  out["max_length"] = max_length;
  out["passed"] = passed();
  json list = json::array();
  for (const auto& s : suites) {
    json j;
    j["name"] = s.name;
    j["passed"] = s.passed;
    j["instances"] = s.instances;
    j["max_error"] = std::isfinite(s.max_error) ? json(s.max_error) : json("inf");
    j["tolerance"] = s.tolerance;
    if (include_wall) j["wall_ns"] = s.wall_ns;
    if (!s.passed) j["failure"] = s.failure;
    list.push_back(std::move(j));
  }
  out["suites"] = std::move(list);
  return out;
}

std::string VerifyReport::to_text() const {
  std::ostringstream out;
  for (const auto& s : suites) {
    out << (s.passed ? "ok   " : "FAIL ") << s.name << "  instances=" << s.instances
        << "  max_error=" << s.max_error << "  tolerance=" << s.tolerance
        << "  ms=" << s.wall_ns / 1000000 << '\n';
    if (!s.passed) out << "     failing instance: " << s.failure.dump() << '\n';
  }
  out << (passed() ? "all suites passed" : "verification FAILED") << '\n';
  return out.str();
}

VerifyReport run_verify(const VerifyOptions& options) {
  if (options.max_length < 1) throw ConfigError("verify: max length must be positive");
  const std::uint64_t seed = options.seed;
  const std::size_t small = std::min<std::size_t>(64, options.max_length);
  VerifyReport report;
  report.seed = seed;
  report.max_length = options.max_length;
  report.suites.push_back(suite_futurefill(seed, 1000, std::max<std::size_t>(small, 2), options.fault));
  report.suites.push_back(suite_oracle_equivalence(
      seed, {.exhaustive_max = options.max_length, .random_lengths = {1024, 4096}, .random_cases = 2}));
  report.suites.push_back(suite_split_identity(seed, small, 4096, 8));
  report.suites.push_back(suite_cache_lemma(seed, options.max_length));
  report.suites.push_back(suite_cost_bounds(17));
  report.suites.push_back(suite_prompted(seed, small, small));
  report.suites.push_back(suite_hankel(64));
  report.suites.push_back(suite_filter_bank(64, 8));
  report.suites.push_back(suite_gradient(seed, 20));
  report.suites.push_back(suite_teacher_student(seed, 2000));
  return report;
}

}  // namespace futurefill
