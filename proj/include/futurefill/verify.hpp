#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace futurefill {

/// Deliberate defects for mutation smoke tests of the verify command.
enum class Fault { none, futurefill_off_by_one };

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::uint64_t instances = 0;
  /// Largest error seen, normalized by the suite's own tolerance scale.
  double max_error = 0.0;
  double tolerance = 0.0;
  std::uint64_t wall_ns = 0;
  /// First failing instance, replayable; null when the suite passed.
  nlohmann::ordered_json failure;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  /// Largest length covered exhaustively by the equivalence suites.
  std::size_t max_length = 256;
  Fault fault = Fault::none;
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::size_t max_length = 0;
  std::vector<SuiteResult> suites;

  bool passed() const;
  nlohmann::ordered_json to_json(bool include_wall = true) const;
  std::string to_text() const;
};

VerifyReport run_verify(const VerifyOptions& options);

// Individual suites. Parameters beyond the seed size the work.

struct EquivalenceParams {
  std::size_t exhaustive_max = 256;
  std::vector<std::size_t> random_lengths{1024, 4096};
  std::size_t random_cases = 2;
};
SuiteResult suite_oracle_equivalence(std::uint64_t seed, const EquivalenceParams& params);

SuiteResult suite_futurefill(std::uint64_t seed, std::size_t instances, std::size_t max_length,
                             Fault fault = Fault::none);

SuiteResult suite_split_identity(std::uint64_t seed, std::size_t exhaustive_max,
                                 std::size_t random_length, std::size_t random_splits);

/// Continuous engine with cache auditing; any write to a consumed slot fails.
SuiteResult suite_cache_lemma(std::uint64_t seed, std::size_t max_length);

/// ff_cost closed form and bound, epoched rebuild count and memory, naive MACs.
SuiteResult suite_cost_bounds(unsigned max_log2);

SuiteResult suite_prompted(std::uint64_t seed, std::size_t max_prompt, std::size_t max_count);

SuiteResult suite_hankel(std::size_t max_index_sum);

SuiteResult suite_filter_bank(std::size_t length, std::size_t count);

SuiteResult suite_gradient(std::uint64_t seed, std::size_t instances);

/// Online gradient descent of a zero-initialized STU toward a random teacher.
struct TeacherStudentTrace {
  std::vector<double> losses;
  double first_decile_mean = 0.0;
  double last_decile_mean = 0.0;
};
TeacherStudentTrace teacher_student(std::uint64_t seed, std::size_t steps, double eta = 0.01);
SuiteResult suite_teacher_student(std::uint64_t seed, std::size_t steps);

}  // namespace futurefill
