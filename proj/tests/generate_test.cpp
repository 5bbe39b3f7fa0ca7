#include <gtest/gtest.h>

#include "futurefill/errors.hpp"
#include "futurefill/generate.hpp"
#include "futurefill/oracles.hpp"
#include "test_support.hpp"

namespace futurefill {
namespace {

using testing::max_abs;
using testing::max_diff;
using testing::random_signal;

const EngineConfig kNaive{.kind = EngineKind::naive};
const EngineConfig kEpoched{.kind = EngineKind::epoched};
const EngineConfig kContinuous{.kind = EngineKind::continuous};

TEST(TokenMap, ParseAndApply) {
  EXPECT_EQ(parse_token_map("identity")(5.5), 5.5);
  EXPECT_EQ(parse_token_map("clamp")(5.5), 1.0);
  const auto m = parse_token_map("clamp:-2:0.5");
  EXPECT_EQ(m(-3.0), -2.0);
  EXPECT_EQ(m(0.25), 0.25);
  EXPECT_EQ(m(9.0), 0.5);
  EXPECT_THROW(parse_token_map("softmax"), ConfigError);
  EXPECT_THROW(parse_token_map("clamp:1"), ConfigError);
  EXPECT_THROW(parse_token_map("clamp:1:0"), ConfigError);
}

TEST(GenerateScratch, CopyKernelFixesSeed) {
  std::vector<double> taps(16, 0.0);
  taps[0] = 1.0;
  for (const auto& cfg : {kNaive, kEpoched, kContinuous}) {
    const auto r = generate_scratch(Filter(Signal(taps)), 16, cfg, 3.0);
    EXPECT_LT(max_diff(r.outputs, Signal(std::vector<double>(16, 3.0))), 1e-12);
  }
}

TEST(GenerateScratch, ShiftKernelAlternates) {
  std::vector<double> taps(12, 0.0);
  taps[1] = 1.0;
  const auto r = generate_scratch(Filter(Signal(taps)), 12, kContinuous, 1.0);
  for (std::size_t t = 0; t < 12; ++t) EXPECT_NEAR(r.outputs[t], t % 2 == 0 ? 0.0 : 1.0, 1e-12);
}

TEST(GenerateScratch, EnginesAgreeWithOracle) {
  Rng rng(31);
  for (std::size_t L : {1u, 5u, 64u, 333u}) {
    // Scale taps down so identity feedback stays bounded.
    const Filter phi(random_signal(rng, L, -0.5 / L, 0.5 / L + 0.5));
    const auto ref = oracle::oracle_scratch(phi, L, 0.7);
    for (const auto& cfg : {kNaive, kEpoched, kContinuous}) {
      const auto r = generate_scratch(phi, L, cfg, 0.7);
      EXPECT_LE(max_diff(r.outputs, ref), 1e-8 * (1 + max_abs(ref))) << L;
    }
  }
}

TEST(GenerateScratch, Errors) {
  EXPECT_THROW(generate_scratch(Filter(Signal{1}, 4), 5, kNaive, 1.0), ConfigError);
}

TEST(Prefill, Example) {
  const auto c = prefill(Signal{1, 2}, Filter(Signal{1, 10, 100, 1000}), 2);
  EXPECT_LT(max_diff(c.contributions, Signal{12, 120}), 1e-9);
  EXPECT_EQ(c.meter.fast_convolutions, 1u);
}

TEST(Prefill, EmptyPromptAndZeroCount) {
  EXPECT_EQ(prefill(Signal{}, Filter(Signal{1, 2}), 3).contributions, (Signal{0, 0, 0}));
  EXPECT_TRUE(prefill(Signal{1}, Filter(Signal{1, 2}), 0).contributions.empty());
}

TEST(Prefill, MatchesDirectFullConvolutionSlice) {
  Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t len = 1 + rng.below(80);
    const std::size_t count = 1 + rng.below(80);
    const auto p = random_signal(rng, len);
    const auto taps = random_signal(rng, len + count);
    const auto full = oracle::conv_full_direct(p, taps);
    const auto want = full.slice(static_cast<std::ptrdiff_t>(len),
                                 static_cast<std::ptrdiff_t>(len + count - 1));
    const auto got = prefill(p, Filter(taps), count);
    EXPECT_EQ(got.contributions.size(), count);
    EXPECT_LE(max_diff(got.contributions, want), agreement_tolerance(max_abs(want)));
  }
}

TEST(GeneratePrompted, Example) {
  const Signal p{1, 2};
  const Filter phi(Signal{1, 10, 100, 1000});
  for (const auto& cfg : {kNaive, kEpoched, kContinuous}) {
    EXPECT_LT(max_diff(generate_prompted(p, phi, 2, cfg).outputs, Signal{12, 132}), 1e-9);
  }
  EXPECT_LT(max_diff(oracle::oracle_prompted(p, phi, 2), Signal{12, 132}), 1e-12);
}

TEST(GeneratePrompted, LiteralSliceDisagreesWithDefiningEquation) {
  const Signal p{1, 2};
  const Filter phi(Signal{1, 10, 100, 1000});
  const auto literal = generate_prompted(p, phi, 2, kContinuous, {},
                                         PrefillConvention::futurefill_literal);
  EXPECT_LT(max_diff(literal.outputs, Signal{120, 1320}), 1e-9);
  EXPECT_GT(max_diff(literal.outputs, oracle::oracle_prompted(p, phi, 2)), 1.0);
}

TEST(GeneratePrompted, SingleStepIsLastPromptPosition) {
  Rng rng(33);
  const auto p = random_signal(rng, 9);
  const auto taps = random_signal(rng, 10);
  const auto full = oracle::conv_full_direct(p, taps);
  const auto r = generate_prompted(p, Filter(taps), 1, kContinuous);
  EXPECT_NEAR(r.outputs[0], full.at(9), 1e-12);
}

TEST(GeneratePrompted, ZeroPromptMatchesZeroSeedScratch) {
  Rng rng(34);
  const auto taps = random_signal(rng, 40);
  const auto prompted = generate_prompted(Signal::zeros(8), Filter(taps), 32, kContinuous);
  const auto scratch = generate_scratch(Filter(taps), 32, kContinuous, 0.0);
  EXPECT_LT(max_diff(prompted.outputs, scratch.outputs), 1e-15);
}

TEST(GeneratePrompted, ExhaustiveAgainstOracle) {
  Rng rng(35);
  const TokenMap clamp = TokenMap::clamp(-2.0, 2.0);
  for (std::size_t len = 0; len <= 24; ++len) {
    for (std::size_t count = 1; count <= 24; ++count) {
      const auto p = random_signal(rng, len);
      const Filter phi(random_signal(rng, len + count, -0.3, 0.3));
      for (const auto* map : {static_cast<const TokenMap*>(nullptr), &clamp}) {
        const TokenMap m = map ? *map : TokenMap{};
        const auto ref = oracle::oracle_prompted(p, phi, count, m);
        for (const auto& cfg : {kNaive, kEpoched, kContinuous}) {
          const auto r = generate_prompted(p, phi, count, cfg, m);
          ASSERT_LE(max_diff(r.outputs, ref), 1e-8 * (1 + max_abs(ref)))
              << "L=" << len << " K=" << count;
        }
      }
    }
  }
}

TEST(GeneratePrompted, DecodeMemoryIndependentOfPromptLength) {
  Rng rng(36);
  const std::size_t count = 64;
  std::uint64_t first = 0;
  for (std::size_t len : {16u, 256u, 2048u}) {
    const auto p = random_signal(rng, len);
    const Filter phi(random_signal(rng, len + count, -0.01, 0.01));
    for (const auto& cfg : {kEpoched, kContinuous}) {
      const auto r = generate_prompted(p, phi, count, cfg);
      EXPECT_LE(r.decode.peak_aux_elems, 4 * count);
      EXPECT_EQ(r.prefill.fast_convolutions, 1u);
      if (cfg.kind == EngineKind::continuous) {
        if (first == 0) first = r.decode.peak_aux_elems;
        EXPECT_EQ(r.decode.peak_aux_elems, first);
      }
    }
  }
}

TEST(OraclePrompted, ZeroCountEmpty) {
  EXPECT_TRUE(oracle::oracle_prompted(Signal{1, 2}, Filter(Signal{1}), 0).empty());
  EXPECT_TRUE(generate_prompted(Signal{1, 2}, Filter(Signal{1}), 0, kNaive).outputs.empty());
}

}  // namespace
}  // namespace futurefill
