#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "futurefill/conv.hpp"
#include "futurefill/cost_meter.hpp"
#include "futurefill/signal.hpp"

namespace futurefill {

enum class EngineKind { naive, epoched, continuous };

/// Accepts "naive", "epoched", "continuous"; anything else is a ConfigError.
EngineKind parse_engine_kind(std::string_view name);
std::string_view to_string(EngineKind kind);

/// min(b, trailing zero bits of t). t must be >= 1.
unsigned k_of_t(std::uint64_t t, unsigned b);

/// round(sqrt(L * log2 L)), for L >= 2.
std::size_t optimal_epoch_length(std::size_t horizon);

/// Online causal convolution against a fixed filter: the t-th push returns
/// [u*phi]_t. At most horizon() pushes are allowed between resets.
class OnlineConvEngine {
 public:
  virtual ~OnlineConvEngine() = default;
  OnlineConvEngine(const OnlineConvEngine&) = delete;
  OnlineConvEngine& operator=(const OnlineConvEngine&) = delete;

  double push(double sample);
  void reset();

  const CostMeter& meter() const noexcept { return meter_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return inputs_.size(); }
  virtual EngineKind kind() const noexcept = 0;

 protected:
  OnlineConvEngine(const Filter& phi, std::size_t horizon);

  // inputs_ already holds u_1..u_t when called.
  virtual double step() = 0;
  virtual void clear_state() = 0;

  std::vector<double> taps_;
  std::vector<double> inputs_;
  CostMeter meter_;

 private:
  std::size_t horizon_;
};

/// Direct inner product at every step; Theta(L^2) total work.
class NaiveEngine final : public OnlineConvEngine {
 public:
  NaiveEngine(const Filter& phi, std::size_t horizon);
  EngineKind kind() const noexcept override { return EngineKind::naive; }

 private:
  double step() override;
  void clear_state() override {}
};

/// Short direct sums inside an epoch of K steps plus a K-slot FutureFill
/// cache rebuilt from the whole input prefix at the end of every epoch.
class EpochedEngine final : public OnlineConvEngine {
 public:
  EpochedEngine(const Filter& phi, std::size_t horizon, std::size_t epoch_length);
  EngineKind kind() const noexcept override { return EngineKind::epoched; }

  std::size_t epoch_length() const noexcept { return cache_.size(); }
  std::size_t phase() const noexcept { return phase_; }
  std::span<const double> cache() const noexcept { return cache_; }

 private:
  double step() override;
  void clear_state() override;

  FutureFillKernel kernel_;
  std::vector<double> cache_;
  std::size_t phase_ = 1;
};

struct ContinuousOptions {
  /// Blocks of at most this many inputs are future-filled by direct
  /// summation instead of a transform. 0 forces transforms everywhere.
  std::size_t direct_block_limit = 16;
  /// Record which cache slots have been consumed and count any later write.
  bool audit_cache = false;
};

/// Divide-and-conquer schedule: after step t the last 2^k(t) inputs are
/// future-filled into the next 2^k(t) cache slots. O(L log^2 L) total.
class ContinuousEngine final : public OnlineConvEngine {
 public:
  ContinuousEngine(const Filter& phi, std::size_t horizon, ContinuousOptions options = {});
  EngineKind kind() const noexcept override { return EngineKind::continuous; }

  unsigned max_level() const noexcept { return max_level_; }
  std::span<const double> cache() const noexcept { return cache_; }
  /// Writes that landed on a slot at or before the current step.
  std::uint64_t lemma_violations() const noexcept { return lemma_violations_; }

 private:
  double step() override;
  void clear_state() override;

  ContinuousOptions options_;
  unsigned max_level_;
  FutureFillKernel kernel_;
  std::vector<double> cache_;
  std::vector<bool> consumed_;
  std::uint64_t lemma_violations_ = 0;
};

struct EngineConfig {
  EngineKind kind = EngineKind::continuous;
  /// Epoched only; nullopt selects optimal_epoch_length(horizon).
  std::optional<std::size_t> epoch_length;
  ContinuousOptions continuous;
};

/// Epoch length the factory would use for this horizon.
std::size_t resolve_epoch_length(const EngineConfig& config, std::size_t horizon);

std::unique_ptr<OnlineConvEngine> make_engine(const EngineConfig& config, const Filter& phi,
                                              std::size_t horizon);

}  // namespace futurefill
