#include "futurefill/engines.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "futurefill/errors.hpp"

namespace futurefill {

EngineKind parse_engine_kind(std::string_view name) {
  if (name == "naive") return EngineKind::naive;
  if (name == "epoched") return EngineKind::epoched;
  if (name == "continuous") return EngineKind::continuous;
  throw ConfigError("unknown engine kind '" + std::string(name) +
                    "' (expected naive, epoched or continuous)");
}

std::string_view to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::naive: return "naive";
    case EngineKind::epoched: return "epoched";
    case EngineKind::continuous: return "continuous";
  }
  return "?";
}

unsigned k_of_t(std::uint64_t t, unsigned b) {
  if (t == 0) throw ContractViolation("k_of_t: t must be >= 1");
  return std::min(b, static_cast<unsigned>(std::countr_zero(t)));
}

std::size_t optimal_epoch_length(std::size_t horizon) {
  if (horizon < 2) throw ContractViolation("optimal_epoch_length: L must be >= 2");
  const double l = static_cast<double>(horizon);
  return static_cast<std::size_t>(std::llround(std::sqrt(l * std::log2(l))));
}

OnlineConvEngine::OnlineConvEngine(const Filter& phi, std::size_t horizon)
    : taps_(phi.prefix(horizon)), horizon_(horizon) {
  if (horizon == 0) throw ConfigError("engine horizon must be positive");
  inputs_.reserve(horizon);
}

double OnlineConvEngine::push(double sample) {
  if (inputs_.size() >= horizon_) {
    throw ContractViolation("push beyond horizon " + std::to_string(horizon_));
  }
  if (!std::isfinite(sample)) throw ContractViolation("push: non-finite sample");
  inputs_.push_back(sample);
  return step();
}

void OnlineConvEngine::reset() {
  inputs_.clear();
  meter_ = CostMeter{};
  clear_state();
}

NaiveEngine::NaiveEngine(const Filter& phi, std::size_t horizon)
    : OnlineConvEngine(phi, horizon) {}

double NaiveEngine::step() {
  const std::size_t t = inputs_.size();
  const double* u = inputs_.data();
  double acc = 0.0;
  for (std::size_t j = 0; j < t; ++j) acc += u[t - 1 - j] * taps_[j];
  meter_.mac_count += t;
  return acc;
}

EpochedEngine::EpochedEngine(const Filter& phi, std::size_t horizon, std::size_t epoch_length)
    : OnlineConvEngine(phi, horizon), kernel_(phi), cache_(epoch_length, 0.0) {
  if (epoch_length < 1 || epoch_length > horizon) {
    throw ConfigError("epoch length " + std::to_string(epoch_length) + " outside [1, " +
                      std::to_string(horizon) + "]");
  }
  meter_.note_aux(cache_.size());
}

double EpochedEngine::step() {
  const std::size_t t = inputs_.size();
  const double* u = inputs_.data();
  double acc = cache_[phase_ - 1];
  for (std::size_t j = 0; j < phase_; ++j) acc += u[t - 1 - j] * taps_[j];
  meter_.mac_count += phase_;

  if (phase_ == cache_.size()) {
    // C_j = [FutureFill(u_{1:t}, phi_{1:t+K})]_j, j = 1..K.
    // Tiny epochs are cheaper to rebuild by direct summation.
    const std::size_t k = cache_.size();
    if (k * t <= transform_work(next_pow2(t + k))) {
      for (std::size_t j = 0; j < k; ++j) {
        double c = 0.0;
        for (std::size_t i = 0; i < t && i + j + 1 < taps_.size(); ++i) c += u[t - 1 - i] * taps_[i + j + 1];
        cache_[j] = c;
      }
      meter_.ff_cost += k * t;
    } else {
      kernel_.compute(inputs_, cache_, /*accumulate=*/false, &meter_);
    }
    meter_.cache_rebuilds += 1;
    phase_ = 1;
  } else {
    ++phase_;
  }
  return acc;
}

void EpochedEngine::clear_state() {
  std::fill(cache_.begin(), cache_.end(), 0.0);
  phase_ = 1;
  meter_.note_aux(cache_.size());
}

ContinuousEngine::ContinuousEngine(const Filter& phi, std::size_t horizon,
                                   ContinuousOptions options)
    : OnlineConvEngine(phi, horizon),
      options_(options),
      max_level_(static_cast<unsigned>(std::bit_width(horizon) - 1)),
      kernel_(phi),
      cache_(horizon, 0.0) {
  if (options_.audit_cache) consumed_.assign(horizon, false);
  meter_.note_aux(cache_.size());
}

double ContinuousEngine::step() {
  const std::size_t t = inputs_.size();
  const double y = cache_[t - 1] + inputs_[t - 1] * taps_[0];
  meter_.mac_count += 1;
  if (options_.audit_cache) consumed_[t - 1] = true;

  // Slots t+1..t+2^k; at t = L the whole range lies past the horizon.
  if (t < horizon()) {
    const unsigned k = k_of_t(t, max_level_);
    const std::size_t block = std::size_t{1} << k;
    const std::size_t count = std::min(block, horizon() - t);
    std::span<const double> past(inputs_.data() + (t - block), block);
    std::span<double> target(cache_.data() + t, count);

    if (options_.audit_cache) {
      for (std::size_t i = t; i < t + count; ++i) {
        if (consumed_[i]) ++lemma_violations_;
      }
    }
    if (block <= options_.direct_block_limit) {
      // FF_j = sum_{i=1}^{block} v_{block-i+1} * phi_{j+i}; j+i < L since
      // count <= L-t and block <= t.
      for (std::size_t j = 0; j < count; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < block; ++i) acc += past[block - 1 - i] * taps_[j + i + 1];
        target[j] += acc;
      }
    } else {
      kernel_.compute(past, target, /*accumulate=*/true, &meter_, /*charge_ff=*/false);
    }
    meter_.ff_cost += static_cast<std::uint64_t>(std::max(1u, k)) * block;
  }
  return y;
}

void ContinuousEngine::clear_state() {
  std::fill(cache_.begin(), cache_.end(), 0.0);
  if (options_.audit_cache) consumed_.assign(horizon(), false);
  lemma_violations_ = 0;
  meter_.note_aux(cache_.size());
}

std::size_t resolve_epoch_length(const EngineConfig& config, std::size_t horizon) {
  if (config.epoch_length) return *config.epoch_length;
  return horizon < 2 ? 1 : optimal_epoch_length(horizon);
}

std::unique_ptr<OnlineConvEngine> make_engine(const EngineConfig& config, const Filter& phi,
                                              std::size_t horizon) {
  switch (config.kind) {
    case EngineKind::naive:
      return std::make_unique<NaiveEngine>(phi, horizon);
    case EngineKind::epoched:
      return std::make_unique<EpochedEngine>(phi, horizon, resolve_epoch_length(config, horizon));
    case EngineKind::continuous:
      return std::make_unique<ContinuousEngine>(phi, horizon, config.continuous);
  }
  throw ConfigError("unknown engine kind");
}

}  // namespace futurefill
