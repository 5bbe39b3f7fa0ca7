#pragma once

#include <cstddef>
#include <string_view>

#include "futurefill/cost_meter.hpp"
#include "futurefill/engines.hpp"
#include "futurefill/signal.hpp"

namespace futurefill {

/// Maps a real prediction to the next input sample.
struct TokenMap {
  enum class Kind { identity, clamp };
  Kind kind = Kind::identity;
  double lo = -1.0;
  double hi = 1.0;

  double operator()(double y) const noexcept {
    if (kind == Kind::clamp) return y < lo ? lo : (y > hi ? hi : y);
    return y;
  }

  static TokenMap identity() { return {}; }
  static TokenMap clamp(double lo, double hi);
};

/// "identity", "clamp" (to [-1, 1]) or "clamp:<lo>:<hi>".
TokenMap parse_token_map(std::string_view text);

struct GenerationResult {
  Signal outputs;
  CostMeter prefill;
  /// Decode counters. peak_aux_elems covers the prefill cache plus the
  /// engine's own cache, both live during decode.
  CostMeter decode;
};

/// u_1 = seed_token; y_t = engine.push(u_t); u_{t+1} = token_map(y_t).
/// Returns y_1..y_L. Requires L <= filter context length.
GenerationResult generate_scratch(const Filter& phi, std::size_t length, const EngineConfig& engine,
                                  double seed_token, const TokenMap& token_map = {});

/// Which slice of p*phi seeds the K-slot prefill cache.
enum class PrefillConvention {
  /// Positions L..L+K-1: the prompt term of
  ///   y_t = sum_{j<t} y_{t-j} phi_j + sum_{j=t}^{t+L-1} p_{t+L-j} phi_j.
  defining_equation,
  /// Positions L+1..L+K, i.e. FutureFill(p, phi) taken literally. Kept for
  /// comparison only: it drops tap phi_t on the last prompt token.
  futurefill_literal,
};

struct PrefillCache {
  /// Exactly K slots; slot s is the prompt's contribution to generated position s.
  Signal contributions;
  CostMeter meter;
};

/// One fast convolution of the prompt against phi_{1:L+K}.
PrefillCache prefill(const Signal& prompt, const Filter& phi, std::size_t count,
                     PrefillConvention convention = PrefillConvention::defining_equation);

/// Prefill, then decode K tokens: y_t = C_t + A_{t-1}, where A is an online
/// engine of horizon K over the fed-back tokens x_t = token_map(y_t).
GenerationResult generate_prompted(const Signal& prompt, const Filter& phi, std::size_t count,
                                   const EngineConfig& engine, const TokenMap& token_map = {},
                                   PrefillConvention convention =
                                       PrefillConvention::defining_equation);

}  // namespace futurefill
