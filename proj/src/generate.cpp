#include "futurefill/generate.hpp"

#include <charconv>
#include <string>
#include <vector>

#include "futurefill/conv.hpp"
#include "futurefill/errors.hpp"

namespace futurefill {

TokenMap TokenMap::clamp(double lo, double hi) {
  if (!(lo <= hi)) throw ConfigError("clamp token map needs lo <= hi");
  TokenMap m;
  m.kind = Kind::clamp;
  m.lo = lo;
  m.hi = hi;
  return m;
}

namespace {

double parse_bound(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("bad clamp bound '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

TokenMap parse_token_map(std::string_view text) {
  if (text == "identity") return TokenMap::identity();
  if (text == "clamp") return TokenMap::clamp(-1.0, 1.0);
  if (text.starts_with("clamp:")) {
    const auto rest = text.substr(6);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw ConfigError("expected clamp:<lo>:<hi>");
    return TokenMap::clamp(parse_bound(rest.substr(0, colon)), parse_bound(rest.substr(colon + 1)));
  }
  throw ConfigError("unknown token map '" + std::string(text) + "'");
}

GenerationResult generate_scratch(const Filter& phi, std::size_t length, const EngineConfig& engine,
                                  double seed_token, const TokenMap& token_map) {
  if (length > phi.context_length()) {
    throw ConfigError("generation length " + std::to_string(length) +
                      " exceeds filter context length " + std::to_string(phi.context_length()));
  }
  GenerationResult result;
  if (length == 0) return result;

  auto eng = make_engine(engine, phi, length);
  std::vector<double> out;
  out.reserve(length);
  double u = seed_token;
  for (std::size_t t = 0; t < length; ++t) {
    const double y = eng->push(u);
    out.push_back(y);
    u = token_map(y);
  }
  result.outputs = Signal(std::move(out));
  result.decode = eng->meter();
  return result;
}

PrefillCache prefill(const Signal& prompt, const Filter& phi, std::size_t count,
                     PrefillConvention convention) {
  PrefillCache cache;
  if (count == 0) return cache;
  cache.meter.note_aux(count);
  if (prompt.empty()) {
    cache.contributions = Signal::zeros(count);
    return cache;
  }
  const std::size_t len = prompt.size();
  const Signal taps(phi.prefix(len + count));
  const Signal full = conv_full(prompt, taps, &cache.meter);
  const auto first = static_cast<std::ptrdiff_t>(
      convention == PrefillConvention::defining_equation ? len : len + 1);
  cache.contributions = full.slice(first, first + static_cast<std::ptrdiff_t>(count) - 1);
  return cache;
}

GenerationResult generate_prompted(const Signal& prompt, const Filter& phi, std::size_t count,
                                   const EngineConfig& engine, const TokenMap& token_map,
                                   PrefillConvention convention) {
  GenerationResult result;
  if (count == 0) return result;

  PrefillCache cache = prefill(prompt, phi, count, convention);
  result.prefill = cache.meter;

  // The decode engine only ever needs taps phi_1..phi_K.
  auto eng = make_engine(engine, phi, count);
  std::vector<double> out;
  out.reserve(count);
  double carried = 0.0;
  for (std::size_t t = 1; t <= count; ++t) {
    const double y = cache.contributions.at(static_cast<std::ptrdiff_t>(t)) + carried;
    out.push_back(y);
    carried = eng->push(token_map(y));
  }
  result.outputs = Signal(std::move(out));
  result.decode = eng->meter();
  result.decode.peak_aux_elems = count + eng->meter().peak_aux_elems;
  return result;
}

}  // namespace futurefill
