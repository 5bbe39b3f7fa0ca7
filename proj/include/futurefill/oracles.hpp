#pragma once

#include <cstddef>

#include "futurefill/generate.hpp"
#include "futurefill/signal.hpp"

// Deliberately slow direct-summation references. Nothing here touches a
// transform or an engine, so they stay independent of the fast paths.
namespace futurefill::oracle {

/// Double-loop full convolution.
Signal conv_full_direct(const Signal& a, const Signal& b);

/// [FutureFill(v, w)]_s = sum_{i=1}^{t2-s} v_{t1-i+1} w_{s+i}, s = 1..t2-1.
Signal futurefill_direct(const Signal& v, const Signal& w);

/// y_t = sum_{j=1}^{t-1} x_{t-j} phi_j + sum_{j=t}^{t+L-1} p_{t+L-j} phi_j with
/// x_t = token_map(y_t), t = 1..K. O(K (K + L)).
Signal oracle_prompted(const Signal& prompt, const Filter& phi, std::size_t count,
                       const TokenMap& token_map = {});

/// Scratch generation with feedback, evaluated by direct summation.
Signal oracle_scratch(const Filter& phi, std::size_t length, double seed_token,
                      const TokenMap& token_map = {});

/// int_0^1 (a-1)^2 a^{i+j-2} da by adaptive Gauss-Kronrod quadrature.
double hankel_entry_quadrature(std::size_t i, std::size_t j);

}  // namespace futurefill::oracle
