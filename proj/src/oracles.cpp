#include "futurefill/oracles.hpp"

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace futurefill::oracle {

Signal conv_full_direct(const Signal& a, const Signal& b) {
  if (a.empty() || b.empty()) return Signal();
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return Signal(std::move(out));
}

Signal futurefill_direct(const Signal& v, const Signal& w) {
  const auto t1 = static_cast<std::ptrdiff_t>(v.size());
  const auto t2 = static_cast<std::ptrdiff_t>(w.size());
  if (t2 <= 1) return Signal();
  std::vector<double> out(static_cast<std::size_t>(t2 - 1), 0.0);
  for (std::ptrdiff_t s = 1; s <= t2 - 1; ++s) {
    double acc = 0.0;
    for (std::ptrdiff_t i = 1; i <= t2 - s; ++i) acc += v.at(t1 - i + 1) * w.at(s + i);
    out[static_cast<std::size_t>(s - 1)] = acc;
  }
  return Signal(std::move(out));
}

Signal oracle_prompted(const Signal& prompt, const Filter& phi, std::size_t count,
                       const TokenMap& token_map) {
  const auto len = static_cast<std::ptrdiff_t>(prompt.size());
  std::vector<double> fed;
  std::vector<double> out;
  for (std::ptrdiff_t t = 1; t <= static_cast<std::ptrdiff_t>(count); ++t) {
    double y = 0.0;
    for (std::ptrdiff_t j = 1; j <= t - 1; ++j) y += fed[static_cast<std::size_t>(t - j - 1)] * phi.tap(j);
    for (std::ptrdiff_t j = t; j <= t + len - 1; ++j) y += prompt.at(t + len - j) * phi.tap(j);
    out.push_back(y);
    fed.push_back(token_map(y));
  }
  return Signal(std::move(out));
}

Signal oracle_scratch(const Filter& phi, std::size_t length, double seed_token,
                      const TokenMap& token_map) {
  std::vector<double> u;
  std::vector<double> out;
  u.push_back(seed_token);
  for (std::size_t t = 1; t <= length; ++t) {
    double y = 0.0;
    for (std::size_t i = 1; i <= t; ++i) y += u[i - 1] * phi.tap(static_cast<std::ptrdiff_t>(t + 1 - i));
    out.push_back(y);
    u.push_back(token_map(y));
  }
  return Signal(std::move(out));
}

double hankel_entry_quadrature(std::size_t i, std::size_t j) {
  const int power = static_cast<int>(i + j) - 2;
  const auto integrand = [power](double a) { return (a - 1.0) * (a - 1.0) * std::pow(a, power); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 4,
                                                                        1e-14);
}

}  // namespace futurefill::oracle
