#pragma once

// Brute-force oracles shared by the unit tests and the acceptance suite. They
// evaluate definitions directly and deliberately avoid the library's
// transforms and counting shortcuts.

#include <cmath>
#include <numbers>
#include <vector>

#include "dhnet/frame_io.hpp"

namespace dhnet::oracle {

// [channel u*delta+v][block row-major] of the orthonormal 2-D DCT-II.
inline std::vector<std::vector<double>> block_dct(const YPlane& p, int delta) {
  const int gw = p.width() / delta, gh = p.height() / delta;
  std::vector<std::vector<double>> out(static_cast<std::size_t>(delta) * delta,
                                       std::vector<double>(static_cast<std::size_t>(gw) * gh));
  std::vector<double> basis(static_cast<std::size_t>(delta) * delta);
  for (int u = 0; u < delta; ++u)
    for (int x = 0; x < delta; ++x)
      basis[u * delta + x] = (u == 0 ? std::sqrt(1.0 / delta) : std::sqrt(2.0 / delta)) *
                             std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * delta));
  for (int by = 0; by < gh; ++by)
    for (int bx = 0; bx < gw; ++bx)
      for (int u = 0; u < delta; ++u)
        for (int v = 0; v < delta; ++v) {
          long double s = 0.0L;
          for (int y = 0; y < delta; ++y)
            for (int x = 0; x < delta; ++x)
              s += static_cast<long double>(p(by * delta + y, bx * delta + x)) * basis[u * delta + y] *
                   basis[v * delta + x];
          out[u * delta + v][by * gw + bx] = static_cast<double>(s);
        }
  return out;
}

// Fraction of entries strictly greater than b (with the toolkit's tolerance).
inline double exceed_fraction(const std::vector<double>& values, int b, double tol) {
  std::size_t n = 0;
  for (double v : values) n += v > b + tol;
  return static_cast<double>(n) / static_cast<double>(values.size());
}

// F(b, c) = B(b+1, c) - B(b, c), rows b = -alpha..alpha-1, cols = channels.
inline std::vector<double> hist_feature(const YPlane& p, int delta, int alpha, double tol) {
  const auto stack = block_dct(p, delta);
  const int cols = delta * delta;
  std::vector<double> f(static_cast<std::size_t>(2 * alpha) * cols);
  for (int c = 0; c < cols; ++c)
    for (int b = -alpha; b < alpha; ++b)
      f[static_cast<std::size_t>(b + alpha) * cols + c] =
          exceed_fraction(stack[c], b + 1, tol) - exceed_fraction(stack[c], b, tol);
  return f;
}

}  // namespace dhnet::oracle
