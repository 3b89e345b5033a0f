#include "dhnet/dct.hpp"

#include <cmath>
#include <numbers>

#include "dhnet/error.hpp"

namespace dhnet {

DctBasis::DctBasis(int n) : n_(n), m_(static_cast<std::size_t>(n) * n) {
  if (n < 1) throw InvalidArgument("DctBasis: size must be >= 1");
  for (int u = 0; u < n; ++u) {
    const double a = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int x = 0; x < n; ++x)
      m_[static_cast<std::size_t>(u) * n + x] =
          a * std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * n));
  }
}

void DctBasis::forward(const double* block, int stride, double* out) const {
  double tmp[16 * 16];
  std::vector<double> heap;
  double* t = tmp;
  if (n_ > 16) {
    heap.resize(static_cast<std::size_t>(n_) * n_);
    t = heap.data();
  }
  // t = D * X
  for (int u = 0; u < n_; ++u) {
    const double* d = &m_[static_cast<std::size_t>(u) * n_];
    for (int y = 0; y < n_; ++y) {
      double s = 0.0;
      for (int x = 0; x < n_; ++x) s += d[x] * block[static_cast<std::size_t>(x) * stride + y];
      t[u * n_ + y] = s;
    }
  }
  // out = t * D^T
  for (int u = 0; u < n_; ++u) {
    for (int v = 0; v < n_; ++v) {
      const double* d = &m_[static_cast<std::size_t>(v) * n_];
      double s = 0.0;
      for (int y = 0; y < n_; ++y) s += t[u * n_ + y] * d[y];
      out[u * n_ + v] = s;
    }
  }
}

void DctBasis::inverse(const double* coeffs, double* out) const {
  double tmp[16 * 16];
  std::vector<double> heap;
  double* t = tmp;
  if (n_ > 16) {
    heap.resize(static_cast<std::size_t>(n_) * n_);
    t = heap.data();
  }
  // t = D^T * C
  for (int x = 0; x < n_; ++x) {
    for (int v = 0; v < n_; ++v) {
      double s = 0.0;
      for (int u = 0; u < n_; ++u) s += m_[static_cast<std::size_t>(u) * n_ + x] * coeffs[u * n_ + v];
      t[x * n_ + v] = s;
    }
  }
  // out = t * D
  for (int x = 0; x < n_; ++x) {
    for (int y = 0; y < n_; ++y) {
      double s = 0.0;
      for (int v = 0; v < n_; ++v) s += t[x * n_ + v] * m_[static_cast<std::size_t>(v) * n_ + y];
      out[x * n_ + y] = s;
    }
  }
}

const DctBasis& dct_basis(int n) {
  static const DctBasis b4(4), b8(8), b16(16);
  switch (n) {
    case 4: return b4;
    case 8: return b8;
    case 16: return b16;
    default: throw InvalidArgument("dct_basis: no shared basis for size " + std::to_string(n));
  }
}

}  // namespace dhnet
