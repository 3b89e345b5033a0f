#pragma once

#include <vector>

namespace dhnet {

// Orthonormal DCT-II basis of size n: basis(u, x) = a(u) cos(pi (2x+1) u / 2n),
// a(0) = sqrt(1/n), a(u>0) = sqrt(2/n).
class DctBasis {
 public:
  explicit DctBasis(int n);

  int size() const { return n_; }
  double operator()(int u, int x) const { return m_[static_cast<std::size_t>(u) * n_ + x]; }

  // Separable 2D forward transform of an n x n block read with the given row
  // stride; output is n x n row-major, entry (u, v) = vertical freq u,
  // horizontal freq v.
  void forward(const double* block, int stride, double* out) const;
  // Inverse of forward(); input and output both n x n row-major.
  void inverse(const double* coeffs, double* out) const;

 private:
  int n_;
  std::vector<double> m_;
};

// Shared basis instances for the common sizes.
const DctBasis& dct_basis(int n);

}  // namespace dhnet
