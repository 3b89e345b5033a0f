#include "dhnet/features.hpp"

#include <algorithm>
#include <cmath>

#include "dhnet/dct.hpp"
#include "dhnet/error.hpp"

namespace dhnet {

DctChannelStack block_dct_stack(const YPlane& plane, int delta, std::span<const int> allowed) {
  if (std::find(allowed.begin(), allowed.end(), delta) == allowed.end())
    throw InvalidArgument("block_dct_stack: unsupported block size " + std::to_string(delta));
  if (plane.width() < delta || plane.height() < delta)
    throw InvalidArgument("block_dct_stack: plane smaller than one block");
  const DctBasis local(delta);
  const DctBasis& dct = (delta == 4 || delta == 8 || delta == 16) ? dct_basis(delta) : local;

  DctChannelStack stack;
  stack.delta = delta;
  stack.grid_width = plane.width() / delta;
  stack.grid_height = plane.height() / delta;
  stack.data.assign(static_cast<std::size_t>(delta) * delta * stack.blocks(), 0.0);

  const double* src = plane.samples().data();
  const int stride = plane.width();
  const std::size_t nb = stack.blocks();
  const int gw = stack.grid_width;
#pragma omp parallel for schedule(static)
  for (int by = 0; by < stack.grid_height; ++by) {
    std::vector<double> coeffs(static_cast<std::size_t>(delta) * delta);
    for (int bx = 0; bx < gw; ++bx) {
      dct.forward(src + static_cast<std::size_t>(by) * delta * stride + bx * delta, stride, coeffs.data());
      const std::size_t block = static_cast<std::size_t>(by) * gw + bx;
      for (int c = 0; c < delta * delta; ++c) stack.data[c * nb + block] = coeffs[c];
    }
  }
  return stack;
}

CumulativeHist cumulative_hist(const DctChannelStack& stack, int alpha) {
  if (alpha < 1) throw InvalidArgument("cumulative_hist: alpha must be >= 1");
  CumulativeHist cum;
  cum.delta = stack.delta;
  cum.alpha = alpha;
  const int rows = cum.rows(), cols = cum.cols();
  cum.bins.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  const std::size_t nb = stack.blocks();
  if (nb == 0) return cum;
  const double inv = 1.0 / static_cast<double>(nb);

#pragma omp parallel for schedule(static)
  for (int c = 0; c < cols; ++c) {
    // counts[k]: coefficients whose largest exceeded boundary is k - alpha.
    std::vector<long> counts(static_cast<std::size_t>(rows), 0);
    for (double v : stack.channel(c)) {
      const double t = std::ceil(std::clamp(v - kThresholdTolerance, -alpha - 2.0, alpha + 2.0)) - 1.0;
      if (t < -alpha) continue;
      const int k = static_cast<int>(std::min(t, static_cast<double>(alpha))) + alpha;
      ++counts[static_cast<std::size_t>(k)];
    }
    long suffix = 0;
    for (int k = rows - 1; k >= 0; --k) {
      suffix += counts[static_cast<std::size_t>(k)];
      cum.bins[static_cast<std::size_t>(k) * cols + c] = static_cast<double>(suffix) * inv;
    }
  }
  return cum;
}

HistFeature hist_feature(const CumulativeHist& cum) {
  HistFeature f;
  f.delta = cum.delta;
  f.alpha = cum.alpha;
  const int cols = cum.cols();
  f.values.resize(static_cast<std::size_t>(f.rows()) * cols);
  for (int k = 0; k < f.rows(); ++k)
    for (int c = 0; c < cols; ++c)
      f.values[static_cast<std::size_t>(k) * cols + c] =
          cum.bins[static_cast<std::size_t>(k + 1) * cols + c] - cum.bins[static_cast<std::size_t>(k) * cols + c];
  return f;
}

AuxFeature aux_feature(const Matrix8& q_m, int q_s) {
  if (q_s < 1 || q_s > 31) throw InvalidArgument("aux_feature: q_s must be in 1..31");
  AuxFeature a;
  for (int k = 0; k < 64; ++k) {
    if (q_m[k] < 1) throw InvalidArgument("aux_feature: matrix entries must be >= 1");
    a.values[k] = static_cast<double>(q_m[k]) * q_s;
  }
  return a;
}

FeatureSet extract_all(const YPlane& plane, const Matrix8& q_m, int q_s, int alpha) {
  if (plane.width() < 16 || plane.height() < 16)
    throw InvalidArgument("extract_all: plane must be at least 16x16");
  FeatureSet fs;
  for (std::size_t i = 0; i < kFeatureDeltas.size(); ++i)
    fs.hists[i] = hist_feature(cumulative_hist(block_dct_stack(plane, kFeatureDeltas[i]), alpha));
  fs.aux = aux_feature(q_m, q_s);
  return fs;
}

}  // namespace dhnet
