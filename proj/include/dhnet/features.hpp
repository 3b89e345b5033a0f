#pragma once

#include <array>
#include <span>
#include <vector>

#include "dhnet/frame_io.hpp"
#include "dhnet/intra_quant.hpp"

namespace dhnet {

inline constexpr int kDefaultAlpha = 60;
inline constexpr std::array<int, 3> kFeatureDeltas = {4, 8, 16};

// A coefficient counts as "greater than b" only if it exceeds b by more than
// this, so exactly representable integer coefficients are not split by
// floating-point noise in the transform.
inline constexpr double kThresholdTolerance = 1e-9;

// Block-DCT coefficients regrouped by frequency: channel c = u * delta + v
// holds coefficient (u, v) of every delta x delta block.
struct DctChannelStack {
  int delta = 0;
  int grid_width = 0;   // blocks per row
  int grid_height = 0;  // blocks per column
  std::vector<double> data;  // channel-major, then block row, then block column

  int channels() const { return delta * delta; }
  std::size_t blocks() const { return static_cast<std::size_t>(grid_width) * grid_height; }
  std::span<const double> channel(int c) const { return std::span(data).subspan(c * blocks(), blocks()); }
  std::span<double> channel(int c) { return std::span(data).subspan(c * blocks(), blocks()); }
};

// Entry (b, c) is the fraction of blocks whose frequency-c coefficient is
// greater than b, for b in [-alpha, alpha].
struct CumulativeHist {
  int delta = 0;
  int alpha = 0;
  std::vector<double> bins;  // (2 alpha + 1) rows x delta^2 columns

  int rows() const { return 2 * alpha + 1; }
  int cols() const { return delta * delta; }
  double at(int b, int c) const { return bins[static_cast<std::size_t>(b + alpha) * cols() + c]; }
};

// Adjacent differences of the cumulative histogram: entry (b, c) =
// B(b+1, c) - B(b, c) for b in [-alpha, alpha - 1]. Entries are <= 0.
struct HistFeature {
  int delta = 0;
  int alpha = 0;
  std::vector<double> values;  // 2 alpha rows x delta^2 columns

  int rows() const { return 2 * alpha; }
  int cols() const { return delta * delta; }
  double at(int b, int c) const { return values[static_cast<std::size_t>(b + alpha) * cols() + c]; }
};

struct AuxFeature {
  std::array<double, 64> values{};
};

struct FeatureSet {
  std::array<HistFeature, 3> hists;  // delta 4, 8, 16
  AuxFeature aux;
};

// Throws InvalidArgument if delta is not one of `allowed`.
DctChannelStack block_dct_stack(const YPlane& plane, int delta,
                                std::span<const int> allowed = kFeatureDeltas);
CumulativeHist cumulative_hist(const DctChannelStack& stack, int alpha);
HistFeature hist_feature(const CumulativeHist& cum);

// Row-major vectorization of q_m scaled by q_s.
AuxFeature aux_feature(const Matrix8& q_m, int q_s);

FeatureSet extract_all(const YPlane& plane, const Matrix8& q_m, int q_s, int alpha = kDefaultAlpha);

}  // namespace dhnet
