#pragma once

#include <array>
#include <cstdint>

#include "dhnet/frame_io.hpp"

namespace dhnet {

// 8x8 integer table, row-major.
using Matrix8 = std::array<int, 64>;
// 8x8 block of integer transform coefficients, row-major.
using IntBlock8 = std::array<std::int32_t, 64>;
// 8x8 block of real values (spatial samples or DCT coefficients), row-major.
using Block8 = std::array<double, 64>;

// All-ones table.
const Matrix8& q1_matrix();
// MPEG-4 default intra table.
const Matrix8& q2_matrix();
const Matrix8& matrix_for(QmId id);

inline constexpr int kDefaultScaleBits = 17;
inline constexpr std::int32_t kMaxCoefficient = 1 << 15;

struct QuantConfig {
  int q_s = 1;
  Matrix8 q_m = {};
  int scale_bits = kDefaultScaleBits;
  std::int64_t rounding = std::int64_t{1} << (kDefaultScaleBits - 4);

  // Builds a config with rounding = 2^(scale_bits - 4) and validates it.
  static QuantConfig make(int q_s, const Matrix8& q_m, int scale_bits = kDefaultScaleBits);

  // Throws InvalidArgument unless 1 <= q_s <= 31, every q_m entry >= 1 and
  // scale_bits >= 4.
  void validate() const;
};

// S(i,j) = round(2^scale_bits / (q_m(i,j) * q_s)).
std::array<std::int64_t, 64> scale_matrix(const Matrix8& q_m, int q_s, int scale_bits);

// C_q = sign(C) * ((|C| * S + r) >> (scale_bits - 3)).
IntBlock8 quantize(const IntBlock8& coeffs, const QuantConfig& cfg);
// C_d = sign(C_q) * ((|C_q| * q_m * q_s) >> 3).
IntBlock8 dequantize(const IntBlock8& levels, const QuantConfig& cfg);

// Intra coding of one 8x8 spatial block: level shift, forward DCT rounded to
// integers, quantize, dequantize, inverse DCT, unshift, round, clamp.
Block8 code_block(const Block8& samples, const QuantConfig& cfg);

// Decoded single-compressed plane. Dimensions not divisible by 8 are cropped
// at the bottom/right.
YPlane compress_plane(const YPlane& plane, const QuantConfig& cfg);
YPlane double_compress(const YPlane& plane, const QuantConfig& first, const QuantConfig& second);

// Zero-motion predictive coding of one frame against a decoded reference:
// the residual is transformed and quantized with `cfg` and added back.
YPlane code_predicted(const YPlane& current, const YPlane& reference, const QuantConfig& cfg);

}  // namespace dhnet
