#include "dhnet/intra_quant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "dhnet/dct.hpp"
#include "dhnet/error.hpp"

namespace dhnet {

namespace {

Matrix8 make_ones() {
  Matrix8 m;
  m.fill(1);
  return m;
}

constexpr Matrix8 kDefaultIntra = {
    8,  16, 19, 22, 26, 27, 29, 34,  //
    16, 16, 22, 24, 27, 29, 34, 37,  //
    19, 22, 26, 27, 29, 34, 34, 38,  //
    22, 22, 26, 27, 29, 34, 37, 40,  //
    22, 26, 27, 29, 32, 35, 40, 48,  //
    26, 27, 29, 32, 35, 40, 48, 58,  //
    26, 27, 29, 34, 38, 46, 56, 69,  //
    27, 29, 35, 38, 46, 56, 69, 83,
};

std::int32_t round_to_int(double v) { return static_cast<std::int32_t>(std::lround(v)); }

}  // namespace

const Matrix8& q1_matrix() {
  static const Matrix8 ones = make_ones();
  return ones;
}

const Matrix8& q2_matrix() { return kDefaultIntra; }

const Matrix8& matrix_for(QmId id) {
  switch (id) {
    case QmId::kQ1: return q1_matrix();
    case QmId::kQ2: return q2_matrix();
    case QmId::kCustom: break;
  }
  throw InvalidArgument("matrix_for: custom tables have no built-in definition");
}

QuantConfig QuantConfig::make(int q_s, const Matrix8& q_m, int scale_bits) {
  QuantConfig cfg;
  cfg.q_s = q_s;
  cfg.q_m = q_m;
  cfg.scale_bits = scale_bits;
  if (scale_bits < 4 || scale_bits > 40) throw InvalidArgument("QuantConfig: scale_bits out of range");
  cfg.rounding = std::int64_t{1} << (scale_bits - 4);
  cfg.validate();
  return cfg;
}

void QuantConfig::validate() const {
  if (q_s < 1 || q_s > 31) throw InvalidArgument("QuantConfig: q_s must be in 1..31");
  if (scale_bits < 4 || scale_bits > 40) throw InvalidArgument("QuantConfig: scale_bits must be >= 4");
  for (int v : q_m)
    if (v < 1) throw InvalidArgument("QuantConfig: quantization matrix entries must be >= 1");
}

std::array<std::int64_t, 64> scale_matrix(const Matrix8& q_m, int q_s, int scale_bits) {
  if (scale_bits < 4 || scale_bits > 40) throw InvalidArgument("scale_matrix: scale_bits out of range");
  const std::int64_t num = std::int64_t{1} << scale_bits;
  std::array<std::int64_t, 64> s{};
  for (int k = 0; k < 64; ++k) {
    const std::int64_t den = static_cast<std::int64_t>(q_m[k]) * q_s;
    if (den <= 0) throw InvalidArgument("scale_matrix: q_m(i,j) * q_s must be positive");
    s[k] = (2 * num + den) / (2 * den);  // round half up
  }
  return s;
}

IntBlock8 quantize(const IntBlock8& coeffs, const QuantConfig& cfg) {
  const auto s = scale_matrix(cfg.q_m, cfg.q_s, cfg.scale_bits);
  const int shift = cfg.scale_bits - 3;
  IntBlock8 out{};
  for (int k = 0; k < 64; ++k) {
    const std::int64_t c = coeffs[k];
    const std::int64_t mag = std::llabs(c);
    if (mag > kMaxCoefficient) throw InvalidArgument("quantize: coefficient magnitude exceeds 2^15");
    const std::int64_t q = (mag * s[k] + cfg.rounding) >> shift;
    out[k] = static_cast<std::int32_t>(c < 0 ? -q : q);
  }
  return out;
}

IntBlock8 dequantize(const IntBlock8& levels, const QuantConfig& cfg) {
  IntBlock8 out{};
  for (int k = 0; k < 64; ++k) {
    const std::int64_t c = levels[k];
    const std::int64_t d = (std::llabs(c) * cfg.q_m[k] * cfg.q_s) >> 3;
    out[k] = static_cast<std::int32_t>(c < 0 ? -d : d);
  }
  return out;
}

Block8 code_block(const Block8& samples, const QuantConfig& cfg) {
  const DctBasis& dct = dct_basis(8);
  Block8 shifted, coeffs, recon;
  for (int k = 0; k < 64; ++k) shifted[k] = samples[k] - 128.0;
  dct.forward(shifted.data(), 8, coeffs.data());
  IntBlock8 ic;
  for (int k = 0; k < 64; ++k) ic[k] = round_to_int(coeffs[k]);
  const IntBlock8 dq = dequantize(quantize(ic, cfg), cfg);
  for (int k = 0; k < 64; ++k) coeffs[k] = dq[k];
  dct.inverse(coeffs.data(), recon.data());
  for (int k = 0; k < 64; ++k) recon[k] = std::clamp(std::round(recon[k] + 128.0), 0.0, 255.0);
  return recon;
}

YPlane compress_plane(const YPlane& plane, const QuantConfig& cfg) {
  cfg.validate();
  const int bw = plane.width() / 8, bh = plane.height() / 8;
  if (bw == 0 || bh == 0) throw InvalidArgument("compress_plane: plane smaller than one 8x8 block");
  const int w = bw * 8;
  YPlane out(w, bh * 8);
  const std::span<const double> src = plane.samples();
  const std::span<double> dst = out.samples();
  const int src_w = plane.width();
#pragma omp parallel for schedule(static)
  for (int by = 0; by < bh; ++by) {
    Block8 block;
    for (int bx = 0; bx < bw; ++bx) {
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
          block[r * 8 + c] = src[static_cast<std::size_t>(by * 8 + r) * src_w + bx * 8 + c];
      const Block8 coded = code_block(block, cfg);
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
          dst[static_cast<std::size_t>(by * 8 + r) * w + bx * 8 + c] = coded[r * 8 + c];
    }
  }
  return out;
}

YPlane double_compress(const YPlane& plane, const QuantConfig& first, const QuantConfig& second) {
  return compress_plane(compress_plane(plane, first), second);
}

YPlane code_predicted(const YPlane& current, const YPlane& reference, const QuantConfig& cfg) {
  cfg.validate();
  const int bw = current.width() / 8, bh = current.height() / 8;
  if (bw == 0 || bh == 0) throw InvalidArgument("code_predicted: plane smaller than one 8x8 block");
  const int w = bw * 8;
  if (reference.width() != w || reference.height() != bh * 8)
    throw InvalidArgument("code_predicted: reference dimensions do not match");
  YPlane out(w, bh * 8);
  const DctBasis& dct = dct_basis(8);
  const int src_w = current.width();
#pragma omp parallel for schedule(static)
  for (int by = 0; by < bh; ++by) {
    Block8 residual, coeffs, recon;
    IntBlock8 ic;
    for (int bx = 0; bx < bw; ++bx) {
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
          residual[r * 8 + c] = current.samples()[static_cast<std::size_t>(by * 8 + r) * src_w + bx * 8 + c] -
                                reference(by * 8 + r, bx * 8 + c);
      dct.forward(residual.data(), 8, coeffs.data());
      for (int k = 0; k < 64; ++k) ic[k] = std::clamp(round_to_int(coeffs[k]), -kMaxCoefficient, kMaxCoefficient);
      const IntBlock8 dq = dequantize(quantize(ic, cfg), cfg);
      for (int k = 0; k < 64; ++k) coeffs[k] = dq[k];
      dct.inverse(coeffs.data(), recon.data());
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
          out(by * 8 + r, bx * 8 + c) =
              std::clamp(std::round(reference(by * 8 + r, bx * 8 + c) + recon[r * 8 + c]), 0.0, 255.0);
    }
  }
  return out;
}

}  // namespace dhnet
