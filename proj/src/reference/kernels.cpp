#include "dhnet/reference/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dhnet/error.hpp"

namespace dhnet::reference {

DctChannelStack block_dct_stack(const YPlane& plane, int delta) {
  DctChannelStack s;
  s.delta = delta;
  s.grid_width = plane.width() / delta;
  s.grid_height = plane.height() / delta;
  s.data.assign(static_cast<std::size_t>(delta) * delta * s.blocks(), 0.0);
  const double n = delta;
  auto a = [&](int k) { return k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n); };
  for (int by = 0; by < s.grid_height; ++by)
    for (int bx = 0; bx < s.grid_width; ++bx)
      for (int u = 0; u < delta; ++u)
        for (int v = 0; v < delta; ++v) {
          double sum = 0.0;
          for (int y = 0; y < delta; ++y)
            for (int x = 0; x < delta; ++x)
              sum += plane(by * delta + y, bx * delta + x) * std::cos((2 * y + 1) * u * std::numbers::pi / (2 * n)) *
                     std::cos((2 * x + 1) * v * std::numbers::pi / (2 * n));
          const std::size_t c = static_cast<std::size_t>(u) * delta + v;
          s.data[c * s.blocks() + static_cast<std::size_t>(by) * s.grid_width + bx] = a(u) * a(v) * sum;
        }
  return s;
}

CumulativeHist cumulative_hist(const DctChannelStack& stack, int alpha) {
  CumulativeHist h;
  h.delta = stack.delta;
  h.alpha = alpha;
  h.bins.assign(static_cast<std::size_t>(h.rows()) * h.cols(), 0.0);
  const double nb = static_cast<double>(stack.blocks());
  for (int b = -alpha; b <= alpha; ++b)
    for (int c = 0; c < h.cols(); ++c) {
      std::size_t count = 0;
      for (double x : stack.channel(c))
        if (x > b + kThresholdTolerance) ++count;
      h.bins[static_cast<std::size_t>(b + alpha) * h.cols() + c] = static_cast<double>(count) / nb;
    }
  return h;
}

YPlane compress_plane(const YPlane& plane, const QuantConfig& cfg) {
  cfg.validate();
  const int w = plane.width() / 8 * 8, h = plane.height() / 8 * 8;
  if (w == 0 || h == 0) throw InvalidArgument("compress_plane: plane smaller than one 8x8 block");
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int by = 0; by < h; by += 8)
    for (int bx = 0; bx < w; bx += 8) {
      Block8 blk;
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) blk[y * 8 + x] = plane(by + y, bx + x);
      const Block8 coded = code_block(blk, cfg);
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) out[static_cast<std::size_t>(by + y) * w + bx + x] = coded[y * 8 + x];
    }
  return YPlane(w, h, std::move(out));
}

nn::Tensor conv2d(const nn::Tensor& x, const nn::Tensor& weight, const nn::Tensor& bias, int stride) {
  const int n = static_cast<int>(x.dim(0)), ci = static_cast<int>(x.dim(1));
  const int h = static_cast<int>(x.dim(2)), w = static_cast<int>(x.dim(3));
  const int co = static_cast<int>(weight.dim(0)), k = static_cast<int>(weight.dim(2));
  const int ho = (h + stride - 1) / stride, wo = (w + stride - 1) / stride;
  const int ph = std::max((ho - 1) * stride + k - h, 0) / 2;
  const int pw = std::max((wo - 1) * stride + k - w, 0) / 2;
  nn::Tensor y({x.dim(0), weight.dim(0), static_cast<std::size_t>(ho), static_cast<std::size_t>(wo)});
  for (int s = 0; s < n; ++s)
    for (int o = 0; o < co; ++o)
      for (int i = 0; i < ho; ++i)
        for (int j = 0; j < wo; ++j) {
          double acc = bias[o];
          for (int c = 0; c < ci; ++c)
            for (int ki = 0; ki < k; ++ki)
              for (int kj = 0; kj < k; ++kj) {
                const int yy = i * stride + ki - ph, xx = j * stride + kj - pw;
                if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                acc += x.at(s, c, yy, xx) * weight.at(o, c, ki, kj);
              }
          y.at(s, o, i, j) = acc;
        }
  return y;
}

nn::Tensor dense(const nn::Tensor& x, const nn::Tensor& weight, const nn::Tensor& bias) {
  const std::size_t n = x.dim(0), in = x.dim(1), out = weight.dim(0);
  nn::Tensor y({n, out});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t o = 0; o < out; ++o) {
      double acc = bias[o];
      for (std::size_t i = 0; i < in; ++i) acc += x[s * in + i] * weight[o * in + i];
      y[s * out + o] = acc;
    }
  return y;
}

nn::Tensor maxpool2x2(const nn::Tensor& x) {
  const std::size_t n = x.dim(0), c = x.dim(1), ho = x.dim(2) / 2, wo = x.dim(3) / 2;
  nn::Tensor y({n, c, ho, wo});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t i = 0; i < ho; ++i)
        for (std::size_t j = 0; j < wo; ++j)
          y.at(s, ch, i, j) = std::max({x.at(s, ch, 2 * i, 2 * j), x.at(s, ch, 2 * i, 2 * j + 1),
                                        x.at(s, ch, 2 * i + 1, 2 * j), x.at(s, ch, 2 * i + 1, 2 * j + 1)});
  return y;
}

nn::Tensor batchnorm_train(const nn::Tensor& x, const nn::Tensor& gamma, const nn::Tensor& beta, double epsilon) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const double m = static_cast<double>(n * h * w);
  nn::Tensor y(x.shape());
  for (std::size_t ch = 0; ch < c; ++ch) {
    double mean = 0.0;
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) mean += x.at(s, ch, i, j);
    mean /= m;
    double var = 0.0;
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) var += (x.at(s, ch, i, j) - mean) * (x.at(s, ch, i, j) - mean);
    var /= m;
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j)
          y.at(s, ch, i, j) = gamma[ch] * (x.at(s, ch, i, j) - mean) / std::sqrt(var + epsilon) + beta[ch];
  }
  return y;
}

}  // namespace dhnet::reference
