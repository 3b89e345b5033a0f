#include "dhnet/nn/layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

#include "dhnet/error.hpp"

namespace dhnet::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;
using MapVec = Eigen::Map<Eigen::VectorXd>;
using CMapVec = Eigen::Map<const Eigen::VectorXd>;

void require_rank(const Tensor& x, std::size_t rank, const char* who) {
  if (x.rank() != rank)
    throw InvalidArgument(std::string(who) + ": expected rank " + std::to_string(rank) + ", got shape " +
                          shape_string(x.shape()));
}

}  // namespace

double relu(double x) { return x > 0.0 ? x : 0.0; }

void init_fan_in_uniform(Tensor& weights, std::size_t fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (double& w : weights.data()) w = rng.uniform(-limit, limit);
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::string name, int in_channels, int out_channels, int kernel, int stride)
    : in_(in_channels), out_(out_channels), k_(kernel), stride_(stride),
      weight_(name + ".weight",
              {static_cast<std::size_t>(out_channels), static_cast<std::size_t>(in_channels),
               static_cast<std::size_t>(kernel), static_cast<std::size_t>(kernel)},
              true),
      bias_(name + ".bias", {static_cast<std::size_t>(out_channels)}) {
  if (in_channels < 1 || out_channels < 1 || kernel < 1 || stride < 1)
    throw InvalidArgument("Conv2d " + name + ": channels, kernel and stride must be positive");
}

void Conv2d::init(Rng& rng) {
  init_fan_in_uniform(weight_.value, static_cast<std::size_t>(in_) * k_ * k_, rng);
  bias_.value.fill(0.0);
}

int Conv2d::pad_before(int input_extent) const {
  const int out = output_extent(input_extent);
  const int total = std::max((out - 1) * stride_ + k_ - input_extent, 0);
  return total / 2;
}

namespace {

struct ConvGeometry {
  int c, h, w, k, stride, ho, wo, pad_h, pad_w;
  int K() const { return c * k * k; }
  int P() const { return ho * wo; }
  bool direct() const { return k == 1 && stride == 1 && pad_h == 0 && pad_w == 0; }
};

void im2col(const double* x, const ConvGeometry& g, double* col) {
  for (int ci = 0; ci < g.c; ++ci)
    for (int ky = 0; ky < g.k; ++ky)
      for (int kx = 0; kx < g.k; ++kx) {
        double* row = col + static_cast<std::size_t>((ci * g.k + ky) * g.k + kx) * g.P();
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad_h + ky;
          double* dst = row + static_cast<std::size_t>(oy) * g.wo;
          if (iy < 0 || iy >= g.h) {
            std::fill(dst, dst + g.wo, 0.0);
            continue;
          }
          const double* src = x + (static_cast<std::size_t>(ci) * g.h + iy) * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad_w + kx;
            dst[ox] = (ix >= 0 && ix < g.w) ? src[ix] : 0.0;
          }
        }
      }
}

void col2im(const double* col, const ConvGeometry& g, double* dx) {
  for (int ci = 0; ci < g.c; ++ci)
    for (int ky = 0; ky < g.k; ++ky)
      for (int kx = 0; kx < g.k; ++kx) {
        const double* row = col + static_cast<std::size_t>((ci * g.k + ky) * g.k + kx) * g.P();
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad_h + ky;
          if (iy < 0 || iy >= g.h) continue;
          const double* src = row + static_cast<std::size_t>(oy) * g.wo;
          double* dst = dx + (static_cast<std::size_t>(ci) * g.h + iy) * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad_w + kx;
            if (ix >= 0 && ix < g.w) dst[ix] += src[ox];
          }
        }
      }
}

}  // namespace

Tensor Conv2d::forward(const Tensor& x) {
  require_rank(x, 4, "Conv2d::forward");
  if (static_cast<int>(x.dim(1)) != in_)
    throw InvalidArgument("Conv2d::forward: expected " + std::to_string(in_) + " input channels, got shape " +
                          shape_string(x.shape()));
  input_ = x;
  const int n = static_cast<int>(x.dim(0));
  const int h = static_cast<int>(x.dim(2)), w = static_cast<int>(x.dim(3));
  const ConvGeometry g{in_, h, w, k_, stride_, output_extent(h), output_extent(w), pad_before(h), pad_before(w)};
  Tensor y({x.dim(0), static_cast<std::size_t>(out_), static_cast<std::size_t>(g.ho),
            static_cast<std::size_t>(g.wo)});
  const CMapMat wmat(weight_.value.ptr(), out_, g.K());
  const CMapVec b(bias_.value.ptr(), out_);
  const std::size_t in_stride = static_cast<std::size_t>(in_) * h * w;
  const std::size_t out_stride = static_cast<std::size_t>(out_) * g.P();
#pragma omp parallel
  {
    std::vector<double> col(g.direct() ? 0 : static_cast<std::size_t>(g.K()) * g.P());
#pragma omp for schedule(static)
    for (int i = 0; i < n; ++i) {
      const double* xi = x.ptr() + i * in_stride;
      if (!g.direct()) im2col(xi, g, col.data());
      const CMapMat cm(g.direct() ? xi : col.data(), g.K(), g.P());
      MapMat yi(y.ptr() + i * out_stride, out_, g.P());
      yi.noalias() = wmat * cm;
      yi.colwise() += b;
    }
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  if (input_.empty()) throw InvalidArgument("Conv2d::backward called before forward");
  const int n = static_cast<int>(input_.dim(0));
  const int h = static_cast<int>(input_.dim(2)), w = static_cast<int>(input_.dim(3));
  const ConvGeometry g{in_, h, w, k_, stride_, output_extent(h), output_extent(w), pad_before(h), pad_before(w)};
  if (dy.rank() != 4 || static_cast<int>(dy.dim(0)) != n || static_cast<int>(dy.dim(1)) != out_ ||
      static_cast<int>(dy.dim(2)) != g.ho || static_cast<int>(dy.dim(3)) != g.wo)
    throw InvalidArgument("Conv2d::backward: gradient shape " + shape_string(dy.shape()) + " does not match output");

  Tensor dx(input_.shape());
  const CMapMat wmat(weight_.value.ptr(), out_, g.K());
  const std::size_t wsize = static_cast<std::size_t>(out_) * g.K();
  // Per-sample weight gradients, reduced in sample order for determinism.
  std::vector<double> partial(static_cast<std::size_t>(n) * wsize);
  std::vector<double> partial_b(static_cast<std::size_t>(n) * out_);
  const std::size_t in_stride = static_cast<std::size_t>(in_) * h * w;
  const std::size_t out_stride = static_cast<std::size_t>(out_) * g.P();
#pragma omp parallel
  {
    std::vector<double> col(g.direct() ? 0 : static_cast<std::size_t>(g.K()) * g.P());
    std::vector<double> dcol(g.direct() ? 0 : static_cast<std::size_t>(g.K()) * g.P());
#pragma omp for schedule(static)
    for (int i = 0; i < n; ++i) {
      const double* xi = input_.ptr() + i * in_stride;
      if (!g.direct()) im2col(xi, g, col.data());
      const CMapMat cm(g.direct() ? xi : col.data(), g.K(), g.P());
      const CMapMat dyi(dy.ptr() + i * out_stride, out_, g.P());
      MapMat dw(partial.data() + i * wsize, out_, g.K());
      dw.noalias() = dyi * cm.transpose();
      // A plain loop keeps the summation order independent of buffer alignment.
      double* pb = partial_b.data() + static_cast<std::size_t>(i) * out_;
      for (int o = 0; o < out_; ++o) {
        const double* row = dy.ptr() + i * out_stride + static_cast<std::size_t>(o) * g.P();
        double acc = 0.0;
        for (int p = 0; p < g.P(); ++p) acc += row[p];
        pb[o] = acc;
      }
      double* dxi = dx.ptr() + i * in_stride;
      if (g.direct()) {
        MapMat(dxi, g.K(), g.P()).noalias() = wmat.transpose() * dyi;
      } else {
        MapMat(dcol.data(), g.K(), g.P()).noalias() = wmat.transpose() * dyi;
        col2im(dcol.data(), g, dxi);
      }
    }
  }
  double* gw = weight_.grad.ptr();
  double* gb = bias_.grad.ptr();
  for (int i = 0; i < n; ++i) {
    const double* pw = partial.data() + i * wsize;
    for (std::size_t j = 0; j < wsize; ++j) gw[j] += pw[j];
    const double* pb = partial_b.data() + static_cast<std::size_t>(i) * out_;
    for (int j = 0; j < out_; ++j) gb[j] += pb[j];
  }
  return dx;
}

// ---------------------------------------------------------------------------
// BatchNorm2d

BatchNorm2d::BatchNorm2d(std::string name, int channels, double momentum, double epsilon)
    : name_(name), channels_(channels), momentum_(momentum), epsilon_(epsilon),
      gamma_(name + ".gamma", {static_cast<std::size_t>(channels)}),
      beta_(name + ".beta", {static_cast<std::size_t>(channels)}),
      running_mean_({static_cast<std::size_t>(channels)}, 0.0),
      running_var_({static_cast<std::size_t>(channels)}, 1.0) {
  if (channels < 1) throw InvalidArgument("BatchNorm2d " + name + ": channels must be positive");
  if (epsilon <= 0.0) throw InvalidArgument("BatchNorm2d " + name + ": epsilon must be positive");
  gamma_.value.fill(1.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, Mode mode) {
  require_rank(x, 4, "BatchNorm2d::forward");
  if (static_cast<int>(x.dim(1)) != channels_)
    throw InvalidArgument("BatchNorm2d::forward: channel mismatch for " + name_);
  const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  if (mode == Mode::kTrain && n < 2)
    throw InvalidArgument("BatchNorm2d::forward: training mode needs a batch of at least 2");
  const std::size_t m = n * hw;
  last_mode_ = mode;
  xhat_ = Tensor(x.shape());
  inv_std_.assign(c, 0.0);
  Tensor y(x.shape());
#pragma omp parallel for schedule(static)
  for (std::size_t ch = 0; ch < c; ++ch) {
    double mean, var;
    if (mode == Mode::kTrain) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double* p = x.ptr() + (i * c + ch) * hw;
        for (std::size_t j = 0; j < hw; ++j) s += p[j];
      }
      mean = s / static_cast<double>(m);
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double* p = x.ptr() + (i * c + ch) * hw;
        for (std::size_t j = 0; j < hw; ++j) ss += (p[j] - mean) * (p[j] - mean);
      }
      var = ss / static_cast<double>(m);
      const double unbiased = m > 1 ? ss / static_cast<double>(m - 1) : 0.0;
      running_mean_[ch] = momentum_ * running_mean_[ch] + (1.0 - momentum_) * mean;
      running_var_[ch] = momentum_ * running_var_[ch] + (1.0 - momentum_) * unbiased;
    } else {
      mean = running_mean_[ch];
      var = running_var_[ch];
    }
    const double inv = 1.0 / std::sqrt(var + epsilon_);
    inv_std_[ch] = inv;
    const double g = gamma_.value[ch], b = beta_.value[ch];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * hw;
      for (std::size_t j = 0; j < hw; ++j) {
        const double xh = (x[off + j] - mean) * inv;
        xhat_[off + j] = xh;
        y[off + j] = g * xh + b;
      }
    }
  }
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy) {
  if (xhat_.empty() || dy.shape() != xhat_.shape())
    throw InvalidArgument("BatchNorm2d::backward: gradient shape does not match last forward");
  const std::size_t n = dy.dim(0), c = dy.dim(1), hw = dy.dim(2) * dy.dim(3);
  const double m = static_cast<double>(n * hw);
  Tensor dx(dy.shape());
#pragma omp parallel for schedule(static)
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * hw;
      for (std::size_t j = 0; j < hw; ++j) {
        sum_dy += dy[off + j];
        sum_dy_xhat += dy[off + j] * xhat_[off + j];
      }
    }
    gamma_.grad[ch] += sum_dy_xhat;
    beta_.grad[ch] += sum_dy;
    const double g = gamma_.value[ch], inv = inv_std_[ch];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * hw;
      for (std::size_t j = 0; j < hw; ++j) {
        if (last_mode_ == Mode::kTrain)
          dx[off + j] = g * inv * (dy[off + j] - sum_dy / m - xhat_[off + j] * sum_dy_xhat / m);
        else
          dx[off + j] = g * inv * dy[off + j];
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Relu / MaxPool2x2

Tensor Relu::forward(const Tensor& x) {
  shape_ = x.shape();
  mask_.assign(x.size(), 0);
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) {
      mask_[i] = 1;
      y[i] = x[i];
    }
  }
  return y;
}

Tensor Relu::backward(const Tensor& dy) const {
  if (dy.shape() != shape_) throw InvalidArgument("Relu::backward: gradient shape does not match last forward");
  Tensor dx(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = mask_[i] ? dy[i] : 0.0;
  return dx;
}

Tensor MaxPool2x2::forward(const Tensor& x) {
  require_rank(x, 4, "MaxPool2x2::forward");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t ho = h / 2, wo = w / 2;
  if (ho == 0 || wo == 0) throw InvalidArgument("MaxPool2x2::forward: spatial extent below 2");
  input_shape_ = x.shape();
  Tensor y({n, c, ho, wo});
  argmax_.assign(y.size(), 0);
#pragma omp parallel for schedule(static)
  for (std::size_t nc = 0; nc < n * c; ++nc) {
    const std::size_t base = nc * h * w;
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox) {
        std::size_t best = base + (2 * oy) * w + 2 * ox;
        for (std::size_t dy = 0; dy < 2; ++dy)
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = base + (2 * oy + dy) * w + 2 * ox + dx;
            if (x[idx] > x[best]) best = idx;
          }
        const std::size_t o = (nc * ho + oy) * wo + ox;
        y[o] = x[best];
        argmax_[o] = best;
      }
  }
  return y;
}

Tensor MaxPool2x2::backward(const Tensor& dy) const {
  if (dy.size() != argmax_.size()) throw InvalidArgument("MaxPool2x2::backward: gradient shape mismatch");
  Tensor dx(input_shape_);
  for (std::size_t o = 0; o < dy.size(); ++o) dx[argmax_[o]] += dy[o];
  return dx;
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(std::string name, int in_features, int out_features)
    : in_(in_features), out_(out_features),
      weight_(name + ".weight", {static_cast<std::size_t>(out_features), static_cast<std::size_t>(in_features)}),
      bias_(name + ".bias", {static_cast<std::size_t>(out_features)}) {
  if (in_features < 1 || out_features < 1) throw InvalidArgument("Dense " + name + ": sizes must be positive");
}

void Dense::init(Rng& rng) {
  init_fan_in_uniform(weight_.value, static_cast<std::size_t>(in_), rng);
  bias_.value.fill(0.0);
}

Tensor Dense::forward(const Tensor& x) {
  require_rank(x, 2, "Dense::forward");
  if (static_cast<int>(x.dim(1)) != in_)
    throw InvalidArgument("Dense::forward: expected " + std::to_string(in_) + " features, got shape " +
                          shape_string(x.shape()));
  input_ = x;
  const auto n = static_cast<Eigen::Index>(x.dim(0));
  Tensor y({x.dim(0), static_cast<std::size_t>(out_)});
  const CMapMat xm(x.ptr(), n, in_);
  const CMapMat wm(weight_.value.ptr(), out_, in_);
  MapMat ym(y.ptr(), n, out_);
  ym.noalias() = xm * wm.transpose();
  ym.rowwise() += CMapVec(bias_.value.ptr(), out_).transpose();
  return y;
}

Tensor Dense::backward(const Tensor& dy) {
  if (input_.empty() || dy.rank() != 2 || dy.dim(0) != input_.dim(0) || static_cast<int>(dy.dim(1)) != out_)
    throw InvalidArgument("Dense::backward: gradient shape does not match last forward");
  const auto n = static_cast<Eigen::Index>(dy.dim(0));
  const CMapMat xm(input_.ptr(), n, in_);
  const CMapMat dym(dy.ptr(), n, out_);
  const CMapMat wm(weight_.value.ptr(), out_, in_);
  MapMat(weight_.grad.ptr(), out_, in_).noalias() += dym.transpose() * xm;
  double* gb = bias_.grad.ptr();
  for (Eigen::Index i = 0; i < n; ++i)
    for (int o = 0; o < out_; ++o) gb[o] += dy[static_cast<std::size_t>(i) * out_ + o];
  Tensor dx(input_.shape());
  MapMat(dx.ptr(), n, in_).noalias() = dym * wm;
  return dx;
}

// ---------------------------------------------------------------------------
// Shape helpers

Tensor flatten(const Tensor& x) {
  if (x.rank() < 1) throw InvalidArgument("flatten: rank-0 tensor");
  const std::size_t n = x.dim(0);
  return x.reshaped({n, n == 0 ? 0 : x.size() / n});
}

Tensor concat(const std::vector<const Tensor*>& parts, std::size_t axis) {
  if (parts.empty()) throw InvalidArgument("concat: no inputs");
  const auto& ref = parts.front()->shape();
  if (axis >= ref.size()) throw InvalidArgument("concat: axis out of range");
  std::vector<std::size_t> shape = ref;
  shape[axis] = 0;
  for (const Tensor* p : parts) {
    if (p->rank() != ref.size()) throw InvalidArgument("concat: rank mismatch");
    for (std::size_t d = 0; d < ref.size(); ++d)
      if (d != axis && p->dim(d) != ref[d])
        throw InvalidArgument("concat: extent mismatch " + shape_string(p->shape()) + " vs " + shape_string(ref));
    shape[axis] += p->dim(axis);
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= ref[d];
  for (std::size_t d = axis + 1; d < ref.size(); ++d) inner *= ref[d];
  Tensor out(shape);
  double* dst = out.ptr();
  for (std::size_t o = 0; o < outer; ++o)
    for (const Tensor* p : parts) {
      const std::size_t len = p->dim(axis) * inner;
      std::copy_n(p->ptr() + o * len, len, dst);
      dst += len;
    }
  return out;
}

std::vector<Tensor> split(const Tensor& x, std::size_t axis, const std::vector<std::size_t>& extents) {
  if (axis >= x.rank()) throw InvalidArgument("split: axis out of range");
  std::size_t total = 0;
  for (std::size_t e : extents) total += e;
  if (total != x.dim(axis)) throw InvalidArgument("split: extents do not sum to the axis length");
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= x.dim(d);
  for (std::size_t d = axis + 1; d < x.rank(); ++d) inner *= x.dim(d);
  std::vector<Tensor> out;
  for (std::size_t e : extents) {
    auto shape = x.shape();
    shape[axis] = e;
    out.emplace_back(shape);
  }
  const double* src = x.ptr();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t k = 0; k < extents.size(); ++k) {
      const std::size_t len = extents[k] * inner;
      std::copy_n(src, len, out[k].ptr() + o * len);
      src += len;
    }
  return out;
}

}  // namespace dhnet::nn
