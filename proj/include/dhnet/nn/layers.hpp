#pragma once

#include <string>
#include <vector>

#include "dhnet/nn/tensor.hpp"
#include "dhnet/rng.hpp"

// Layers with explicit forward/backward passes. Each layer caches what its
// backward pass needs from the most recent forward call; backward() adds into
// the parameter gradients and returns the gradient w.r.t. the input.
// Image tensors are NCHW; feature tensors are [N, F].
namespace dhnet::nn {

enum class Mode { kTrain, kEval };

// Fan-in scaled uniform: U(-sqrt(6/fan_in), sqrt(6/fan_in)).
void init_fan_in_uniform(Tensor& weights, std::size_t fan_in, Rng& rng);

// Cross-correlation with "same" zero padding: output extent ceil(in / stride).
class Conv2d {
 public:
  Conv2d(std::string name, int in_channels, int out_channels, int kernel, int stride = 1);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void init(Rng& rng);

  Parameter& weight() { return weight_; }  // [out, in, k, k]
  Parameter& bias() { return bias_; }      // [out]
  const Parameter& weight() const { return weight_; }
  const Parameter& bias() const { return bias_; }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int kernel() const { return k_; }
  int stride() const { return stride_; }
  int output_extent(int input_extent) const { return (input_extent + stride_ - 1) / stride_; }

 private:
  int pad_before(int input_extent) const;

  int in_, out_, k_, stride_;
  Parameter weight_, bias_;
  Tensor input_;
};

// Per-channel batch normalization over (N, H, W) followed by an affine map.
// Running statistics use new = momentum * old + (1 - momentum) * batch; the
// running variance takes the unbiased batch variance.
class BatchNorm2d {
 public:
  BatchNorm2d(std::string name, int channels, double momentum = 0.99, double epsilon = 1e-3);

  Tensor forward(const Tensor& x, Mode mode);
  Tensor backward(const Tensor& dy);

  Parameter& gamma() { return gamma_; }
  Parameter& beta() { return beta_; }
  const Parameter& gamma() const { return gamma_; }
  const Parameter& beta() const { return beta_; }
  Tensor& running_mean() { return running_mean_; }
  Tensor& running_var() { return running_var_; }
  const Tensor& running_mean() const { return running_mean_; }
  const Tensor& running_var() const { return running_var_; }
  double momentum() const { return momentum_; }
  double epsilon() const { return epsilon_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  int channels_;
  double momentum_, epsilon_;
  Parameter gamma_, beta_;
  Tensor running_mean_, running_var_;
  Mode last_mode_ = Mode::kEval;
  Tensor xhat_;
  std::vector<double> inv_std_;
};

class Relu {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy) const;

 private:
  std::vector<unsigned char> mask_;
  std::vector<std::size_t> shape_;
};

// Non-overlapping 2x2 max pooling with stride 2; odd trailing rows/columns
// are dropped.
class MaxPool2x2 {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy) const;

 private:
  std::vector<std::size_t> input_shape_;
  std::vector<std::size_t> argmax_;
};

// y = x W^T + b with W [out, in].
class Dense {
 public:
  Dense(std::string name, int in_features, int out_features);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void init(Rng& rng);

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }
  const Parameter& weight() const { return weight_; }
  const Parameter& bias() const { return bias_; }
  int in_features() const { return in_; }
  int out_features() const { return out_; }

 private:
  int in_, out_;
  Parameter weight_, bias_;
  Tensor input_;
};

double relu(double x);

// [N, ...] -> [N, prod(...)].
Tensor flatten(const Tensor& x);

// Concatenates same-rank tensors along `axis`; all other extents must match.
Tensor concat(const std::vector<const Tensor*>& parts, std::size_t axis);
// Inverse of concat: splits `x` along `axis` into pieces of the given extents.
std::vector<Tensor> split(const Tensor& x, std::size_t axis, const std::vector<std::size_t>& extents);

}  // namespace dhnet::nn
