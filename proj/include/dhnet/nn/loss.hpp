#pragma once

#include <array>
#include <span>

#include "dhnet/nn/tensor.hpp"

namespace dhnet::nn {

// Two-way softmax with log-sum-exp stabilization.
std::array<double, 2> softmax2(double y0, double y1);

// L_c = -(1 - l) log p0 - l log p1 for logits y = [y0, y1].
double softmax_xent(double y0, double y1, int label);

struct BatchLoss {
  double loss = 0.0;  // mean over the batch
  Tensor dlogits;     // [N, 2], gradient of the mean loss
};

// logits [N, 2]; labels in {0, 1}. Throws InvalidArgument on non-finite
// logits or bad labels.
BatchLoss softmax_xent(const Tensor& logits, std::span<const int> labels);

// gamma * sum of squared entries over the regularized parameters.
double l2_penalty(std::span<Parameter* const> params, double gamma);
// Adds d/dw of l2_penalty into the gradients of the regularized parameters.
void add_l2_gradient(std::span<Parameter* const> params, double gamma);

}  // namespace dhnet::nn
