#pragma once

// Straightforward single-threaded versions of the hot kernels. They share no
// code with the optimized paths and serve as test oracles and benchmark
// baselines.

#include <vector>

#include "dhnet/features.hpp"
#include "dhnet/intra_quant.hpp"
#include "dhnet/nn/tensor.hpp"

namespace dhnet::reference {

// Direct evaluation of the 2-D DCT-II sum for every block.
DctChannelStack block_dct_stack(const YPlane& plane, int delta);

// Counts, for every bin boundary separately, the blocks whose coefficient
// exceeds it.
CumulativeHist cumulative_hist(const DctChannelStack& stack, int alpha);

// Block-by-block serial plane codec.
YPlane compress_plane(const YPlane& plane, const QuantConfig& cfg);

// Six nested loops; "same" padding with the smaller half before.
nn::Tensor conv2d(const nn::Tensor& x, const nn::Tensor& weight, const nn::Tensor& bias, int stride);

nn::Tensor dense(const nn::Tensor& x, const nn::Tensor& weight, const nn::Tensor& bias);

nn::Tensor maxpool2x2(const nn::Tensor& x);

// Training-mode normalization using the biased batch variance.
nn::Tensor batchnorm_train(const nn::Tensor& x, const nn::Tensor& gamma, const nn::Tensor& beta, double epsilon);

}  // namespace dhnet::reference
