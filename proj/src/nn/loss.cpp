#include "dhnet/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "dhnet/error.hpp"

namespace dhnet::nn {

namespace {

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void check_logits(double y0, double y1) {
  if (!std::isfinite(y0) || !std::isfinite(y1)) throw InvalidArgument("softmax_xent: non-finite logits");
}

}  // namespace

std::array<double, 2> softmax2(double y0, double y1) {
  check_logits(y0, y1);
  const double lse = log_sum_exp(y0, y1);
  return {std::exp(y0 - lse), std::exp(y1 - lse)};
}

double softmax_xent(double y0, double y1, int label) {
  check_logits(y0, y1);
  if (label != 0 && label != 1) throw InvalidArgument("softmax_xent: label must be 0 or 1");
  const double lse = log_sum_exp(y0, y1);
  const double log_p0 = y0 - lse, log_p1 = y1 - lse;
  return -(1 - label) * log_p0 - label * log_p1;
}

BatchLoss softmax_xent(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || logits.dim(1) != 2)
    throw InvalidArgument("softmax_xent: logits must be [N, 2], got " + shape_string(logits.shape()));
  const std::size_t n = logits.dim(0);
  if (labels.size() != n) throw InvalidArgument("softmax_xent: label count does not match batch");
  if (n == 0) throw InvalidArgument("softmax_xent: empty batch");
  BatchLoss out;
  out.dlogits = Tensor({n, 2});
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y0 = logits[2 * i], y1 = logits[2 * i + 1];
    total += softmax_xent(y0, y1, labels[i]);
    const auto p = softmax2(y0, y1);
    out.dlogits[2 * i] = (p[0] - (labels[i] == 0 ? 1.0 : 0.0)) / static_cast<double>(n);
    out.dlogits[2 * i + 1] = (p[1] - (labels[i] == 1 ? 1.0 : 0.0)) / static_cast<double>(n);
  }
  out.loss = total / static_cast<double>(n);
  return out;
}

double l2_penalty(std::span<Parameter* const> params, double gamma) {
  if (gamma < 0.0) throw InvalidArgument("l2_penalty: gamma must be >= 0");
  double s = 0.0;
  for (const Parameter* p : params) {
    if (!p->regularized) continue;
    for (double w : p->value.data()) s += w * w;
  }
  return gamma * s;
}

void add_l2_gradient(std::span<Parameter* const> params, double gamma) {
  if (gamma < 0.0) throw InvalidArgument("add_l2_gradient: gamma must be >= 0");
  for (Parameter* p : params) {
    if (!p->regularized) continue;
    for (std::size_t i = 0; i < p->value.size(); ++i) p->grad[i] += 2.0 * gamma * p->value[i];
  }
}

}  // namespace dhnet::nn
