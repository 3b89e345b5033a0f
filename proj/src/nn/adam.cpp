#include "dhnet/nn/adam.hpp"

#include <cmath>

#include "dhnet/error.hpp"

namespace dhnet::nn {

void Adam::step(std::span<Parameter* const> params) {
  if (m_.empty()) {
    for (const Parameter* p : params) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  }
  if (m_.size() != params.size()) throw InvalidArgument("Adam::step: parameter list changed between steps");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k]->grad.shape() != m_[k].shape())
      throw InvalidArgument("Adam::step: shape mismatch for " + params[k]->name);
    for (double g : params[k]->grad.data())
      if (!std::isfinite(g)) throw TrainingAbort("non-finite gradient in " + params[k]->name);
  }
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    double* m = m_[k].ptr();
    double* v = v_[k].ptr();
    double* w = p.value.ptr();
    const double* g = p.grad.ptr();
    const std::size_t n = p.value.size();
#pragma omp parallel for schedule(static) if (n > 65536)
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / c1, vhat = v[i] / c2;
      w[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }
}

}  // namespace dhnet::nn
