#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pnns/common.hpp"

namespace pnns {

struct AdamConfig {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a flat parameter block.
template <typename S>
class Adam {
 public:
  Adam(std::size_t n, const AdamConfig& cfg) : cfg_(cfg), m_(n, S(0)), v_(n, S(0)) {}

  void step(std::span<S> params, std::span<const S> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
      throw InvariantError("Adam::step: size mismatch");
    ++t_;
    const S b1 = S(cfg_.beta1), b2 = S(cfg_.beta2);
    const S correction1 = S(1) - S(std::pow(cfg_.beta1, t_));
    const S correction2 = S(1) - S(std::pow(cfg_.beta2, t_));
    const S alpha = S(cfg_.alpha), eps = S(cfg_.eps);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = b1 * m_[i] + (S(1) - b1) * grads[i];
      v_[i] = b2 * v_[i] + (S(1) - b2) * grads[i] * grads[i];
      S mhat = m_[i] / correction1;
      S vhat = v_[i] / correction2;
      params[i] -= alpha * mhat / (std::sqrt(vhat) + eps);
    }
  }

 private:
  AdamConfig cfg_;
  std::vector<S> m_, v_;
  long t_ = 0;
};

}  // namespace pnns
