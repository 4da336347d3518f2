#pragma once

#include <cmath>
#include <vector>

#include "evodepth/autograd.hpp"

namespace evd::nn {

// lr(e) = 0.5 * lr0 * (1 + cos(pi * e / E)), annealing to zero.
template <typename T>
T cosine_anneal_lr(T lr0, int epoch, int total_epochs) {
  if (total_epochs <= 0) throw ConfigError("total epochs must be positive");
  return T(0.5) * lr0 * (T(1) + T(std::cos(M_PI * double(epoch) / total_epochs)));
}

// Adam with Nesterov momentum.
template <typename T>
class Nadam {
 public:
  Nadam(std::vector<Var<T>> params, T lr, T beta1 = T(0.9), T beta2 = T(0.999),
        T eps = T(1e-8))
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2),
        eps_(eps) {
    for (const auto& p : params_) {
      m_.push_back(Tensor<T>::zeros_like(p->value));
      v_.push_back(Tensor<T>::zeros_like(p->value));
    }
  }

  T lr() const { return lr_; }
  void set_lr(T lr) { lr_ = lr; }
  std::int64_t step_count() const { return step_; }

  void zero_grad() {
    for (auto& p : params_) {
      p->grad.fill(T(0));
      p->grad_ready = false;
    }
  }

  void step() {
    for (const auto& p : params_) {
      if (!p->grad_ready) {
        throw std::logic_error("optimizer step before backward for parameter " +
                               p->name);
      }
    }
    ++step_;
    const T bc1 = T(1) - T(std::pow(double(beta1_), double(step_)));
    const T bc2 = T(1) - T(std::pow(double(beta2_), double(step_)));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i]->value;
      const auto& g = params_[i]->grad;
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        m[j] = beta1_ * m[j] + (T(1) - beta1_) * g[j];
        v[j] = beta2_ * v[j] + (T(1) - beta2_) * g[j] * g[j];
        const T m_hat = m[j] / bc1;
        const T v_hat = v[j] / bc2;
        const T nesterov = beta1_ * m_hat + (T(1) - beta1_) * g[j] / bc1;
        p[j] -= lr_ * nesterov / (std::sqrt(v_hat) + eps_);
      }
    }
  }

  const std::vector<Var<T>>& params() const { return params_; }
  std::vector<Tensor<T>>& first_moments() { return m_; }
  std::vector<Tensor<T>>& second_moments() { return v_; }
  void set_step_count(std::int64_t s) { step_ = s; }

 private:
  std::vector<Var<T>> params_;
  std::vector<Tensor<T>> m_, v_;
  std::int64_t step_ = 0;
  T lr_, beta1_, beta2_, eps_;
};

}  // namespace evd::nn
