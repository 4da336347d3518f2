#pragma once

#include "evodepth/nn_ops.hpp"

namespace evd::nn {

template <typename T>
Var<T> mse_loss(const Var<T>& pred, const Var<T>& target) {
  check_same_shape(pred->value, target->value, "mse_loss");
  return mean(square(sub(pred, target)));
}

// Weighted binary cross entropy; probabilities clamped to
// [1e-7, 1 - 1e-7] from both ends. labels and weights are data, not graph
// nodes. Reduction is the weighted mean.
template <typename T>
Var<T> bce_loss(const Var<T>& prob, const Tensor<T>& labels,
                const Tensor<T>& weights) {
  check_same_shape(prob->value, labels, "bce_loss");
  check_same_shape(prob->value, weights, "bce_loss weights");
  const T eps = T(1e-7);
  T wsum = 0;
  T acc = 0;
  auto clamped = std::make_shared<Tensor<T>>(prob->value);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    T p = prob->value[i];
    p = std::max(eps, std::min(T(1) - eps, p));
    (*clamped)[i] = p;
    const T y = labels[i];
    acc -= weights[i] * (y * std::log(p) + (T(1) - y) * std::log(T(1) - p));
    wsum += weights[i];
  }
  if (wsum <= 0) throw ConfigError("bce_loss: weights sum to zero");
  auto labels_ptr = std::make_shared<Tensor<T>>(labels);
  auto weights_ptr = std::make_shared<Tensor<T>>(weights);
  auto out = detail::make_op(Tensor<T>::scalar(acc / wsum), {prob});
  Node<T>* o = out.get();
  out->backprop = [o, prob, clamped, labels_ptr, weights_ptr, wsum] {
    const T g = o->grad[0] / wsum;
    for (std::size_t i = 0; i < clamped->size(); ++i) {
      const T p = (*clamped)[i];
      const T y = (*labels_ptr)[i];
      prob->grad[i] += g * (*weights_ptr)[i] * (p - y) / (p * (T(1) - p));
    }
  };
  return out;
}

template <typename T>
Var<T> bce_loss(const Var<T>& prob, const Tensor<T>& labels) {
  Tensor<T> w = Tensor<T>::zeros_like(labels);
  w.fill(T(1));
  return bce_loss(prob, labels, w);
}

// Mean SSIM over valid kxk windows, C1 = (0.01 R)^2, C2 = (0.03 R)^2.
template <typename T>
Var<T> ssim(const Var<T>& a, const Var<T>& b, int window = 7,
            T value_range = T(1)) {
  check_same_shape(a->value, b->value, "ssim");
  const T c1 = T(0.01) * value_range * T(0.01) * value_range;
  const T c2 = T(0.03) * value_range * T(0.03) * value_range;

  auto mu1 = box_filter(a, window);
  auto mu2 = box_filter(b, window);
  auto mu1_sq = square(mu1);
  auto mu2_sq = square(mu2);
  auto mu12 = mul(mu1, mu2);
  auto sigma1 = sub(box_filter(square(a), window), mu1_sq);
  auto sigma2 = sub(box_filter(square(b), window), mu2_sq);
  auto sigma12 = sub(box_filter(mul(a, b), window), mu12);

  auto num = mul(add_scalar(mul_scalar(mu12, T(2)), c1),
                 add_scalar(mul_scalar(sigma12, T(2)), c2));
  auto den = mul(add_scalar(add(mu1_sq, mu2_sq), c1),
                 add_scalar(add(sigma1, sigma2), c2));
  return mean(div(num, den));
}

}  // namespace evd::nn
