#pragma once

#include "evodepth/autograd.hpp"
#include "evodepth/rng.hpp"

namespace evd::nn {

// Kaiming-uniform over fan-in; the usual choice for ReLU stacks.
template <typename T>
Tensor<T> kaiming_uniform(int cout, int cin, int kh, int kw, Rng& rng) {
  Tensor<T> w(cout, cin, kh, kw);
  const double bound = std::sqrt(6.0 / (double(cin) * kh * kw));
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = T(rng.uniform(-bound, bound));
  }
  return w;
}

template <typename T>
Tensor<T> zero_bias(int cout) {
  return Tensor<T>(1, cout, 1, 1);
}

}  // namespace evd::nn
