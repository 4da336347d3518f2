#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "evodepth/tensor.hpp"

namespace evd::nn {

using evd::Tensor;

// Define-by-run reverse-mode graph node. Parameters are long-lived leaves;
// intermediates are rebuilt every forward pass.
template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  bool is_param = false;
  bool grad_ready = false;
  std::string name;
  std::vector<std::shared_ptr<Node<T>>> parents;
  std::function<void()> backprop;
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

template <typename T>
Var<T> constant(Tensor<T> value) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  return n;
}

template <typename T>
Var<T> parameter(Tensor<T> value, std::string name) {
  auto n = std::make_shared<Node<T>>();
  n->grad = Tensor<T>::zeros_like(value);
  n->value = std::move(value);
  n->requires_grad = true;
  n->is_param = true;
  n->name = std::move(name);
  return n;
}

namespace detail {

template <typename T>
Var<T> make_op(Tensor<T> value, std::vector<Var<T>> parents) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  for (const auto& p : n->parents) {
    if (p->requires_grad) n->requires_grad = true;
  }
  return n;
}

template <typename T>
void topo_sort(const Var<T>& root, std::vector<Node<T>*>& order) {
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* p = node->parents[next++].get();
      if (seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
}

}  // namespace detail

// Accumulates gradients of a scalar loss into every reachable parameter.
template <typename T>
void backward(const Var<T>& loss) {
  if (loss->value.size() != 1) {
    throw ConfigError("backward: loss must be scalar, got " +
                      loss->value.shape_str());
  }
  std::vector<Node<T>*> order;
  detail::topo_sort(loss, order);
  for (Node<T>* n : order) {
    if (!n->is_param) n->grad = Tensor<T>::zeros_like(n->value);
  }
  loss->grad[0] = T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backprop && (*it)->requires_grad) (*it)->backprop();
  }
  for (Node<T>* n : order) {
    if (n->is_param) n->grad_ready = true;
  }
}

// ---- elementwise ----

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a->value, b->value, "add");
  Tensor<T> v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += b->value[i];
  auto out = detail::make_op(std::move(v), {a, b});
  Node<T>* o = out.get();
  out->backprop = [o, a, b] {
    if (a->requires_grad)
      for (std::size_t i = 0; i < o->grad.size(); ++i) a->grad[i] += o->grad[i];
    if (b->requires_grad)
      for (std::size_t i = 0; i < o->grad.size(); ++i) b->grad[i] += o->grad[i];
  };
  return out;
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a->value, b->value, "sub");
  Tensor<T> v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= b->value[i];
  auto out = detail::make_op(std::move(v), {a, b});
  Node<T>* o = out.get();
  out->backprop = [o, a, b] {
    if (a->requires_grad)
      for (std::size_t i = 0; i < o->grad.size(); ++i) a->grad[i] += o->grad[i];
    if (b->requires_grad)
      for (std::size_t i = 0; i < o->grad.size(); ++i) b->grad[i] -= o->grad[i];
  };
  return out;
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a->value, b->value, "mul");
  Tensor<T> v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= b->value[i];
  auto out = detail::make_op(std::move(v), {a, b});
  Node<T>* o = out.get();
  out->backprop = [o, a, b] {
    if (a->requires_grad)
      for (std::size_t i = 0; i < o->grad.size(); ++i)
        a->grad[i] += o->grad[i] * b->value[i];
    if (b->requires_grad)
      for (std::size_t i = 0; i < o->grad.size(); ++i)
        b->grad[i] += o->grad[i] * a->value[i];
  };
  return out;
}

template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
  check_same_shape(a->value, b->value, "div");
  Tensor<T> v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] /= b->value[i];
  auto out = detail::make_op(std::move(v), {a, b});
  Node<T>* o = out.get();
  out->backprop = [o, a, b] {
    if (a->requires_grad)
      for (std::size_t i = 0; i < o->grad.size(); ++i)
        a->grad[i] += o->grad[i] / b->value[i];
    if (b->requires_grad)
      for (std::size_t i = 0; i < o->grad.size(); ++i)
        b->grad[i] -= o->grad[i] * a->value[i] / (b->value[i] * b->value[i]);
  };
  return out;
}

template <typename T>
Var<T> add_scalar(const Var<T>& a, T s) {
  Tensor<T> v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += s;
  auto out = detail::make_op(std::move(v), {a});
  Node<T>* o = out.get();
  out->backprop = [o, a] {
    for (std::size_t i = 0; i < o->grad.size(); ++i) a->grad[i] += o->grad[i];
  };
  return out;
}

template <typename T>
Var<T> mul_scalar(const Var<T>& a, T s) {
  Tensor<T> v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= s;
  auto out = detail::make_op(std::move(v), {a});
  Node<T>* o = out.get();
  out->backprop = [o, a, s] {
    for (std::size_t i = 0; i < o->grad.size(); ++i)
      a->grad[i] += o->grad[i] * s;
  };
  return out;
}

template <typename T>
Var<T> relu(const Var<T>& a) {
  Tensor<T> v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = v[i] > T(0) ? v[i] : T(0);
  auto out = detail::make_op(std::move(v), {a});
  Node<T>* o = out.get();
  out->backprop = [o, a] {
    for (std::size_t i = 0; i < o->grad.size(); ++i)
      if (a->value[i] > T(0)) a->grad[i] += o->grad[i];
  };
  return out;
}

// log(1 + e^x) with a linear branch past |x| > 30 so large inputs neither
// overflow nor lose the asymptote.
template <typename T>
Var<T> softplus(const Var<T>& a) {
  Tensor<T> v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const T x = v[i];
    if (x > T(30)) {
      v[i] = x;
    } else if (x < T(-30)) {
      v[i] = std::exp(x);
    } else {
      v[i] = std::log1p(std::exp(x));
    }
  }
  auto out = detail::make_op(std::move(v), {a});
  Node<T>* o = out.get();
  out->backprop = [o, a] {
    for (std::size_t i = 0; i < o->grad.size(); ++i) {
      const T x = a->value[i];
      const T s = x > T(30)   ? T(1)
                  : x < T(-30) ? std::exp(x)
                               : T(1) / (T(1) + std::exp(-x));
      a->grad[i] += o->grad[i] * s;
    }
  };
  return out;
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
  Tensor<T> v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = T(1) / (T(1) + std::exp(-v[i]));
  auto out = detail::make_op(std::move(v), {a});
  Node<T>* o = out.get();
  out->backprop = [o, a] {
    for (std::size_t i = 0; i < o->grad.size(); ++i) {
      const T y = o->value[i];
      a->grad[i] += o->grad[i] * y * (T(1) - y);
    }
  };
  return out;
}

template <typename T>
Var<T> log_op(const Var<T>& a) {
  Tensor<T> v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::log(v[i]);
  auto out = detail::make_op(std::move(v), {a});
  Node<T>* o = out.get();
  out->backprop = [o, a] {
    for (std::size_t i = 0; i < o->grad.size(); ++i)
      a->grad[i] += o->grad[i] / a->value[i];
  };
  return out;
}

template <typename T>
Var<T> sqrt_op(const Var<T>& a) {
  Tensor<T> v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sqrt(v[i]);
  auto out = detail::make_op(std::move(v), {a});
  Node<T>* o = out.get();
  out->backprop = [o, a] {
    for (std::size_t i = 0; i < o->grad.size(); ++i)
      a->grad[i] += o->grad[i] * T(0.5) / o->value[i];
  };
  return out;
}

template <typename T>
Var<T> abs_op(const Var<T>& a) {
  Tensor<T> v = a->value;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(v[i]);
  auto out = detail::make_op(std::move(v), {a});
  Node<T>* o = out.get();
  out->backprop = [o, a] {
    for (std::size_t i = 0; i < o->grad.size(); ++i) {
      if (a->value[i] > T(0)) a->grad[i] += o->grad[i];
      else if (a->value[i] < T(0)) a->grad[i] -= o->grad[i];
    }
  };
  return out;
}

template <typename T>
Var<T> square(const Var<T>& a) {
  return mul(a, a);
}

// ---- reductions ----

template <typename T>
Var<T> sum(const Var<T>& a) {
  T acc = 0;
  for (std::size_t i = 0; i < a->value.size(); ++i) acc += a->value[i];
  auto out = detail::make_op(Tensor<T>::scalar(acc), {a});
  Node<T>* o = out.get();
  out->backprop = [o, a] {
    const T g = o->grad[0];
    for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += g;
  };
  return out;
}

template <typename T>
Var<T> mean(const Var<T>& a) {
  return mul_scalar(sum(a), T(1) / T(a->value.size()));
}

// ---- shape ----

template <typename T>
Var<T> concat_channels(const Var<T>& a, const Var<T>& b) {
  const auto& av = a->value;
  const auto& bv = b->value;
  if (av.n() != bv.n() || av.h() != bv.h() || av.w() != bv.w()) {
    throw ConfigError("concat_channels: incompatible shapes " +
                      av.shape_str() + " vs " + bv.shape_str());
  }
  Tensor<T> v(av.n(), av.c() + bv.c(), av.h(), av.w());
  for (int n = 0; n < av.n(); ++n) {
    for (int c = 0; c < av.c(); ++c)
      for (int y = 0; y < av.h(); ++y)
        for (int x = 0; x < av.w(); ++x) v(n, c, y, x) = av(n, c, y, x);
    for (int c = 0; c < bv.c(); ++c)
      for (int y = 0; y < bv.h(); ++y)
        for (int x = 0; x < bv.w(); ++x)
          v(n, av.c() + c, y, x) = bv(n, c, y, x);
  }
  auto out = detail::make_op(std::move(v), {a, b});
  Node<T>* o = out.get();
  out->backprop = [o, a, b] {
    const auto& av = a->value;
    const auto& bv = b->value;
    for (int n = 0; n < av.n(); ++n) {
      if (a->requires_grad)
        for (int c = 0; c < av.c(); ++c)
          for (int y = 0; y < av.h(); ++y)
            for (int x = 0; x < av.w(); ++x)
              a->grad(n, c, y, x) += o->grad(n, c, y, x);
      if (b->requires_grad)
        for (int c = 0; c < bv.c(); ++c)
          for (int y = 0; y < bv.h(); ++y)
            for (int x = 0; x < bv.w(); ++x)
              b->grad(n, c, y, x) += o->grad(n, av.c() + c, y, x);
    }
  };
  return out;
}

template <typename T>
Var<T> crop(const Var<T>& a, int y0, int x0, int oh, int ow) {
  const auto& av = a->value;
  if (y0 < 0 || x0 < 0 || y0 + oh > av.h() || x0 + ow > av.w()) {
    throw ConfigError("crop outside input " + av.shape_str());
  }
  Tensor<T> v(av.n(), av.c(), oh, ow);
  for (int n = 0; n < av.n(); ++n)
    for (int c = 0; c < av.c(); ++c)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
          v(n, c, y, x) = av(n, c, y0 + y, x0 + x);
  auto out = detail::make_op(std::move(v), {a});
  Node<T>* o = out.get();
  out->backprop = [o, a, y0, x0, oh, ow] {
    for (int n = 0; n < o->grad.n(); ++n)
      for (int c = 0; c < o->grad.c(); ++c)
        for (int y = 0; y < oh; ++y)
          for (int x = 0; x < ow; ++x)
            a->grad(n, c, y0 + y, x0 + x) += o->grad(n, c, y, x);
  };
  return out;
}

}  // namespace evd::nn
