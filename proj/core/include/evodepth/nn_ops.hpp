#pragma once

#include <algorithm>

#include "evodepth/autograd.hpp"

namespace evd::nn {

// Cross-correlation, weights (Cout, Cin, KH, KW), bias (1, Cout, 1, 1).
// Output spatial size floor((H + 2p - K)/s) + 1.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int stride,
              int pad) {
  const auto& xv = x->value;
  const auto& wv = w->value;
  if (xv.c() != wv.c()) {
    throw ConfigError("conv2d: input channels " + xv.shape_str() +
                      " do not match weights " + wv.shape_str());
  }
  if (b->value.c() != wv.n() || b->value.size() != std::size_t(wv.n())) {
    throw ConfigError("conv2d: bias shape " + b->value.shape_str() +
                      " does not match " + std::to_string(wv.n()) +
                      " output channels");
  }
  const int oh = (xv.h() + 2 * pad - wv.h()) / stride + 1;
  const int ow = (xv.w() + 2 * pad - wv.w()) / stride + 1;
  if (oh < 1 || ow < 1) {
    throw ConfigError("conv2d: kernel " + wv.shape_str() +
                      " larger than padded input " + xv.shape_str());
  }

  Tensor<T> out(xv.n(), wv.n(), oh, ow);
  for (int n = 0; n < xv.n(); ++n) {
    for (int oc = 0; oc < wv.n(); ++oc) {
      const T bias = b->value[std::size_t(oc)];
      for (std::size_t i = 0; i < std::size_t(oh) * ow; ++i) {
        out.data()[((std::size_t(n) * wv.n() + oc) * oh) * ow + i] = bias;
      }
      for (int ic = 0; ic < xv.c(); ++ic) {
        for (int ky = 0; ky < wv.h(); ++ky) {
          for (int kx = 0; kx < wv.w(); ++kx) {
            const T wgt = wv(oc, ic, ky, kx);
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * stride - pad + ky;
              if (iy < 0 || iy >= xv.h()) continue;
              const int ox_lo = std::max(0, (pad - kx + stride - 1) / stride);
              const int ox_hi =
                  std::min(ow, (xv.w() - 1 - kx + pad) / stride + 1);
              const T* xin = &xv(n, ic, iy, 0);
              T* orow = &out(n, oc, oy, 0);
              for (int ox = ox_lo; ox < ox_hi; ++ox) {
                orow[ox] += wgt * xin[ox * stride - pad + kx];
              }
            }
          }
        }
      }
    }
  }

  auto node = detail::make_op(std::move(out), {x, w, b});
  Node<T>* o = node.get();
  node->backprop = [o, x, w, b, stride, pad] {
    const auto& xv = x->value;
    const auto& wv = w->value;
    const auto& g = o->grad;
    const int oh = g.h(), ow = g.w();
    if (b->requires_grad) {
      for (int n = 0; n < g.n(); ++n)
        for (int oc = 0; oc < g.c(); ++oc) {
          T acc = 0;
          const T* grow = &g(n, oc, 0, 0);
          for (std::size_t i = 0; i < std::size_t(oh) * ow; ++i) acc += grow[i];
          b->grad[std::size_t(oc)] += acc;
        }
    }
    for (int n = 0; n < xv.n(); ++n) {
      for (int oc = 0; oc < wv.n(); ++oc) {
        for (int ic = 0; ic < xv.c(); ++ic) {
          for (int ky = 0; ky < wv.h(); ++ky) {
            for (int kx = 0; kx < wv.w(); ++kx) {
              const T wgt = wv(oc, ic, ky, kx);
              T wacc = 0;
              for (int oy = 0; oy < oh; ++oy) {
                const int iy = oy * stride - pad + ky;
                if (iy < 0 || iy >= xv.h()) continue;
                const int ox_lo = std::max(0, (pad - kx + stride - 1) / stride);
                const int ox_hi =
                    std::min(ow, (xv.w() - 1 - kx + pad) / stride + 1);
                const T* grow = &g(n, oc, oy, 0);
                const T* xin = &xv(n, ic, iy, 0);
                T* xg = x->requires_grad ? &x->grad(n, ic, iy, 0) : nullptr;
                for (int ox = ox_lo; ox < ox_hi; ++ox) {
                  const int ix = ox * stride - pad + kx;
                  wacc += grow[ox] * xin[ix];
                  if (xg) xg[ix] += grow[ox] * wgt;
                }
              }
              if (w->requires_grad) w->grad(oc, ic, ky, kx) += wacc;
            }
          }
        }
      }
    }
  };
  return node;
}

// Depthwise 3x3-style convolution: weights (C, 1, KH, KW), one filter per
// input channel.
template <typename T>
Var<T> conv2d_depthwise(const Var<T>& x, const Var<T>& w, const Var<T>& b,
                        int stride, int pad) {
  const auto& xv = x->value;
  const auto& wv = w->value;
  if (wv.n() != xv.c() || wv.c() != 1) {
    throw ConfigError("conv2d_depthwise: weights " + wv.shape_str() +
                      " incompatible with input " + xv.shape_str());
  }
  const int oh = (xv.h() + 2 * pad - wv.h()) / stride + 1;
  const int ow = (xv.w() + 2 * pad - wv.w()) / stride + 1;
  Tensor<T> out(xv.n(), xv.c(), oh, ow);
  for (int n = 0; n < xv.n(); ++n) {
    for (int c = 0; c < xv.c(); ++c) {
      const T bias = b->value[std::size_t(c)];
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          T acc = bias;
          for (int ky = 0; ky < wv.h(); ++ky) {
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= xv.h()) continue;
            for (int kx = 0; kx < wv.w(); ++kx) {
              const int ix = ox * stride - pad + kx;
              if (ix < 0 || ix >= xv.w()) continue;
              acc += wv(c, 0, ky, kx) * xv(n, c, iy, ix);
            }
          }
          out(n, c, oy, ox) = acc;
        }
    }
  }
  auto node = detail::make_op(std::move(out), {x, w, b});
  Node<T>* o = node.get();
  node->backprop = [o, x, w, b, stride, pad] {
    const auto& xv = x->value;
    const auto& wv = w->value;
    const auto& g = o->grad;
    for (int n = 0; n < xv.n(); ++n) {
      for (int c = 0; c < xv.c(); ++c) {
        for (int oy = 0; oy < g.h(); ++oy)
          for (int ox = 0; ox < g.w(); ++ox) {
            const T gv = g(n, c, oy, ox);
            if (b->requires_grad) b->grad[std::size_t(c)] += gv;
            for (int ky = 0; ky < wv.h(); ++ky) {
              const int iy = oy * stride - pad + ky;
              if (iy < 0 || iy >= xv.h()) continue;
              for (int kx = 0; kx < wv.w(); ++kx) {
                const int ix = ox * stride - pad + kx;
                if (ix < 0 || ix >= xv.w()) continue;
                if (w->requires_grad)
                  w->grad(c, 0, ky, kx) += gv * xv(n, c, iy, ix);
                if (x->requires_grad)
                  x->grad(n, c, iy, ix) += gv * wv(c, 0, ky, kx);
              }
            }
          }
      }
    }
  };
  return node;
}

// Transposed convolution, weights (Cin, Cout, KH, KW). Inverts the spatial
// arithmetic of conv2d with the same stride/pad: OH = (H-1)*s - 2p + K.
template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& w, const Var<T>& b,
                        int stride, int pad) {
  const auto& xv = x->value;
  const auto& wv = w->value;
  if (xv.c() != wv.n()) {
    throw ConfigError("conv_transpose2d: input channels " + xv.shape_str() +
                      " do not match weights " + wv.shape_str());
  }
  const int oh = (xv.h() - 1) * stride - 2 * pad + wv.h();
  const int ow = (xv.w() - 1) * stride - 2 * pad + wv.w();
  if (oh < 1 || ow < 1) {
    throw ConfigError("conv_transpose2d: degenerate output for input " +
                      xv.shape_str());
  }
  Tensor<T> out(xv.n(), wv.c(), oh, ow);
  for (int n = 0; n < xv.n(); ++n) {
    for (int oc = 0; oc < wv.c(); ++oc) {
      const T bias = b->value[std::size_t(oc)];
      for (std::size_t i = 0; i < std::size_t(oh) * ow; ++i)
        out.data()[((std::size_t(n) * wv.c() + oc) * oh) * ow + i] = bias;
    }
    for (int ic = 0; ic < xv.c(); ++ic) {
      for (int oc = 0; oc < wv.c(); ++oc) {
        for (int iy = 0; iy < xv.h(); ++iy) {
          for (int ix = 0; ix < xv.w(); ++ix) {
            const T xval = xv(n, ic, iy, ix);
            for (int ky = 0; ky < wv.h(); ++ky) {
              const int oy = iy * stride - pad + ky;
              if (oy < 0 || oy >= oh) continue;
              for (int kx = 0; kx < wv.w(); ++kx) {
                const int ox = ix * stride - pad + kx;
                if (ox < 0 || ox >= ow) continue;
                out(n, oc, oy, ox) += xval * wv(ic, oc, ky, kx);
              }
            }
          }
        }
      }
    }
  }
  auto node = detail::make_op(std::move(out), {x, w, b});
  Node<T>* o = node.get();
  node->backprop = [o, x, w, b, stride, pad] {
    const auto& xv = x->value;
    const auto& wv = w->value;
    const auto& g = o->grad;
    if (b->requires_grad) {
      for (int n = 0; n < g.n(); ++n)
        for (int oc = 0; oc < g.c(); ++oc) {
          T acc = 0;
          const T* grow = &g(n, oc, 0, 0);
          for (std::size_t i = 0; i < std::size_t(g.h()) * g.w(); ++i)
            acc += grow[i];
          b->grad[std::size_t(oc)] += acc;
        }
    }
    for (int n = 0; n < xv.n(); ++n) {
      for (int ic = 0; ic < xv.c(); ++ic) {
        for (int oc = 0; oc < wv.c(); ++oc) {
          for (int iy = 0; iy < xv.h(); ++iy) {
            for (int ix = 0; ix < xv.w(); ++ix) {
              T xacc = 0;
              for (int ky = 0; ky < wv.h(); ++ky) {
                const int oy = iy * stride - pad + ky;
                if (oy < 0 || oy >= g.h()) continue;
                for (int kx = 0; kx < wv.w(); ++kx) {
                  const int ox = ix * stride - pad + kx;
                  if (ox < 0 || ox >= g.w()) continue;
                  const T gv = g(n, oc, oy, ox);
                  xacc += gv * wv(ic, oc, ky, kx);
                  if (w->requires_grad)
                    w->grad(ic, oc, ky, kx) += gv * xv(n, ic, iy, ix);
                }
              }
              if (x->requires_grad) x->grad(n, ic, iy, ix) += xacc;
            }
          }
        }
      }
    }
  };
  return node;
}

// Non-overlapping max pooling, window == stride.
template <typename T>
Var<T> maxpool2d(const Var<T>& x, int window) {
  const auto& xv = x->value;
  if (window < 1) throw ConfigError("maxpool2d: window must be positive");
  const int oh = xv.h() / window;
  const int ow = xv.w() / window;
  if (oh < 1 || ow < 1) {
    throw ConfigError("maxpool2d: window " + std::to_string(window) +
                      " larger than input " + xv.shape_str());
  }
  Tensor<T> out(xv.n(), xv.c(), oh, ow);
  auto argmax = std::make_shared<std::vector<std::uint32_t>>(out.size());
  for (int n = 0; n < xv.n(); ++n)
    for (int c = 0; c < xv.c(); ++c)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          T best = xv(n, c, oy * window, ox * window);
          int by = oy * window, bx = ox * window;
          for (int ky = 0; ky < window; ++ky)
            for (int kx = 0; kx < window; ++kx) {
              const T v = xv(n, c, oy * window + ky, ox * window + kx);
              if (v > best) {
                best = v;
                by = oy * window + ky;
                bx = ox * window + kx;
              }
            }
          out(n, c, oy, ox) = best;
          (*argmax)[((std::size_t(n) * xv.c() + c) * oh + oy) * ow + ox] =
              std::uint32_t(by * xv.w() + bx);
        }
  auto node = detail::make_op(std::move(out), {x});
  Node<T>* o = node.get();
  node->backprop = [o, x, argmax] {
    const auto& g = o->grad;
    for (int n = 0; n < g.n(); ++n)
      for (int c = 0; c < g.c(); ++c)
        for (int oy = 0; oy < g.h(); ++oy)
          for (int ox = 0; ox < g.w(); ++ox) {
            const std::uint32_t a =
                (*argmax)[((std::size_t(n) * g.c() + c) * g.h() + oy) * g.w() +
                          ox];
            x->grad(n, c, int(a) / x->value.w(), int(a) % x->value.w()) +=
                g(n, c, oy, ox);
          }
  };
  return node;
}

template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
  const auto& xv = x->value;
  Tensor<T> out(xv.n(), xv.c(), 1, 1);
  const T inv = T(1) / T(std::size_t(xv.h()) * xv.w());
  for (int n = 0; n < xv.n(); ++n)
    for (int c = 0; c < xv.c(); ++c) {
      T acc = 0;
      const T* row = &xv(n, c, 0, 0);
      for (std::size_t i = 0; i < std::size_t(xv.h()) * xv.w(); ++i)
        acc += row[i];
      out(n, c, 0, 0) = acc * inv;
    }
  auto node = detail::make_op(std::move(out), {x});
  Node<T>* o = node.get();
  node->backprop = [o, x, inv] {
    for (int n = 0; n < o->grad.n(); ++n)
      for (int c = 0; c < o->grad.c(); ++c) {
        const T g = o->grad(n, c, 0, 0) * inv;
        T* row = &x->grad(n, c, 0, 0);
        for (std::size_t i = 0;
             i < std::size_t(x->value.h()) * x->value.w(); ++i)
          row[i] += g;
      }
  };
  return node;
}

// Valid-mode uniform k x k mean filter per channel (the SSIM window).
template <typename T>
Var<T> box_filter(const Var<T>& x, int k) {
  const auto& xv = x->value;
  const int oh = xv.h() - k + 1;
  const int ow = xv.w() - k + 1;
  if (oh < 1 || ow < 1) {
    throw ConfigError("box_filter: window " + std::to_string(k) +
                      " larger than input " + xv.shape_str());
  }
  const T inv = T(1) / T(k * k);
  Tensor<T> out(xv.n(), xv.c(), oh, ow);
  for (int n = 0; n < xv.n(); ++n)
    for (int c = 0; c < xv.c(); ++c)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          T acc = 0;
          for (int ky = 0; ky < k; ++ky) {
            const T* row = &xv(n, c, oy + ky, ox);
            for (int kx = 0; kx < k; ++kx) acc += row[kx];
          }
          out(n, c, oy, ox) = acc * inv;
        }
  auto node = detail::make_op(std::move(out), {x});
  Node<T>* o = node.get();
  node->backprop = [o, x, k, inv] {
    const auto& g = o->grad;
    for (int n = 0; n < g.n(); ++n)
      for (int c = 0; c < g.c(); ++c)
        for (int oy = 0; oy < g.h(); ++oy)
          for (int ox = 0; ox < g.w(); ++ox) {
            const T gv = g(n, c, oy, ox) * inv;
            for (int ky = 0; ky < k; ++ky) {
              T* row = &x->grad(n, c, oy + ky, ox);
              for (int kx = 0; kx < k; ++kx) row[kx] += gv;
            }
          }
  };
  return node;
}

}  // namespace evd::nn
