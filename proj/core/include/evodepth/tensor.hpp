#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "evodepth/errors.hpp"

namespace evd {

// Dense NCHW tensor. Shapes are fixed at 4 dimensions; lower-rank data
// uses size-1 dimensions.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w)
      : dims_{n, c, h, w},
        data_(std::size_t(n) * c * h * w, T(0)) {}

  static Tensor scalar(T v) {
    Tensor t(1, 1, 1, 1);
    t.data_[0] = v;
    return t;
  }

  static Tensor zeros_like(const Tensor& o) {
    return Tensor(o.n(), o.c(), o.h(), o.w());
  }

  int n() const { return dims_[0]; }
  int c() const { return dims_[1]; }
  int h() const { return dims_[2]; }
  int w() const { return dims_[3]; }
  const std::array<int, 4>& dims() const { return dims_; }

  std::size_t size() const { return data_.size(); }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& operator()(int n, int c, int y, int x) {
    return data_[((std::size_t(n) * dims_[1] + c) * dims_[2] + y) * dims_[3] + x];
  }
  const T& operator()(int n, int c, int y, int x) const {
    return data_[((std::size_t(n) * dims_[1] + c) * dims_[2] + y) * dims_[3] + x];
  }

  bool same_shape(const Tensor& o) const { return dims_ == o.dims_; }

  std::string shape_str() const {
    return "(" + std::to_string(dims_[0]) + "," + std::to_string(dims_[1]) +
           "," + std::to_string(dims_[2]) + "," + std::to_string(dims_[3]) + ")";
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    for (T v : data_) {
      if (!std::isfinite(double(v))) return false;
    }
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(n(), c(), h(), w());
    for (std::size_t i = 0; i < size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool operator==(const Tensor&) const = default;

 private:
  std::array<int, 4> dims_{0, 0, 0, 0};
  std::vector<T> data_;
};

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b,
                      const char* op) {
  if (!a.same_shape(b)) {
    throw ConfigError(std::string(op) + ": shape mismatch " + a.shape_str() +
                      " vs " + b.shape_str());
  }
}

}  // namespace evd
