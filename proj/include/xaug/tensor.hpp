#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "xaug/error.hpp"

namespace xaug {

/// Dense NCHW tensor.
template <class T>
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> values;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_, T fill = T{})
      : n(n_), c(c_), h(h_), w(w_), values(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

  std::size_t size() const noexcept { return values.size(); }
  std::size_t plane() const noexcept { return static_cast<std::size_t>(h) * w; }
  bool same_shape(const Tensor4& o) const noexcept { return n == o.n && c == o.c && h == o.h && w == o.w; }

  T* channel(int ni, int ci) noexcept { return values.data() + (static_cast<std::size_t>(ni) * c + ci) * plane(); }
  const T* channel(int ni, int ci) const noexcept {
    return values.data() + (static_cast<std::size_t>(ni) * c + ci) * plane();
  }
  T& at(int ni, int ci, int y, int x) noexcept { return channel(ni, ci)[static_cast<std::size_t>(y) * w + x]; }
  const T& at(int ni, int ci, int y, int x) const noexcept {
    return channel(ni, ci)[static_cast<std::size_t>(y) * w + x];
  }
  void fill(T v) { std::fill(values.begin(), values.end(), v); }

  bool operator==(const Tensor4&) const = default;
};

template <class T>
void check_finite([[maybe_unused]] const Tensor4<T>& t) {
#ifndef NDEBUG
  for (const T v : t.values) assert(std::isfinite(static_cast<double>(v)) && "non-finite tensor value");
#endif
}

template <class T>
void require_same_shape(const Tensor4<T>& a, const Tensor4<T>& b, const char* what) {
  if (!a.same_shape(b)) fail(ErrorKind::ShapeMismatch, what);
}

}  // namespace xaug
