#pragma once

// Direct nested-loop convolution, used as a second route against the
// im2col/GEMM implementation.

#include <algorithm>
#include <span>

#include "xaug/layers.hpp"

namespace xaug::test {

template <class T>
Tensor4<T> conv_reference(const Tensor4<T>& x, std::span<const T> w, std::span<const T> b, int out_ch, int k) {
  const int pad = k / 2;
  Tensor4<T> out(x.n, out_ch, x.h, x.w);
  for (int n = 0; n < x.n; ++n)
    for (int o = 0; o < out_ch; ++o)
      for (int i = 0; i < x.h; ++i)
        for (int j = 0; j < x.w; ++j) {
          double acc = b[o];
          for (int c = 0; c < x.c; ++c)
            for (int u = 0; u < k; ++u)
              for (int v = 0; v < k; ++v) {
                const int y = i + u - pad, xx = j + v - pad;
                if (y < 0 || xx < 0 || y >= x.h || xx >= x.w) continue;
                acc += static_cast<double>(w[((o * x.c + c) * k + u) * k + v]) * x.at(n, c, y, xx);
              }
          out.at(n, o, i, j) = static_cast<T>(acc);
        }
  return out;
}

}  // namespace xaug::test
