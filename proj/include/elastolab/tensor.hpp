#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace elastolab {

/// Dense NCHW tensor.
template <typename T>
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> v;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_, T fill = T{})
      : n(n_), c(c_), h(h_), w(w_), v(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {
    if (n_ <= 0 || c_ <= 0 || h_ <= 0 || w_ <= 0)
      throw std::invalid_argument("tensor dims must be positive");
  }

  std::size_t size() const { return v.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }

  T& at(int i, int ch, int r, int cc) {
    return v[((static_cast<std::size_t>(i) * c + ch) * h + r) * w + cc];
  }
  const T& at(int i, int ch, int r, int cc) const {
    return v[((static_cast<std::size_t>(i) * c + ch) * h + r) * w + cc];
  }

  T* sample(int i) { return v.data() + static_cast<std::size_t>(i) * c * plane(); }
  const T* sample(int i) const { return v.data() + static_cast<std::size_t>(i) * c * plane(); }

  bool same_shape(const Tensor4& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
};

}  // namespace elastolab
