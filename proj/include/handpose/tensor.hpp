#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "handpose/error.hpp"
#include "handpose/grid.hpp"

namespace handpose {

// Dense NCHW value carrier for the network and the losses.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w, double fill = 0.0)
      : n_(n), c_(c), h_(h), w_(w),
        data_(static_cast<std::size_t>(n) * c * h * w, fill) {
    if (n < 1 || c < 1 || h < 1 || w < 1) throw InvalidInputError("Tensor dims must be >= 1");
  }

  int batch() const { return n_; }
  int channels() const { return c_; }
  int height() const { return h_; }
  int width() const { return w_; }
  std::array<int, 4> shape() const { return {n_, c_, h_, w_}; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int n, int c, int y, int x) {
    return data_[((static_cast<std::size_t>(n) * c_ + c) * h_ + y) * w_ + x];
  }
  double at(int n, int c, int y, int x) const {
    return data_[((static_cast<std::size_t>(n) * c_ + c) * h_ + y) * w_ + x];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor& other) const {
    return n_ == other.n_ && c_ == other.c_ && h_ == other.h_ && w_ == other.w_;
  }

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.n_, t.c_, t.h_, t.w_); }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  // Copies channel c of sample n into a Grid.
  Grid channel_plane(int n, int c) const {
    Grid plane(w_, h_);
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) plane.at(x, y) = at(n, c, y, x);
    }
    return plane;
  }

  // Stacks single-channel planes of equal shape into a (1,C,H,W) tensor.
  static Tensor from_planes(const std::vector<Grid>& planes) {
    if (planes.empty()) throw InvalidInputError("Tensor::from_planes: no planes");
    const Grid& first = planes.front();
    Tensor t(1, static_cast<int>(planes.size()), first.height(), first.width());
    for (std::size_t c = 0; c < planes.size(); ++c) {
      if (!planes[c].same_shape(first)) throw ShapeError("Tensor::from_planes: shapes differ");
      for (int y = 0; y < first.height(); ++y) {
        for (int x = 0; x < first.width(); ++x) t.at(0, static_cast<int>(c), y, x) = planes[c].at(x, y);
      }
    }
    return t;
  }

 private:
  int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
  std::vector<double> data_;
};

}  // namespace handpose
