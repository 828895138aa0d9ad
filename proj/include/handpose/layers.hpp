#pragma once

#include <vector>

#include "handpose/tensor.hpp"

namespace handpose {

class Rng;

// Direct 2D convolution (cross-correlation). Weight layout (out, in, k, k).
struct Conv2D {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  int pad = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  static Conv2D make(int in_channels, int out_channels, int kernel, int stride, int pad);
  void init_uniform(Rng& rng);  // U(-a, a) with a = 1/sqrt(fan_in), zero bias

  int out_extent(int in_extent) const { return (in_extent + 2 * pad - kernel) / stride + 1; }
  Tensor forward(const Tensor& x) const;
  // Returns the input gradient and accumulates parameter gradients into grad.
  Tensor backward(const Tensor& x, const Tensor& grad_out, Conv2D& grad) const;

  double& w(int oc, int ic, int ky, int kx) {
    return weight[((static_cast<std::size_t>(oc) * in_channels + ic) * kernel + ky) * kernel + kx];
  }
  double w(int oc, int ic, int ky, int kx) const {
    return weight[((static_cast<std::size_t>(oc) * in_channels + ic) * kernel + ky) * kernel + kx];
  }
};

// Transposed convolution. Weight layout (in, out, k, k). With stride 1 and
// padding (k-1)/2 it keeps the resolution; with stride 2 and kernel 2 it
// exactly doubles it.
struct TConv2D {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  int pad = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  static TConv2D make(int in_channels, int out_channels, int kernel, int stride, int pad);
  void init_uniform(Rng& rng);

  int out_extent(int in_extent) const { return (in_extent - 1) * stride - 2 * pad + kernel; }
  Tensor forward(const Tensor& x) const;
  Tensor backward(const Tensor& x, const Tensor& grad_out, TConv2D& grad) const;

  double& w(int ic, int oc, int ky, int kx) {
    return weight[((static_cast<std::size_t>(ic) * out_channels + oc) * kernel + ky) * kernel + kx];
  }
  double w(int ic, int oc, int ky, int kx) const {
    return weight[((static_cast<std::size_t>(ic) * out_channels + oc) * kernel + ky) * kernel + kx];
  }
};

Tensor leaky_relu(const Tensor& x, double slope);
// pre is the pre-activation input that was fed to leaky_relu.
Tensor leaky_relu_backward(const Tensor& pre, const Tensor& grad_out, double slope);

Tensor sigmoid(const Tensor& x);
// y is the sigmoid output (not the input).
Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out);

}  // namespace handpose
