#include "handpose/layers.hpp"

#include <cmath>

#include "handpose/error.hpp"
#include "handpose/rng.hpp"

namespace handpose {

Conv2D Conv2D::make(int in_channels, int out_channels, int kernel, int stride, int pad) {
  Conv2D conv;
  conv.in_channels = in_channels;
  conv.out_channels = out_channels;
  conv.kernel = kernel;
  conv.stride = stride;
  conv.pad = pad;
  conv.weight.assign(static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel, 0.0);
  conv.bias.assign(static_cast<std::size_t>(out_channels), 0.0);
  return conv;
}

void Conv2D::init_uniform(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels) * kernel * kernel);
  for (double& v : weight) v = rng.uniform(-bound, bound);
  for (double& v : bias) v = 0.0;
}

Tensor Conv2D::forward(const Tensor& x) const {
  if (x.channels() != in_channels) throw ShapeError("Conv2D: input channel mismatch");
  const int oh = out_extent(x.height());
  const int ow = out_extent(x.width());
  Tensor out(x.batch(), out_channels, oh, ow);
  for (int n = 0; n < x.batch(); ++n) {
    for (int oc = 0; oc < out_channels; ++oc) {
      for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) {
          double acc = bias[oc];
          for (int ic = 0; ic < in_channels; ++ic) {
            for (int ky = 0; ky < kernel; ++ky) {
              const int sy = i * stride + ky - pad;
              if (sy < 0 || sy >= x.height()) continue;
              for (int kx = 0; kx < kernel; ++kx) {
                const int sx = j * stride + kx - pad;
                if (sx < 0 || sx >= x.width()) continue;
                acc += x.at(n, ic, sy, sx) * w(oc, ic, ky, kx);
              }
            }
          }
          out.at(n, oc, i, j) = acc;
        }
      }
    }
  }
  return out;
}

Tensor Conv2D::backward(const Tensor& x, const Tensor& grad_out, Conv2D& grad) const {
  Tensor grad_in = Tensor::zeros_like(x);
  for (int n = 0; n < x.batch(); ++n) {
    for (int oc = 0; oc < out_channels; ++oc) {
      for (int i = 0; i < grad_out.height(); ++i) {
        for (int j = 0; j < grad_out.width(); ++j) {
          const double g = grad_out.at(n, oc, i, j);
          if (g == 0.0) continue;
          grad.bias[oc] += g;
          for (int ic = 0; ic < in_channels; ++ic) {
            for (int ky = 0; ky < kernel; ++ky) {
              const int sy = i * stride + ky - pad;
              if (sy < 0 || sy >= x.height()) continue;
              for (int kx = 0; kx < kernel; ++kx) {
                const int sx = j * stride + kx - pad;
                if (sx < 0 || sx >= x.width()) continue;
                grad.w(oc, ic, ky, kx) += x.at(n, ic, sy, sx) * g;
                grad_in.at(n, ic, sy, sx) += w(oc, ic, ky, kx) * g;
              }
            }
          }
        }
      }
    }
  }
  return grad_in;
}

TConv2D TConv2D::make(int in_channels, int out_channels, int kernel, int stride, int pad) {
  TConv2D conv;
  conv.in_channels = in_channels;
  conv.out_channels = out_channels;
  conv.kernel = kernel;
  conv.stride = stride;
  conv.pad = pad;
  conv.weight.assign(static_cast<std::size_t>(in_channels) * out_channels * kernel * kernel, 0.0);
  conv.bias.assign(static_cast<std::size_t>(out_channels), 0.0);
  return conv;
}

void TConv2D::init_uniform(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels) * kernel * kernel);
  for (double& v : weight) v = rng.uniform(-bound, bound);
  for (double& v : bias) v = 0.0;
}

Tensor TConv2D::forward(const Tensor& x) const {
  if (x.channels() != in_channels) throw ShapeError("TConv2D: input channel mismatch");
  const int oh = out_extent(x.height());
  const int ow = out_extent(x.width());
  Tensor out(x.batch(), out_channels, oh, ow);
  for (int n = 0; n < x.batch(); ++n) {
    for (int oc = 0; oc < out_channels; ++oc) {
      for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) out.at(n, oc, i, j) = bias[oc];
      }
    }
    for (int ic = 0; ic < in_channels; ++ic) {
      for (int i = 0; i < x.height(); ++i) {
        for (int j = 0; j < x.width(); ++j) {
          const double v = x.at(n, ic, i, j);
          if (v == 0.0) continue;
          for (int oc = 0; oc < out_channels; ++oc) {
            for (int ky = 0; ky < kernel; ++ky) {
              const int oy = i * stride + ky - pad;
              if (oy < 0 || oy >= oh) continue;
              for (int kx = 0; kx < kernel; ++kx) {
                const int ox = j * stride + kx - pad;
                if (ox < 0 || ox >= ow) continue;
                out.at(n, oc, oy, ox) += v * w(ic, oc, ky, kx);
              }
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor TConv2D::backward(const Tensor& x, const Tensor& grad_out, TConv2D& grad) const {
  Tensor grad_in = Tensor::zeros_like(x);
  const int oh = grad_out.height();
  const int ow = grad_out.width();
  for (int n = 0; n < x.batch(); ++n) {
    for (int oc = 0; oc < out_channels; ++oc) {
      for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) grad.bias[oc] += grad_out.at(n, oc, i, j);
      }
    }
    for (int ic = 0; ic < in_channels; ++ic) {
      for (int i = 0; i < x.height(); ++i) {
        for (int j = 0; j < x.width(); ++j) {
          const double v = x.at(n, ic, i, j);
          double acc = 0.0;
          for (int oc = 0; oc < out_channels; ++oc) {
            for (int ky = 0; ky < kernel; ++ky) {
              const int oy = i * stride + ky - pad;
              if (oy < 0 || oy >= oh) continue;
              for (int kx = 0; kx < kernel; ++kx) {
                const int ox = j * stride + kx - pad;
                if (ox < 0 || ox >= ow) continue;
                const double g = grad_out.at(n, oc, oy, ox);
                acc += w(ic, oc, ky, kx) * g;
                grad.w(ic, oc, ky, kx) += v * g;
              }
            }
          }
          grad_in.at(n, ic, i, j) = acc;
        }
      }
    }
  }
  return grad_in;
}

Tensor leaky_relu(const Tensor& x, double slope) {
  Tensor out = x;
  for (double& v : out.data()) {
    if (v < 0.0) v *= slope;
  }
  return out;
}

Tensor leaky_relu_backward(const Tensor& pre, const Tensor& grad_out, double slope) {
  Tensor grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.size(); ++i) {
    if (pre.data()[i] <= 0.0) grad_in.data()[i] *= slope;
  }
  return grad_in;
}

Tensor sigmoid(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.data()) v = 1.0 / (1.0 + std::exp(-v));
  return out;
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out) {
  Tensor grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.size(); ++i) {
    const double s = y.data()[i];
    grad_in.data()[i] *= s * (1.0 - s);
  }
  return grad_in;
}

}  // namespace handpose
