#include "handpose/net.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "handpose/error.hpp"
#include "handpose/rng.hpp"

namespace handpose {

void NetworkConfig::validate() const {
  // The network itself works for any head channel count; hand-specific joint
  // counts (20/21) are enforced where topology semantics matter.
  if (joint_count < 1) throw InvalidInputError("NetworkConfig: joint_count must be >= 1");
  if (input_resolution < 4 || input_resolution % 4 != 0) {
    throw InvalidInputError("NetworkConfig: input_resolution must be a positive multiple of 4");
  }
  if (image_channels < 1) throw InvalidInputError("NetworkConfig: image_channels must be >= 1");
  if (base_channels < 1) throw InvalidInputError("NetworkConfig: base_channels must be >= 1");
}

std::vector<ParamRef> parameter_arrays(NetworkParams& p) {
  std::vector<ParamRef> refs;
  auto add_conv = [&refs](const std::string& name, Conv2D& c) {
    refs.push_back({name + ".weight", &c.weight});
    refs.push_back({name + ".bias", &c.bias});
  };
  auto add_tconv = [&refs](const std::string& name, TConv2D& c) {
    refs.push_back({name + ".weight", &c.weight});
    refs.push_back({name + ".bias", &c.bias});
  };
  add_conv("stem", p.stem);
  add_conv("down1.conv1", p.down1.conv1);
  add_conv("down1.conv2", p.down1.conv2);
  add_conv("down1.skip", p.down1.skip);
  add_conv("down2.conv1", p.down2.conv1);
  add_conv("down2.conv2", p.down2.conv2);
  add_conv("down2.skip", p.down2.skip);
  add_tconv("up1.up", p.up1.up);
  add_conv("up1.conv2", p.up1.conv2);
  add_tconv("up1.skip", p.up1.skip);
  add_tconv("up2.up", p.up2.up);
  add_conv("up2.conv2", p.up2.conv2);
  add_tconv("up2.skip", p.up2.skip);
  add_tconv("final", p.final_up);
  for (int h = 0; h < kHeadCount; ++h) {
    add_conv("head" + std::to_string(h), p.heads[h]);
  }
  return refs;
}

namespace {

NetworkParams make_layers(const NetworkConfig& cfg) {
  cfg.validate();
  const int ci = cfg.input_channels();
  const int c = cfg.base_channels;
  const int k = cfg.joint_count;

  NetworkParams p;
  p.config = cfg;
  p.stem = Conv2D::make(ci, c, 3, 1, 1);
  p.down1 = {Conv2D::make(c, 2 * c, 3, 2, 1), Conv2D::make(2 * c, 2 * c, 3, 1, 1),
             Conv2D::make(c, 2 * c, 1, 2, 0)};
  p.down2 = {Conv2D::make(2 * c, 4 * c, 3, 2, 1), Conv2D::make(4 * c, 4 * c, 3, 1, 1),
             Conv2D::make(2 * c, 4 * c, 1, 2, 0)};
  p.up1 = {TConv2D::make(4 * c, 2 * c, 2, 2, 0), Conv2D::make(2 * c, 2 * c, 3, 1, 1),
           TConv2D::make(4 * c, 2 * c, 2, 2, 0)};
  p.up2 = {TConv2D::make(2 * c, c, 2, 2, 0), Conv2D::make(c, c, 3, 1, 1),
           TConv2D::make(2 * c, c, 2, 2, 0)};
  p.final_up = TConv2D::make(c, c, 3, 1, 1);
  const int head_in[kHeadCount] = {2 * c, 4 * c, 2 * c, c, c};
  for (int h = 0; h < kHeadCount; ++h) p.heads[h] = Conv2D::make(head_in[h], k, 1, 1, 0);
  return p;
}

}  // namespace

NetworkParams build_network(const NetworkConfig& cfg, std::uint64_t seed) {
  NetworkParams p = make_layers(cfg);
  Rng rng(seed);
  p.stem.init_uniform(rng);
  p.down1.conv1.init_uniform(rng);
  p.down1.conv2.init_uniform(rng);
  p.down1.skip.init_uniform(rng);
  p.down2.conv1.init_uniform(rng);
  p.down2.conv2.init_uniform(rng);
  p.down2.skip.init_uniform(rng);
  p.up1.up.init_uniform(rng);
  p.up1.conv2.init_uniform(rng);
  p.up1.skip.init_uniform(rng);
  p.up2.up.init_uniform(rng);
  p.up2.conv2.init_uniform(rng);
  p.up2.skip.init_uniform(rng);
  p.final_up.init_uniform(rng);
  // Heads start at zero so every output begins at sigmoid(0) = 0.5.
  return p;
}

NetworkParams zeros_like(const NetworkParams& like) { return make_layers(like.config); }

std::array<int, kHeadCount> head_resolutions(const NetworkConfig& cfg) {
  const int r = cfg.input_resolution;
  return {r / 2, r / 4, r / 2, r, r};
}

namespace {

Tensor down_block_forward(const DownBlock& block, const Tensor& x,
                          ForwardTrace::BlockTrace* t) {
  Tensor pre1 = block.conv1.forward(x);
  Tensor act1 = leaky_relu(pre1, kLeakySlope);
  Tensor sum = block.conv2.forward(act1);
  const Tensor skip = block.skip.forward(x);
  for (std::size_t i = 0; i < sum.size(); ++i) sum.data()[i] += skip.data()[i];
  Tensor out = leaky_relu(sum, kLeakySlope);
  if (t) {
    t->pre1 = std::move(pre1);
    t->act1 = std::move(act1);
    t->sum = std::move(sum);
    t->out = out;
  }
  return out;
}

Tensor up_block_forward(const UpBlock& block, const Tensor& x, ForwardTrace::BlockTrace* t) {
  Tensor pre1 = block.up.forward(x);
  Tensor act1 = leaky_relu(pre1, kLeakySlope);
  Tensor sum = block.conv2.forward(act1);
  const Tensor skip = block.skip.forward(x);
  for (std::size_t i = 0; i < sum.size(); ++i) sum.data()[i] += skip.data()[i];
  Tensor out = leaky_relu(sum, kLeakySlope);
  if (t) {
    t->pre1 = std::move(pre1);
    t->act1 = std::move(act1);
    t->sum = std::move(sum);
    t->out = out;
  }
  return out;
}

Tensor down_block_backward(const DownBlock& block, const Tensor& x,
                           const ForwardTrace::BlockTrace& t, const Tensor& grad_out,
                           DownBlock& grad) {
  const Tensor g_sum = leaky_relu_backward(t.sum, grad_out, kLeakySlope);
  const Tensor g_act1 = block.conv2.backward(t.act1, g_sum, grad.conv2);
  const Tensor g_pre1 = leaky_relu_backward(t.pre1, g_act1, kLeakySlope);
  Tensor g_x = block.conv1.backward(x, g_pre1, grad.conv1);
  const Tensor g_skip = block.skip.backward(x, g_sum, grad.skip);
  for (std::size_t i = 0; i < g_x.size(); ++i) g_x.data()[i] += g_skip.data()[i];
  return g_x;
}

Tensor up_block_backward(const UpBlock& block, const Tensor& x, const ForwardTrace::BlockTrace& t,
                         const Tensor& grad_out, UpBlock& grad) {
  const Tensor g_sum = leaky_relu_backward(t.sum, grad_out, kLeakySlope);
  const Tensor g_act1 = block.conv2.backward(t.act1, g_sum, grad.conv2);
  const Tensor g_pre1 = leaky_relu_backward(t.pre1, g_act1, kLeakySlope);
  Tensor g_x = block.up.backward(x, g_pre1, grad.up);
  const Tensor g_skip = block.skip.backward(x, g_sum, grad.skip);
  for (std::size_t i = 0; i < g_x.size(); ++i) g_x.data()[i] += g_skip.data()[i];
  return g_x;
}

void add_into(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += src.data()[i];
}

}  // namespace

std::array<Tensor, kHeadCount> forward(const NetworkParams& params, const Tensor& input,
                                       ForwardTrace* trace) {
  if (input.channels() != params.config.input_channels()) {
    throw ShapeError("forward: input has " + std::to_string(input.channels()) +
                     " channels, network expects " +
                     std::to_string(params.config.input_channels()));
  }
  if (input.height() != params.config.input_resolution ||
      input.width() != params.config.input_resolution) {
    throw ShapeError("forward: input resolution mismatch");
  }

  if (trace) trace->input = input;
  const Tensor stem_pre = params.stem.forward(input);
  const Tensor stem_out = leaky_relu(stem_pre, kLeakySlope);
  if (trace) {
    trace->stem_pre = stem_pre;
    trace->stem_out = stem_out;
  }

  const Tensor d1 = down_block_forward(params.down1, stem_out, trace ? &trace->down1 : nullptr);
  const Tensor d2 = down_block_forward(params.down2, d1, trace ? &trace->down2 : nullptr);
  const Tensor u1 = up_block_forward(params.up1, d2, trace ? &trace->up1 : nullptr);
  const Tensor u2 = up_block_forward(params.up2, u1, trace ? &trace->up2 : nullptr);
  const Tensor final_pre = params.final_up.forward(u2);
  const Tensor final_out = leaky_relu(final_pre, kLeakySlope);
  if (trace) {
    trace->final_pre = final_pre;
    trace->final_out = final_out;
  }

  const Tensor* taps[kHeadCount] = {&d1, &d2, &u1, &u2, &final_out};
  std::array<Tensor, kHeadCount> outputs;
  for (int h = 0; h < kHeadCount; ++h) {
    outputs[h] = sigmoid(params.heads[h].forward(*taps[h]));
    if (trace) trace->head_out[h] = outputs[h];
  }
  if (trace) trace->filled = true;
  return outputs;
}

NetworkParams backward(const NetworkParams& params, const ForwardTrace& trace,
                       const std::array<Tensor, kHeadCount>& head_gradients) {
  if (!trace.filled) throw InvalidInputError("backward: forward trace missing");
  for (int h = 0; h < kHeadCount; ++h) {
    if (!head_gradients[h].same_shape(trace.head_out[h])) {
      throw ShapeError("backward: head gradient shape mismatch at head " + std::to_string(h));
    }
  }

  NetworkParams grad = zeros_like(params);

  // Heads first: sigmoid, then the 1x1 convolution, landing on the trunk tap.
  const Tensor* taps[kHeadCount] = {&trace.down1.out, &trace.down2.out, &trace.up1.out,
                                    &trace.up2.out, &trace.final_out};
  std::array<Tensor, kHeadCount> tap_grads;
  for (int h = 0; h < kHeadCount; ++h) {
    const Tensor g = sigmoid_backward(trace.head_out[h], head_gradients[h]);
    tap_grads[h] = params.heads[h].backward(*taps[h], g, grad.heads[h]);
  }

  // Trunk, deepest stage first. Taps 3 and 4 both feed resolution r.
  const Tensor g_final_pre = leaky_relu_backward(trace.final_pre, tap_grads[4], kLeakySlope);
  Tensor g_u2 = params.final_up.backward(trace.up2.out, g_final_pre, grad.final_up);
  add_into(g_u2, tap_grads[3]);

  Tensor g_u1 = up_block_backward(params.up2, trace.up1.out, trace.up2, g_u2, grad.up2);
  add_into(g_u1, tap_grads[2]);

  Tensor g_d2 = up_block_backward(params.up1, trace.down2.out, trace.up1, g_u1, grad.up1);
  add_into(g_d2, tap_grads[1]);

  Tensor g_d1 = down_block_backward(params.down2, trace.down1.out, trace.down2, g_d2, grad.down2);
  add_into(g_d1, tap_grads[0]);

  const Tensor g_stem_out =
      down_block_backward(params.down1, trace.stem_out, trace.down1, g_d1, grad.down1);
  const Tensor g_stem_pre = leaky_relu_backward(trace.stem_pre, g_stem_out, kLeakySlope);
  params.stem.backward(trace.input, g_stem_pre, grad.stem);
  return grad;
}

namespace {

constexpr char kCheckpointMagic[] = "HANDPOSE-NET v1";

void write_doubles(std::ofstream& out, const std::vector<double>& values) {
  static_assert(sizeof(double) == 8);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double v : values) {
      char bytes[8];
      std::memcpy(bytes, &v, 8);
      for (int i = 7; i >= 0; --i) out.put(bytes[i]);
    }
  }
}

void read_doubles(std::ifstream& in, std::vector<double>& values) {
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double& v : values) {
      char bytes[8];
      for (int i = 7; i >= 0; --i) in.get(bytes[i]);
      std::memcpy(&v, bytes, 8);
    }
  }
  if (!in) throw FormatError("checkpoint: truncated parameter data");
}

}  // namespace

void save_checkpoint(const NetworkParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("checkpoint: cannot open for writing: " + path);

  NetworkParams& mutable_params = const_cast<NetworkParams&>(params);
  const std::vector<ParamRef> refs = parameter_arrays(mutable_params);

  const NetworkConfig& cfg = params.config;
  out << kCheckpointMagic << '\n';
  out << "image_channels " << cfg.image_channels << '\n';
  out << "use_skeleton " << (cfg.use_skeleton ? 1 : 0) << '\n';
  out << "base_channels " << cfg.base_channels << '\n';
  out << "joint_count " << cfg.joint_count << '\n';
  out << "input_resolution " << cfg.input_resolution << '\n';
  out << "params " << refs.size() << '\n';
  for (const ParamRef& ref : refs) {
    out << "param " << ref.name << ' ' << ref.values->size() << '\n';
  }
  out << "DATA\n";
  for (const ParamRef& ref : refs) write_doubles(out, *ref.values);
  if (!out) throw FormatError("checkpoint: write failed: " + path);
}

NetworkParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("checkpoint: cannot open: " + path);

  std::string line;
  if (!std::getline(in, line) || line != kCheckpointMagic) {
    throw FormatError("checkpoint: bad magic in " + path);
  }

  NetworkConfig cfg;
  auto read_field = [&in, &line](const std::string& key) -> long {
    if (!std::getline(in, line)) throw FormatError("checkpoint: truncated header");
    std::istringstream ss(line);
    std::string name;
    long value = 0;
    if (!(ss >> name >> value) || name != key) {
      throw FormatError("checkpoint: expected header field '" + key + "', got '" + line + "'");
    }
    return value;
  };
  cfg.image_channels = static_cast<int>(read_field("image_channels"));
  cfg.use_skeleton = read_field("use_skeleton") != 0;
  cfg.base_channels = static_cast<int>(read_field("base_channels"));
  cfg.joint_count = static_cast<int>(read_field("joint_count"));
  cfg.input_resolution = static_cast<int>(read_field("input_resolution"));
  const long param_count = read_field("params");

  NetworkParams params = make_layers(cfg);
  std::vector<ParamRef> refs = parameter_arrays(params);
  if (param_count != static_cast<long>(refs.size())) {
    throw FormatError("checkpoint: parameter count mismatch");
  }
  for (const ParamRef& ref : refs) {
    if (!std::getline(in, line)) throw FormatError("checkpoint: truncated header");
    std::istringstream ss(line);
    std::string keyword, name;
    std::size_t count = 0;
    if (!(ss >> keyword >> name >> count) || keyword != "param") {
      throw FormatError("checkpoint: malformed param line '" + line + "'");
    }
    if (name != ref.name || count != ref.values->size()) {
      throw FormatError("checkpoint: shape mismatch for '" + name + "': expected " +
                        std::to_string(ref.values->size()) + " values for " + ref.name +
                        ", header says " + std::to_string(count));
    }
  }
  if (!std::getline(in, line) || line != "DATA") {
    throw FormatError("checkpoint: missing DATA marker");
  }
  for (ParamRef& ref : refs) read_doubles(in, *ref.values);
  return params;
}

ScalePyramid heads_to_pyramid(const std::array<Tensor, kHeadCount>& head_outputs,
                              const std::vector<int>& head_indices,
                              const std::vector<double>& weights, int sample) {
  if (head_indices.size() != weights.size() || head_indices.empty()) {
    throw InvalidInputError("heads_to_pyramid: indices and weights must match and be non-empty");
  }
  ScalePyramid pyramid;
  pyramid.reserve(head_indices.size());
  for (std::size_t i = 0; i < head_indices.size(); ++i) {
    const int h = head_indices[i];
    if (h < 0 || h >= kHeadCount) throw InvalidInputError("heads_to_pyramid: bad head index");
    const Tensor& t = head_outputs[h];
    PyramidLevel level;
    level.weight = weights[i];
    level.maps.reserve(static_cast<std::size_t>(t.channels()));
    for (int c = 0; c < t.channels(); ++c) level.maps.push_back(t.channel_plane(sample, c));
    pyramid.push_back(std::move(level));
  }
  return pyramid;
}

}  // namespace handpose
