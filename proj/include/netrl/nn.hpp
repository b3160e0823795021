#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "netrl/rng.hpp"

// Dense feed-forward networks in double precision: forward pass with a
// replay tape, exact reverse-mode gradients, Adam updates, and soft target
// blending. Networks are plain values; copying one copies its parameters.

namespace netrl {

enum class Activation : std::uint8_t { identity = 0, relu = 1, softmax = 2 };

struct Layer {
  int in = 0;
  int out = 0;
  Activation act = Activation::identity;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;  // out
};

struct DenseNet {
  std::vector<Layer> layers;

  int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
};

inline bool same_shape(const DenseNet& a, const DenseNet& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].in != b.layers[i].in || a.layers[i].out != b.layers[i].out)
      return false;
  }
  return true;
}

// Hidden layers are He-uniform over [-sqrt(6/fan_in), sqrt(6/fan_in)] with
// zero bias. When final_init_scale > 0 the last layer's weights and biases
// are instead uniform in [-final_init_scale, final_init_scale] (keeps an
// actor's initial softmax near-uniform).
inline DenseNet make_net(std::span<const int> dims,
                         std::span<const Activation> acts, RngStream& rng,
                         double final_init_scale = 0.0) {
  if (dims.size() < 2 || acts.size() != dims.size() - 1)
    throw std::invalid_argument("make_net: need n+1 dims for n activations");
  DenseNet net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    if (dims[l] <= 0 || dims[l + 1] <= 0)
      throw std::invalid_argument("make_net: layer dims must be positive");
    Layer layer;
    layer.in = dims[l];
    layer.out = dims[l + 1];
    layer.act = acts[l];
    layer.w.resize(static_cast<std::size_t>(layer.out) * layer.in);
    layer.b.assign(static_cast<std::size_t>(layer.out), 0.0);
    const bool last = l + 2 == dims.size();
    if (last && final_init_scale > 0.0) {
      for (double& v : layer.w) v = rng.uniform(-final_init_scale, final_init_scale);
      for (double& v : layer.b) v = rng.uniform(-final_init_scale, final_init_scale);
    } else {
      double limit = std::sqrt(6.0 / layer.in);
      for (double& v : layer.w) v = rng.uniform(-limit, limit);
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

// Max-shifted softmax; finite for logits of any magnitude.
inline void softmax_inplace(std::vector<double>& z) {
  double mx = z[0];
  for (double v : z) mx = std::max(mx, v);
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

struct Tape {
  // Per layer: the layer's input and its post-activation output.
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> outputs;
};

inline std::vector<double> forward(const DenseNet& net,
                                   std::span<const double> input,
                                   Tape* tape = nullptr) {
  if (static_cast<int>(input.size()) != net.input_dim())
    throw std::invalid_argument("forward: input size " +
                                std::to_string(input.size()) + " != " +
                                std::to_string(net.input_dim()));
  if (tape) {
    tape->inputs.clear();
    tape->outputs.clear();
  }
  std::vector<double> x(input.begin(), input.end());
  for (const Layer& layer : net.layers) {
    std::vector<double> z(layer.out);
    for (int o = 0; o < layer.out; ++o) {
      const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
      double acc = layer.b[o];
      for (int i = 0; i < layer.in; ++i) acc += row[i] * x[i];
      z[o] = acc;
    }
    switch (layer.act) {
      case Activation::identity:
        break;
      case Activation::relu:
        for (double& v : z) v = v > 0.0 ? v : 0.0;
        break;
      case Activation::softmax:
        softmax_inplace(z);
        break;
    }
    if (tape) {
      tape->inputs.push_back(std::move(x));
      tape->outputs.push_back(z);
    }
    x = std::move(z);
  }
  return x;
}

struct Gradients {
  struct LayerGrad {
    std::vector<double> w;
    std::vector<double> b;
  };
  std::vector<LayerGrad> layers;

  static Gradients zeros_like(const DenseNet& net) {
    Gradients g;
    g.layers.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      g.layers[l].w.assign(net.layers[l].w.size(), 0.0);
      g.layers[l].b.assign(net.layers[l].b.size(), 0.0);
    }
    return g;
  }

  void clear() {
    for (auto& lg : layers) {
      std::fill(lg.w.begin(), lg.w.end(), 0.0);
      std::fill(lg.b.begin(), lg.b.end(), 0.0);
    }
  }
};

// Reverse-mode gradients of <output, out_grad> w.r.t. parameters and input.
// Parameter gradients are ACCUMULATED into `grads` (callers zero or reuse
// across a batch); the input gradient is returned.
inline std::vector<double> backward(const DenseNet& net, const Tape& tape,
                                    std::span<const double> out_grad,
                                    Gradients& grads) {
  if (tape.inputs.size() != net.layers.size())
    throw std::invalid_argument("backward: tape does not match network");
  if (static_cast<int>(out_grad.size()) != net.output_dim())
    throw std::invalid_argument("backward: out_grad size mismatch");
  if (grads.layers.size() != net.layers.size())
    throw std::invalid_argument("backward: gradient shape mismatch");

  std::vector<double> g(out_grad.begin(), out_grad.end());
  for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
    const Layer& layer = net.layers[l];
    const auto& x = tape.inputs[l];
    const auto& y = tape.outputs[l];
    // d<loss>/d(pre-activation)
    std::vector<double> gz(layer.out);
    switch (layer.act) {
      case Activation::identity:
        gz.assign(g.begin(), g.end());
        break;
      case Activation::relu:
        for (int o = 0; o < layer.out; ++o) gz[o] = y[o] > 0.0 ? g[o] : 0.0;
        break;
      case Activation::softmax: {
        double dot = 0.0;
        for (int o = 0; o < layer.out; ++o) dot += g[o] * y[o];
        for (int o = 0; o < layer.out; ++o) gz[o] = y[o] * (g[o] - dot);
        break;
      }
    }
    Gradients::LayerGrad& lg = grads.layers[l];
    for (int o = 0; o < layer.out; ++o) {
      const double go = gz[o];
      double* wrow = lg.w.data() + static_cast<std::size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) wrow[i] += go * x[i];
      lg.b[o] += go;
    }
    std::vector<double> gx(layer.in, 0.0);
    for (int o = 0; o < layer.out; ++o) {
      const double go = gz[o];
      const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) gx[i] += row[i] * go;
    }
    g = std::move(gx);
  }
  return g;
}

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  Gradients m;
  Gradients v;

  static AdamState init(const DenseNet& net, double lr) {
    AdamState s;
    s.lr = lr;
    s.m = Gradients::zeros_like(net);
    s.v = Gradients::zeros_like(net);
    return s;
  }
};

inline void adam_step(DenseNet& net, const Gradients& grads, AdamState& adam) {
  if (grads.layers.size() != net.layers.size() ||
      adam.m.layers.size() != net.layers.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  adam.step += 1;
  const double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.step));
  const double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.step));
  auto update = [&](double& p, double g, double& m, double& v) {
    m = adam.beta1 * m + (1.0 - adam.beta1) * g;
    v = adam.beta2 * v + (1.0 - adam.beta2) * g * g;
    p -= adam.lr * (m / bc1) / (std::sqrt(v / bc2) + adam.eps);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Layer& layer = net.layers[l];
    const auto& lg = grads.layers[l];
    auto& lm = adam.m.layers[l];
    auto& lv = adam.v.layers[l];
    for (std::size_t i = 0; i < layer.w.size(); ++i)
      update(layer.w[i], lg.w[i], lm.w[i], lv.w[i]);
    for (std::size_t i = 0; i < layer.b.size(); ++i)
      update(layer.b[i], lg.b[i], lm.b[i], lv.b[i]);
  }
}

// target <- tau * online + (1 - tau) * target, elementwise.
inline void soft_update(DenseNet& target, const DenseNet& online, double tau) {
  if (!same_shape(target, online))
    throw std::invalid_argument("soft_update: shape mismatch");
  if (tau < 0.0 || tau > 1.0)
    throw std::invalid_argument("soft_update: tau outside [0,1]");
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    Layer& t = target.layers[l];
    const Layer& o = online.layers[l];
    for (std::size_t i = 0; i < t.w.size(); ++i)
      t.w[i] = tau * o.w[i] + (1.0 - tau) * t.w[i];
    for (std::size_t i = 0; i < t.b.size(); ++i)
      t.b[i] = tau * o.b[i] + (1.0 - tau) * t.b[i];
  }
}

// --- serialization -------------------------------------------------------
//
// Flat little-endian layout, identical bytes <=> identical network:
//   u32 layer_count
//   per layer: u32 in, u32 out, u8 activation code
//   per layer: weights row-major then biases, each double as u64 LE
// AdamState appends lr/beta1/beta2/eps as doubles, step as u64, then the
// first- and second-moment tensors in the same order as the parameters.

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

inline void put_f64(std::ostream& os, double d) {
  put_u64(os, std::bit_cast<std::uint64_t>(d));
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  if (!is) throw std::runtime_error("truncated network data");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  if (!is) throw std::runtime_error("truncated network data");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& is) {
  return std::bit_cast<double>(get_u64(is));
}

}  // namespace detail

inline void save_net(std::ostream& os, const DenseNet& net) {
  detail::put_u32(os, static_cast<std::uint32_t>(net.layers.size()));
  for (const Layer& l : net.layers) {
    detail::put_u32(os, static_cast<std::uint32_t>(l.in));
    detail::put_u32(os, static_cast<std::uint32_t>(l.out));
    os.put(static_cast<char>(l.act));
  }
  for (const Layer& l : net.layers) {
    for (double v : l.w) detail::put_f64(os, v);
    for (double v : l.b) detail::put_f64(os, v);
  }
}

inline DenseNet load_net(std::istream& is) {
  DenseNet net;
  std::uint32_t n = detail::get_u32(is);
  if (n > 1024) throw std::runtime_error("implausible layer count");
  net.layers.resize(n);
  for (Layer& l : net.layers) {
    l.in = static_cast<int>(detail::get_u32(is));
    l.out = static_cast<int>(detail::get_u32(is));
    int code = is.get();
    if (code < 0 || code > 2) throw std::runtime_error("bad activation code");
    l.act = static_cast<Activation>(code);
    if (l.in <= 0 || l.out <= 0) throw std::runtime_error("bad layer dims");
  }
  for (Layer& l : net.layers) {
    l.w.resize(static_cast<std::size_t>(l.out) * l.in);
    l.b.resize(static_cast<std::size_t>(l.out));
    for (double& v : l.w) v = detail::get_f64(is);
    for (double& v : l.b) v = detail::get_f64(is);
  }
  return net;
}

inline void save_adam(std::ostream& os, const AdamState& adam) {
  detail::put_f64(os, adam.lr);
  detail::put_f64(os, adam.beta1);
  detail::put_f64(os, adam.beta2);
  detail::put_f64(os, adam.eps);
  detail::put_u64(os, static_cast<std::uint64_t>(adam.step));
  for (const Gradients* g : {&adam.m, &adam.v})
    for (const auto& lg : g->layers) {
      for (double v : lg.w) detail::put_f64(os, v);
      for (double v : lg.b) detail::put_f64(os, v);
    }
}

inline AdamState load_adam(std::istream& is, const DenseNet& net) {
  AdamState adam = AdamState::init(net, 1e-3);
  adam.lr = detail::get_f64(is);
  adam.beta1 = detail::get_f64(is);
  adam.beta2 = detail::get_f64(is);
  adam.eps = detail::get_f64(is);
  adam.step = static_cast<long>(detail::get_u64(is));
  for (Gradients* g : {&adam.m, &adam.v})
    for (auto& lg : g->layers) {
      for (double& v : lg.w) v = detail::get_f64(is);
      for (double& v : lg.b) v = detail::get_f64(is);
    }
  return adam;
}

}  // namespace netrl
