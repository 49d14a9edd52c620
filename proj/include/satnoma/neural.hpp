#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "satnoma/rng.hpp"

namespace satnoma {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

enum class Activation { identity, relu, sigmoid, tanh_ };

struct DenseLayer {
  int in = 0, out = 0;
  std::vector<double> w;  // row-major [out][in]
  std::vector<double> b;
  Activation act = Activation::identity;
};

// Plain fully-connected net, double precision throughout. All powers of the
// training engine (forward, exact reverse-mode gradients, Adam) live on this
// struct; there is no autograd graph, just the fixed layer chain.
struct DenseNet {
  std::vector<int> sizes;          // layer widths, input first
  std::vector<DenseLayer> layers;

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }

  // weights and biases uniform in +-1/sqrt(fan_in), drawn row-major then bias
  static DenseNet make(const std::vector<int>& sizes,
                       const std::vector<Activation>& acts, Rng& rng) {
    if (sizes.size() < 2) throw std::invalid_argument("DenseNet: need >= 2 layer sizes");
    if (acts.size() != sizes.size() - 1)
      throw std::invalid_argument("DenseNet: one activation per layer required");
    DenseNet net;
    net.sizes = sizes;
    net.layers.resize(sizes.size() - 1);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      DenseLayer& lay = net.layers[l];
      lay.in = sizes[l];
      lay.out = sizes[l + 1];
      lay.act = acts[l];
      lay.w.resize(static_cast<std::size_t>(lay.out) * lay.in);
      lay.b.resize(lay.out);
      const double r = 1.0 / std::sqrt(static_cast<double>(lay.in));
      for (double& v : lay.w) v = rng.uniform(-r, r);
      for (double& v : lay.b) v = rng.uniform(-r, r);
    }
    return net;
  }
};

namespace detail {

inline double activate(Activation a, double z) {
  switch (a) {
    case Activation::identity: return z;
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::tanh_: return std::tanh(z);
  }
  return z;
}

// derivative expressed through the *post*-activation value where possible
inline double activate_grad(Activation a, double z, double out) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: return out * (1.0 - out);
    case Activation::tanh_: return 1.0 - out * out;
  }
  return 1.0;
}

}  // namespace detail

// Reused activation storage for one forward/backward pair; keeping it outside
// the net lets hot loops run without allocations.
struct FwdCache {
  std::vector<std::vector<double>> z;  // pre-activations per layer
  std::vector<std::vector<double>> a;  // a[0] = input, a[l+1] = layer l output
};

inline void forward_cached(const DenseNet& net, const std::vector<double>& x,
                           FwdCache& c) {
  if (static_cast<int>(x.size()) != net.input_dim())
    throw std::invalid_argument("forward: input size mismatch");
  const std::size_t nl = net.layers.size();
  c.z.resize(nl);
  c.a.resize(nl + 1);
  c.a[0] = x;
  for (std::size_t l = 0; l < nl; ++l) {
    const DenseLayer& lay = net.layers[l];
    c.z[l].resize(lay.out);
    c.a[l + 1].resize(lay.out);
    const double* __restrict in = c.a[l].data();
    const double* __restrict w = lay.w.data();
    const int n = lay.in;
    for (int o = 0; o < lay.out; ++o) {
      const double* __restrict row = w + static_cast<std::size_t>(o) * n;
      // four independent partial sums break the FMA latency chain; the
      // summation order is fixed, so results stay run-to-run identical
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
      int i = 0;
      for (; i + 4 <= n; i += 4) {
        s0 += row[i] * in[i];
        s1 += row[i + 1] * in[i + 1];
        s2 += row[i + 2] * in[i + 2];
        s3 += row[i + 3] * in[i + 3];
      }
      double acc = lay.b[o] + ((s0 + s1) + (s2 + s3));
      for (; i < n; ++i) acc += row[i] * in[i];
      c.z[l][o] = acc;
      c.a[l + 1][o] = detail::activate(lay.act, acc);
    }
  }
}

inline std::vector<double> forward(const DenseNet& net, const std::vector<double>& x) {
  FwdCache c;
  forward_cached(net, x, c);
  return c.a.back();
}

// Parameter gradients, same shapes as the net. Backward passes accumulate
// (+=) so minibatch items can be summed in place.
struct NetGrads {
  std::vector<std::vector<double>> dw;
  std::vector<std::vector<double>> db;

  explicit NetGrads(const DenseNet& net) {
    dw.resize(net.layers.size());
    db.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      dw[l].assign(net.layers[l].w.size(), 0.0);
      db[l].assign(net.layers[l].b.size(), 0.0);
    }
  }

  void zero() {
    for (auto& v : dw) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : db) std::fill(v.begin(), v.end(), 0.0);
  }
};

// Ping-pong buffers for the reverse sweep; reuse one instance across calls to
// keep the training hot loop allocation-free.
struct BwdScratch {
  std::vector<double> delta, prev;
};

// Exact reverse-mode sweep for the cached forward pass. `upstream` is
// dL/d(output). Either output can be skipped: grads == nullptr omits the
// parameter gradients (used when only dL/d(input) is needed, e.g. the critic
// action gradient), input_grad == nullptr omits the input sensitivity.
inline void backward(const DenseNet& net, const FwdCache& c,
                     const std::vector<double>& upstream, NetGrads* grads,
                     std::vector<double>* input_grad,
                     BwdScratch* scratch = nullptr) {
  if (static_cast<int>(upstream.size()) != net.output_dim())
    throw std::invalid_argument("backward: upstream size mismatch");
  BwdScratch local;
  BwdScratch& ws = scratch ? *scratch : local;
  ws.delta.assign(upstream.begin(), upstream.end());

  for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
    const DenseLayer& lay = net.layers[l];
    double* __restrict delta = ws.delta.data();
    // fold the activation derivative into delta
    for (int o = 0; o < lay.out; ++o)
      delta[o] *= detail::activate_grad(lay.act, c.z[l][o], c.a[l + 1][o]);

    if (grads) {
      const double* __restrict in = c.a[l].data();
      double* __restrict dw = grads->dw[l].data();
      double* __restrict db = grads->db[l].data();
      for (int o = 0; o < lay.out; ++o) {
        const double d = delta[o];
        double* __restrict row = dw + static_cast<std::size_t>(o) * lay.in;
        for (int i = 0; i < lay.in; ++i) row[i] += d * in[i];
        db[o] += d;
      }
    }

    const bool need_prev = l > 0 || input_grad != nullptr;
    if (!need_prev) return;
    ws.prev.assign(lay.in, 0.0);
    double* __restrict prev = ws.prev.data();
    const double* __restrict w = lay.w.data();
    for (int o = 0; o < lay.out; ++o) {
      const double d = delta[o];
      const double* __restrict row = w + static_cast<std::size_t>(o) * lay.in;
      for (int i = 0; i < lay.in; ++i) prev[i] += d * row[i];
    }
    if (l == 0) {
      if (input_grad) *input_grad = ws.prev;
      return;
    }
    std::swap(ws.delta, ws.prev);
  }
}

inline double grad_norm(const NetGrads& g) {
  double s = 0.0;
  for (const auto& v : g.dw)
    for (double x : v) s += x * x;
  for (const auto& v : g.db)
    for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Global-norm gradient clipping: rescales everything when the joint norm
// exceeds the ceiling.
inline void clip_grad_norm(NetGrads& g, double max_norm) {
  const double n = grad_norm(g);
  if (n <= max_norm || n == 0.0) return;
  const double s = max_norm / n;
  for (auto& v : g.dw)
    for (double& x : v) x *= s;
  for (auto& v : g.db)
    for (double& x : v) x *= s;
}

// Adam with bias correction (beta1 0.9, beta2 0.999, eps 1e-8).
struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long t = 0;
  std::vector<std::vector<double>> mw, vw, mb, vb;

  AdamState() = default;
  AdamState(const DenseNet& net, double lr_in) : lr(lr_in) {
    mw.resize(net.layers.size());
    vw.resize(net.layers.size());
    mb.resize(net.layers.size());
    vb.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      mw[l].assign(net.layers[l].w.size(), 0.0);
      vw[l].assign(net.layers[l].w.size(), 0.0);
      mb[l].assign(net.layers[l].b.size(), 0.0);
      vb[l].assign(net.layers[l].b.size(), 0.0);
    }
  }
};

inline void adam_step(DenseNet& net, const NetGrads& g, AdamState& s) {
  s.t += 1;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  auto update = [&](std::vector<double>& p, const std::vector<double>& grad,
                    std::vector<double>& m, std::vector<double>& v) {
    double* __restrict pp = p.data();
    const double* __restrict gp = grad.data();
    double* __restrict mp = m.data();
    double* __restrict vp = v.data();
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
      mp[i] = s.beta1 * mp[i] + (1.0 - s.beta1) * gp[i];
      vp[i] = s.beta2 * vp[i] + (1.0 - s.beta2) * gp[i] * gp[i];
      const double mhat = mp[i] / c1;
      const double vhat = vp[i] / c2;
      pp[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
    }
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    update(net.layers[l].w, g.dw[l], s.mw[l], s.vw[l]);
    update(net.layers[l].b, g.db[l], s.mb[l], s.vb[l]);
  }
}

// target <- tau * online + (1 - tau) * target, elementwise
inline void soft_update(DenseNet& target, const DenseNet& online, double tau) {
  if (target.sizes != online.sizes)
    throw std::invalid_argument("soft_update: mismatched architectures");
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    auto blend = [tau](std::vector<double>& t, const std::vector<double>& o) {
      for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = tau * o[i] + (1.0 - tau) * t[i];
    };
    blend(target.layers[l].w, online.layers[l].w);
    blend(target.layers[l].b, online.layers[l].b);
  }
}

inline bool all_finite(const DenseNet& net) {
  for (const auto& l : net.layers) {
    for (double v : l.w)
      if (!std::isfinite(v)) return false;
    for (double v : l.b)
      if (!std::isfinite(v)) return false;
  }
  return true;
}

// ---- checkpoint format ------------------------------------------------------
// Flat little-endian binary: u32 layer-size count, u32 sizes..., then per
// layer the row-major weights followed by the biases as f64. Activations are
// part of the constructing code, not the file; load verifies sizes only.

inline void save_net(const DenseNet& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_net: cannot open " + path);
  const uint32_t n = static_cast<uint32_t>(net.sizes.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (int s : net.sizes) {
    const uint32_t v = static_cast<uint32_t>(s);
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  for (const auto& l : net.layers) {
    out.write(reinterpret_cast<const char*>(l.w.data()),
              static_cast<std::streamsize>(l.w.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(l.b.data()),
              static_cast<std::streamsize>(l.b.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("save_net: write failed for " + path);
}

inline void load_net(DenseNet& net, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_net: cannot open " + path);
  uint32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || n != net.sizes.size())
    throw std::runtime_error("load_net: layer count mismatch in " + path);
  for (std::size_t i = 0; i < n; ++i) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in || static_cast<int>(v) != net.sizes[i])
      throw std::runtime_error("load_net: layer size mismatch in " + path);
  }
  for (auto& l : net.layers) {
    in.read(reinterpret_cast<char*>(l.w.data()),
            static_cast<std::streamsize>(l.w.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(l.b.data()),
            static_cast<std::streamsize>(l.b.size() * sizeof(double)));
  }
  if (!in) throw std::runtime_error("load_net: truncated file " + path);
}

}  // namespace satnoma
