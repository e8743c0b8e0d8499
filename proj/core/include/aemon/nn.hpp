#pragma once

// Minimal dense/conv1d neural substrate: parameter containers, cached
// forward passes, reverse-mode gradients and the Adam optimizer. Sized
// for small fully connected autoencoders; no graph engine, no implicit
// broadcasting — shapes must match exactly or the call throws.
//
// Everything is templated on the scalar type. Production code uses
// float storage; reductions always accumulate in double.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "aemon/errors.hpp"

namespace aemon::nn {

enum class Activation { Identity, Selu };

inline constexpr double kSeluLambda = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

template <class T>
inline T selu(T x) {
  if (x > T(0)) return T(kSeluLambda) * x;
  return T(kSeluLambda * kSeluAlpha) * (std::exp(x) - T(1));
}

// Derivative with respect to the preactivation.
template <class T>
inline T selu_grad(T x) {
  if (x > T(0)) return T(kSeluLambda);
  return T(kSeluLambda * kSeluAlpha) * std::exp(x);
}

template <class T>
std::vector<T> selu(const std::vector<T>& x) {
  std::vector<T> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = selu(x[i]);
  return y;
}

template <class T>
inline T activate(Activation a, T pre) {
  return a == Activation::Selu ? selu(pre) : pre;
}

template <class T>
inline T activate_grad(Activation a, T pre) {
  return a == Activation::Selu ? selu_grad(pre) : T(1);
}

// Deterministic RNG with a pinned implementation (splitmix64 core), so
// the same seed produces the same stream on every platform and stdlib.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; one spare value is cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1], keeps log() finite
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t uniform_int(uint64_t n) {
    if (n == 0) throw InputError("uniform_int: n must be > 0");
    uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Fisher-Yates; std::shuffle is implementation-defined, this is not.
  template <class V>
  void shuffle(V& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = size_t(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent stream from (seed, stream id).
  static uint64_t mix(uint64_t seed, uint64_t stream) {
    Rng r(seed ^ (0xA0761D6478BD642Full + stream * 0xE7037ED1A0B428DBull));
    return r.next_u64();
  }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Named view of one parameter blob; tape/optimizer slots align by index.
template <class T>
struct ParamRef {
  std::string name;
  std::vector<T>* values = nullptr;
};

template <class T>
struct GradientTape {
  std::vector<std::string> names;
  std::vector<std::vector<T>> slots;

  void zero() {
    for (auto& s : slots) std::fill(s.begin(), s.end(), T(0));
  }
};

template <class T>
GradientTape<T> make_tape(const std::vector<ParamRef<T>>& params) {
  GradientTape<T> tape;
  tape.names.reserve(params.size());
  tape.slots.reserve(params.size());
  for (const auto& p : params) {
    tape.names.push_back(p.name);
    tape.slots.emplace_back(p.values->size(), T(0));
  }
  return tape;
}

template <class T>
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<std::vector<T>> m, v;
};

template <class T>
AdamState<T> make_adam(const std::vector<ParamRef<T>>& params, double lr = 1e-3) {
  AdamState<T> st;
  st.lr = lr;
  for (const auto& p : params) {
    st.m.emplace_back(p.values->size(), T(0));
    st.v.emplace_back(p.values->size(), T(0));
  }
  return st;
}

// Canonical Adam update with bias correction. Moments are stored in the
// parameter precision; the per-element update is computed in double.
template <class T>
void adam_step(const std::vector<ParamRef<T>>& params, const GradientTape<T>& tape,
               AdamState<T>& st) {
  if (params.size() != tape.slots.size() || params.size() != st.m.size())
    throw StateError("adam_step: tape/state slot count does not match parameters");
  st.step += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, double(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, double(st.step));
  for (size_t s = 0; s < params.size(); ++s) {
    auto& p = *params[s].values;
    const auto& g = tape.slots[s];
    auto& m = st.m[s];
    auto& v = st.v[s];
    if (p.size() != g.size() || p.size() != m.size())
      throw StateError("adam_step: shape mismatch in slot " + params[s].name);
    for (size_t j = 0; j < p.size(); ++j) {
      double gj = double(g[j]);
      double mj = st.beta1 * double(m[j]) + (1.0 - st.beta1) * gj;
      double vj = st.beta2 * double(v[j]) + (1.0 - st.beta2) * gj * gj;
      m[j] = T(mj);
      v[j] = T(vj);
      double update = st.lr * (mj / bc1) / (std::sqrt(vj / bc2) + st.eps);
      p[j] = T(double(p[j]) - update);
    }
  }
}

// Fully connected layer, weights row-major [out x in].
template <class T>
struct Dense {
  int in = 0;
  int out = 0;
  Activation act = Activation::Identity;
  std::vector<T> w;  // [out * in]
  std::vector<T> b;  // [out]

  struct Cache {
    std::vector<T> x;
    std::vector<T> pre;
    bool valid = false;
  };

  Dense() = default;
  Dense(int in_, int out_, Activation act_)
      : in(in_), out(out_), act(act_), w(size_t(in_) * out_, T(0)), b(out_, T(0)) {}

  // LeCun normal: weight std 1/sqrt(fan_in), zero bias.
  void init_lecun(Rng& rng) {
    double std_dev = 1.0 / std::sqrt(double(in));
    for (auto& wij : w) wij = T(rng.gaussian() * std_dev);
    std::fill(b.begin(), b.end(), T(0));
  }

  std::vector<T> forward(const std::vector<T>& x, Cache* cache = nullptr) const {
    if (int(x.size()) != in)
      throw InputError("dense forward: input length " + std::to_string(x.size()) +
                       " != layer width " + std::to_string(in));
    std::vector<T> pre(out);
    for (int o = 0; o < out; ++o) {
      const T* row = w.data() + size_t(o) * in;
      double acc = double(b[o]);
      for (int i = 0; i < in; ++i) acc += double(row[i]) * double(x[i]);
      pre[o] = T(acc);
    }
    std::vector<T> y(out);
    for (int o = 0; o < out; ++o) y[o] = activate(act, pre[o]);
    if (cache) {
      cache->x = x;
      cache->pre = pre;
      cache->valid = true;
    }
    return y;
  }

  // dy = dL/d(output). Accumulates into gw/gb, returns dL/d(input).
  std::vector<T> backward(const std::vector<T>& dy, Cache& cache, std::vector<T>& gw,
                          std::vector<T>& gb) const {
    if (!cache.valid) throw StateError("dense backward: no cached forward pass");
    if (int(dy.size()) != out) throw InputError("dense backward: gradient length mismatch");
    if (gw.size() != w.size() || gb.size() != b.size())
      throw StateError("dense backward: tape slot shape mismatch");
    std::vector<T> dpre(out);
    for (int o = 0; o < out; ++o) dpre[o] = dy[o] * activate_grad(act, cache.pre[o]);
    for (int o = 0; o < out; ++o) {
      gb[o] += dpre[o];
      T* grow = gw.data() + size_t(o) * in;
      const T d = dpre[o];
      for (int i = 0; i < in; ++i) grow[i] += d * cache.x[i];
    }
    std::vector<T> dx(in);
    for (int i = 0; i < in; ++i) {
      double acc = 0.0;
      for (int o = 0; o < out; ++o) acc += double(dpre[o]) * double(w[size_t(o) * in + i]);
      dx[i] = T(acc);
    }
    cache.valid = false;
    return dx;
  }
};

// Valid (no padding) cross-correlation along the time axis.
// Input and output are time-major: [len x channels], flattened row-major.
template <class T>
struct Conv1d {
  int in_ch = 0;
  int out_ch = 0;
  int kernel = 0;
  int stride = 1;
  Activation act = Activation::Identity;
  std::vector<T> k;  // [out_ch * in_ch * kernel]
  std::vector<T> b;  // [out_ch]

  struct Cache {
    std::vector<T> x;
    std::vector<T> pre;
    int in_len = 0;
    bool valid = false;
  };

  Conv1d() = default;
  Conv1d(int in_ch_, int out_ch_, int kernel_, int stride_, Activation act_)
      : in_ch(in_ch_),
        out_ch(out_ch_),
        kernel(kernel_),
        stride(stride_),
        act(act_),
        k(size_t(out_ch_) * in_ch_ * kernel_, T(0)),
        b(out_ch_, T(0)) {
    if (kernel_ < 1 || stride_ < 1) throw SpecError("conv1d: kernel and stride must be >= 1");
  }

  static int out_len(int in_len, int kernel, int stride) {
    return (in_len - kernel) / stride + 1;
  }
  int out_len(int in_len) const { return out_len(in_len, kernel, stride); }

  void init_lecun(Rng& rng) {
    double std_dev = 1.0 / std::sqrt(double(in_ch) * kernel);
    for (auto& kv : k) kv = T(rng.gaussian() * std_dev);
    std::fill(b.begin(), b.end(), T(0));
  }

  std::vector<T> forward(const std::vector<T>& x, int in_len, Cache* cache = nullptr) const {
    if (in_len < kernel)
      throw InputError("conv1d forward: input length " + std::to_string(in_len) +
                       " shorter than kernel " + std::to_string(kernel));
    if (int(x.size()) != in_len * in_ch)
      throw InputError("conv1d forward: buffer size does not match [len x channels]");
    const int lo = out_len(in_len);
    std::vector<T> pre(size_t(lo) * out_ch);
    for (int t = 0; t < lo; ++t) {
      for (int co = 0; co < out_ch; ++co) {
        double acc = double(b[co]);
        const T* kc = k.data() + size_t(co) * in_ch * kernel;
        for (int ci = 0; ci < in_ch; ++ci)
          for (int j = 0; j < kernel; ++j)
            acc += double(kc[size_t(ci) * kernel + j]) *
                   double(x[size_t(t * stride + j) * in_ch + ci]);
        pre[size_t(t) * out_ch + co] = T(acc);
      }
    }
    std::vector<T> y(pre.size());
    for (size_t i = 0; i < pre.size(); ++i) y[i] = activate(act, pre[i]);
    if (cache) {
      cache->x = x;
      cache->pre = pre;
      cache->in_len = in_len;
      cache->valid = true;
    }
    return y;
  }

  std::vector<T> backward(const std::vector<T>& dy, Cache& cache, std::vector<T>& gk,
                          std::vector<T>& gb) const {
    if (!cache.valid) throw StateError("conv1d backward: no cached forward pass");
    const int lo = out_len(cache.in_len);
    if (int(dy.size()) != lo * out_ch)
      throw InputError("conv1d backward: gradient length mismatch");
    if (gk.size() != k.size() || gb.size() != b.size())
      throw StateError("conv1d backward: tape slot shape mismatch");
    std::vector<T> dpre(dy.size());
    for (size_t i = 0; i < dy.size(); ++i)
      dpre[i] = dy[i] * activate_grad(act, cache.pre[i]);
    std::vector<T> dx(size_t(cache.in_len) * in_ch, T(0));
    for (int t = 0; t < lo; ++t) {
      for (int co = 0; co < out_ch; ++co) {
        const T d = dpre[size_t(t) * out_ch + co];
        gb[co] += d;
        T* gkc = gk.data() + size_t(co) * in_ch * kernel;
        const T* kc = k.data() + size_t(co) * in_ch * kernel;
        for (int ci = 0; ci < in_ch; ++ci) {
          for (int j = 0; j < kernel; ++j) {
            const size_t xi = size_t(t * stride + j) * in_ch + ci;
            gkc[size_t(ci) * kernel + j] += d * cache.x[xi];
            dx[xi] += d * kc[size_t(ci) * kernel + j];
          }
        }
      }
    }
    cache.valid = false;
    return dx;
  }
};

// Transposed (fractionally strided) counterpart of Conv1d; used to grow
// a conv-compressed sequence back to its original length. out_pad adds
// trailing bias-only rows so encoder lengths are restored exactly.
template <class T>
struct ConvT1d {
  int in_ch = 0;
  int out_ch = 0;
  int kernel = 0;
  int stride = 1;
  int out_pad = 0;
  Activation act = Activation::Identity;
  std::vector<T> k;  // [in_ch * out_ch * kernel]
  std::vector<T> b;  // [out_ch]

  struct Cache {
    std::vector<T> x;
    std::vector<T> pre;
    int in_len = 0;
    bool valid = false;
  };

  ConvT1d() = default;
  ConvT1d(int in_ch_, int out_ch_, int kernel_, int stride_, int out_pad_, Activation act_)
      : in_ch(in_ch_),
        out_ch(out_ch_),
        kernel(kernel_),
        stride(stride_),
        out_pad(out_pad_),
        act(act_),
        k(size_t(in_ch_) * out_ch_ * kernel_, T(0)),
        b(out_ch_, T(0)) {
    if (kernel_ < 1 || stride_ < 1) throw SpecError("convT1d: kernel and stride must be >= 1");
    if (out_pad_ < 0 || out_pad_ >= stride_)
      throw SpecError("convT1d: output padding must be in [0, stride)");
  }

  int out_len(int in_len) const { return (in_len - 1) * stride + kernel + out_pad; }

  void init_lecun(Rng& rng) {
    double std_dev = 1.0 / std::sqrt(double(in_ch) * kernel);
    for (auto& kv : k) kv = T(rng.gaussian() * std_dev);
    std::fill(b.begin(), b.end(), T(0));
  }

  std::vector<T> forward(const std::vector<T>& x, int in_len, Cache* cache = nullptr) const {
    if (in_len < 1) throw InputError("convT1d forward: empty input");
    if (int(x.size()) != in_len * in_ch)
      throw InputError("convT1d forward: buffer size does not match [len x channels]");
    const int lo = out_len(in_len);
    std::vector<T> pre(size_t(lo) * out_ch);
    for (int t = 0; t < lo; ++t)
      for (int co = 0; co < out_ch; ++co) pre[size_t(t) * out_ch + co] = b[co];
    for (int ti = 0; ti < in_len; ++ti) {
      for (int ci = 0; ci < in_ch; ++ci) {
        const T xv = x[size_t(ti) * in_ch + ci];
        const T* kc = k.data() + size_t(ci) * out_ch * kernel;
        for (int co = 0; co < out_ch; ++co)
          for (int j = 0; j < kernel; ++j)
            pre[size_t(ti * stride + j) * out_ch + co] += kc[size_t(co) * kernel + j] * xv;
      }
    }
    std::vector<T> y(pre.size());
    for (size_t i = 0; i < pre.size(); ++i) y[i] = activate(act, pre[i]);
    if (cache) {
      cache->x = x;
      cache->pre = pre;
      cache->in_len = in_len;
      cache->valid = true;
    }
    return y;
  }

  std::vector<T> backward(const std::vector<T>& dy, Cache& cache, std::vector<T>& gk,
                          std::vector<T>& gb) const {
    if (!cache.valid) throw StateError("convT1d backward: no cached forward pass");
    const int lo = out_len(cache.in_len);
    if (int(dy.size()) != lo * out_ch)
      throw InputError("convT1d backward: gradient length mismatch");
    if (gk.size() != k.size() || gb.size() != b.size())
      throw StateError("convT1d backward: tape slot shape mismatch");
    std::vector<T> dpre(dy.size());
    for (size_t i = 0; i < dy.size(); ++i)
      dpre[i] = dy[i] * activate_grad(act, cache.pre[i]);
    for (int t = 0; t < lo; ++t)
      for (int co = 0; co < out_ch; ++co) gb[co] += dpre[size_t(t) * out_ch + co];
    std::vector<T> dx(size_t(cache.in_len) * in_ch, T(0));
    for (int ti = 0; ti < cache.in_len; ++ti) {
      for (int ci = 0; ci < in_ch; ++ci) {
        const T* kc = k.data() + size_t(ci) * out_ch * kernel;
        T* gkc = gk.data() + size_t(ci) * out_ch * kernel;
        double acc = 0.0;
        for (int co = 0; co < out_ch; ++co) {
          for (int j = 0; j < kernel; ++j) {
            const T d = dpre[size_t(ti * stride + j) * out_ch + co];
            acc += double(kc[size_t(co) * kernel + j]) * double(d);
            gkc[size_t(co) * kernel + j] += d * cache.x[size_t(ti) * in_ch + ci];
          }
        }
        dx[size_t(ti) * in_ch + ci] = T(acc);
      }
    }
    cache.valid = false;
    return dx;
  }
};

// A plain sequential stack of dense layers sharing one cache array.
template <class T>
struct DenseStack {
  std::vector<Dense<T>> layers;
  std::vector<typename Dense<T>::Cache> caches;

  void add(int in, int out, Activation act) {
    layers.emplace_back(in, out, act);
    caches.emplace_back();
  }

  std::vector<T> forward(const std::vector<T>& x) const {
    std::vector<T> h = x;
    for (const auto& l : layers) h = l.forward(h);
    return h;
  }

  std::vector<T> forward_train(const std::vector<T>& x) {
    std::vector<T> h = x;
    for (size_t i = 0; i < layers.size(); ++i) h = layers[i].forward(h, &caches[i]);
    return h;
  }

  // Tape slots for layer i live at [slot_base + 2i] (weights) and
  // [slot_base + 2i + 1] (bias).
  std::vector<T> backward(const std::vector<T>& dy, GradientTape<T>& tape,
                          size_t slot_base) {
    std::vector<T> d = dy;
    for (size_t i = layers.size(); i-- > 0;) {
      d = layers[i].backward(d, caches[i], tape.slots[slot_base + 2 * i],
                             tape.slots[slot_base + 2 * i + 1]);
    }
    return d;
  }

  size_t slot_count() const { return 2 * layers.size(); }
};

}  // namespace aemon::nn
