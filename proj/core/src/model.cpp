#include "aemon/model.hpp"

#include <algorithm>
#include <cmath>

namespace aemon {

const char* to_string(Variant v) {
  switch (v) {
    case Variant::AE: return "ae";
    case Variant::VAE: return "vae";
    case Variant::VAE_CNN: return "vae_cnn";
  }
  return "vae";
}

Variant variant_from_string(const std::string& s) {
  if (s == "ae") return Variant::AE;
  if (s == "vae") return Variant::VAE;
  if (s == "vae_cnn") return Variant::VAE_CNN;
  throw InputError("unknown model variant: " + s);
}

void ArchitectureSpec::validate() const {
  if (channels < 1) throw SpecError("architecture: channels must be >= 1");
  if (window_length < 2) throw SpecError("architecture: window length must be >= 2");
  if (hidden_widths.empty()) throw SpecError("architecture: hidden widths must be non-empty");
  for (int h : hidden_widths)
    if (h < 1) throw SpecError("architecture: hidden width must be >= 1");
  if (latent_dim < 1) throw SpecError("architecture: latent dim must be >= 1");
  if (latent_dim >= input_dim())
    throw SpecError("architecture: latent dim " + std::to_string(latent_dim) +
                    " must be smaller than input dim " + std::to_string(input_dim()));
  if (variant == Variant::VAE_CNN) {
    if (conv.size() != 2) throw SpecError("architecture: VAE_CNN expects exactly two conv stages");
    int len = window_length;
    for (const auto& c : conv) {
      if (c.out_channels < 1 || c.kernel < 1 || c.stride < 1)
        throw SpecError("architecture: conv stage fields must be >= 1");
      if (len < c.kernel)
        throw SpecError("architecture: sequence length " + std::to_string(len) +
                        " shorter than conv kernel " + std::to_string(c.kernel));
      len = (len - c.kernel) / c.stride + 1;
    }
    if (len * conv.back().out_channels <= latent_dim)
      throw SpecError("architecture: conv output smaller than latent dim");
  }
}

std::vector<int> ArchitectureSpec::conv_lengths() const {
  std::vector<int> lens;
  int len = window_length;
  for (const auto& c : conv) {
    len = (len - c.kernel) / c.stride + 1;
    lens.push_back(len);
  }
  return lens;
}

namespace {

// Stable per-layer seed streams; AE and VAE share every stream except
// the log-variance head, so their common parameters initialize identically.
enum RoleSeed : uint64_t {
  kEncConvRole = 10,
  kEncRole = 20,
  kMuRole = 40,
  kLogvarRole = 41,
  kDecRole = 50,
  kDecOutRole = 70,
  kDecConvRole = 80,
};

}  // namespace

template <class T>
AutoencoderNet<T>::AutoencoderNet(const ArchitectureSpec& spec, uint64_t seed) : spec_(spec) {
  spec.validate();
  int dense_in = spec.input_dim();
  if (spec.variant == Variant::VAE_CNN) {
    int in_ch = spec.channels;
    for (const auto& c : spec.conv) {
      enc_conv_.emplace_back(in_ch, c.out_channels, c.kernel, c.stride, nn::Activation::Selu);
      in_ch = c.out_channels;
    }
    dense_in = spec.conv_lengths().back() * in_ch;
  }
  int w = dense_in;
  for (int h : spec.hidden_widths) {
    enc_.add(w, h, nn::Activation::Selu);
    w = h;
  }
  mu_head_ = nn::Dense<T>(w, spec.latent_dim, nn::Activation::Identity);
  if (spec.variant != Variant::AE)
    logvar_head_ = nn::Dense<T>(w, spec.latent_dim, nn::Activation::Identity);

  int dw = spec.latent_dim;
  for (auto it = spec.hidden_widths.rbegin(); it != spec.hidden_widths.rend(); ++it) {
    dec_.add(dw, *it, nn::Activation::Selu);
    dw = *it;
  }
  const bool conv_out = spec.variant == Variant::VAE_CNN;
  dec_out_ = nn::Dense<T>(dw, dense_in,
                          conv_out ? nn::Activation::Selu : nn::Activation::Identity);
  if (conv_out) {
    // Mirror the conv stages in reverse; output padding restores the exact
    // length consumed by the matching encoder stage.
    std::vector<int> lens = spec.conv_lengths();
    std::vector<int> path{spec.window_length};
    path.insert(path.end(), lens.begin(), lens.end());
    const size_t m = spec.conv.size();
    for (size_t j = 0; j < m; ++j) {
      const auto& mirrored = spec.conv[m - 1 - j];
      const int from_len = path[m - j];
      const int to_len = path[m - j - 1];
      const int in_ch = mirrored.out_channels;
      const int out_ch = (m - 1 - j == 0) ? spec.channels : spec.conv[m - 2 - j].out_channels;
      const int op = to_len - ((from_len - 1) * mirrored.stride + mirrored.kernel);
      const auto act = (j + 1 == m) ? nn::Activation::Identity : nn::Activation::Selu;
      dec_conv_.emplace_back(in_ch, out_ch, mirrored.kernel, mirrored.stride, op, act);
    }
    dec_conv_cache_.resize(dec_conv_.size());
  }
  enc_conv_cache_.resize(enc_conv_.size());

  for (size_t i = 0; i < enc_conv_.size(); ++i) {
    nn::Rng r(nn::Rng::mix(seed, kEncConvRole + i));
    enc_conv_[i].init_lecun(r);
  }
  for (size_t i = 0; i < enc_.layers.size(); ++i) {
    nn::Rng r(nn::Rng::mix(seed, kEncRole + i));
    enc_.layers[i].init_lecun(r);
  }
  {
    nn::Rng r(nn::Rng::mix(seed, kMuRole));
    mu_head_.init_lecun(r);
  }
  if (spec.variant != Variant::AE) {
    nn::Rng r(nn::Rng::mix(seed, kLogvarRole));
    logvar_head_.init_lecun(r);
  }
  for (size_t i = 0; i < dec_.layers.size(); ++i) {
    nn::Rng r(nn::Rng::mix(seed, kDecRole + i));
    dec_.layers[i].init_lecun(r);
  }
  {
    nn::Rng r(nn::Rng::mix(seed, kDecOutRole));
    dec_out_.init_lecun(r);
  }
  for (size_t i = 0; i < dec_conv_.size(); ++i) {
    nn::Rng r(nn::Rng::mix(seed, kDecConvRole + i));
    dec_conv_[i].init_lecun(r);
  }
}

template <class T>
std::vector<T> AutoencoderNet<T>::encode_trunk(
    const std::vector<T>& x, std::vector<typename nn::Conv1d<T>::Cache>* conv_caches,
    nn::DenseStack<T>* cached_stack) const {
  std::vector<T> h = x;
  int len = spec_.window_length;
  for (size_t i = 0; i < enc_conv_.size(); ++i) {
    h = enc_conv_[i].forward(h, len, conv_caches ? &(*conv_caches)[i] : nullptr);
    len = enc_conv_[i].out_len(len);
  }
  return cached_stack ? cached_stack->forward_train(h) : enc_.forward(h);
}

template <class T>
std::vector<T> AutoencoderNet<T>::decode_from(
    const std::vector<T>& z, typename nn::Dense<T>::Cache* out_cache,
    std::vector<typename nn::ConvT1d<T>::Cache>* conv_caches,
    nn::DenseStack<T>* cached_stack) const {
  std::vector<T> d = cached_stack ? cached_stack->forward_train(z) : dec_.forward(z);
  d = dec_out_.forward(d, out_cache);
  if (!dec_conv_.empty()) {
    int len = spec_.conv_lengths().back();
    for (size_t i = 0; i < dec_conv_.size(); ++i) {
      d = dec_conv_[i].forward(d, len, conv_caches ? &(*conv_caches)[i] : nullptr);
      len = dec_conv_[i].out_len(len);
    }
  }
  return d;
}

template <class T>
ForwardResult<T> AutoencoderNet<T>::infer(const std::vector<T>& x) const {
  std::vector<T> h = encode_trunk(x, nullptr, nullptr);
  ForwardResult<T> r;
  r.mu = mu_head_.forward(h);
  if (has_logvar()) {
    r.log_var = logvar_head_.forward(h);
    for (auto& v : r.log_var) v = std::clamp(v, T(-kLogVarClamp), T(kLogVarClamp));
  }
  r.z = r.mu;
  r.recon = decode_from(r.z, nullptr, nullptr, nullptr);
  return r;
}

template <class T>
ForwardResult<T> AutoencoderNet<T>::forward_train(const std::vector<T>& x, nn::Rng& noise_rng,
                                                  bool sample) {
  std::vector<T> h = encode_trunk(x, &enc_conv_cache_, &enc_);
  ForwardResult<T> r;
  r.mu = mu_head_.forward(h, &mu_cache_);
  if (has_logvar()) {
    std::vector<T> lv = logvar_head_.forward(h, &logvar_cache_);
    latent_cache_.in_range.assign(lv.size(), 1);
    for (size_t i = 0; i < lv.size(); ++i) {
      if (lv[i] > T(kLogVarClamp)) {
        lv[i] = T(kLogVarClamp);
        latent_cache_.in_range[i] = 0;
      } else if (lv[i] < T(-kLogVarClamp)) {
        lv[i] = T(-kLogVarClamp);
        latent_cache_.in_range[i] = 0;
      }
    }
    r.log_var = lv;
    r.eps.resize(lv.size());
    r.z.resize(lv.size());
    for (size_t i = 0; i < lv.size(); ++i) {
      const T e = sample ? T(noise_rng.gaussian()) : T(0);
      r.eps[i] = e;
      r.z[i] = r.mu[i] + std::exp(lv[i] / T(2)) * e;
    }
    latent_cache_.logvar = lv;
    latent_cache_.eps = r.eps;
  } else {
    r.z = r.mu;
  }
  latent_cache_.valid = true;
  r.recon = decode_from(r.z, &dec_out_cache_, &dec_conv_cache_, &dec_);
  return r;
}

template <class T>
void AutoencoderNet<T>::backward(const std::vector<T>& d_recon,
                                 const std::vector<T>& d_mu_extra,
                                 const std::vector<T>& d_logvar_extra,
                                 nn::GradientTape<T>& tape) {
  if (!latent_cache_.valid) throw StateError("backward: no cached forward pass");

  // Slot layout mirrors params().
  size_t slot = 0;
  const size_t enc_conv_base = slot;
  slot += 2 * enc_conv_.size();
  const size_t enc_base = slot;
  slot += enc_.slot_count();
  const size_t mu_base = slot;
  slot += 2;
  size_t logvar_base = 0;
  if (has_logvar()) {
    logvar_base = slot;
    slot += 2;
  }
  const size_t dec_base = slot;
  slot += dec_.slot_count();
  const size_t dec_out_base = slot;
  slot += 2;
  const size_t dec_conv_base = slot;
  slot += 2 * dec_conv_.size();
  if (tape.slots.size() != slot) throw StateError("backward: tape layout mismatch");

  std::vector<T> d = d_recon;
  for (size_t i = dec_conv_.size(); i-- > 0;)
    d = dec_conv_[i].backward(d, dec_conv_cache_[i], tape.slots[dec_conv_base + 2 * i],
                              tape.slots[dec_conv_base + 2 * i + 1]);
  d = dec_out_.backward(d, dec_out_cache_, tape.slots[dec_out_base],
                        tape.slots[dec_out_base + 1]);
  std::vector<T> dz = dec_.backward(d, tape, dec_base);

  std::vector<T> dmu = dz;
  if (!d_mu_extra.empty()) {
    if (d_mu_extra.size() != dmu.size())
      throw InputError("backward: latent mu gradient size mismatch");
    for (size_t i = 0; i < dmu.size(); ++i) dmu[i] += d_mu_extra[i];
  }

  std::vector<T> dh;
  if (has_logvar()) {
    if (!d_logvar_extra.empty() && d_logvar_extra.size() != dz.size())
      throw InputError("backward: latent log_var gradient size mismatch");
    std::vector<T> dlv(dz.size());
    for (size_t i = 0; i < dz.size(); ++i) {
      T g = dz[i] * latent_cache_.eps[i] * T(0.5) *
            std::exp(latent_cache_.logvar[i] / T(2));
      if (!d_logvar_extra.empty()) g += d_logvar_extra[i];
      dlv[i] = latent_cache_.in_range[i] ? g : T(0);
    }
    dh = mu_head_.backward(dmu, mu_cache_, tape.slots[mu_base], tape.slots[mu_base + 1]);
    std::vector<T> dh2 = logvar_head_.backward(dlv, logvar_cache_, tape.slots[logvar_base],
                                               tape.slots[logvar_base + 1]);
    for (size_t i = 0; i < dh.size(); ++i) dh[i] += dh2[i];
  } else {
    if (!d_logvar_extra.empty())
      throw InputError("backward: log_var gradient supplied for a plain AE");
    dh = mu_head_.backward(dmu, mu_cache_, tape.slots[mu_base], tape.slots[mu_base + 1]);
  }

  std::vector<T> dx = enc_.backward(dh, tape, enc_base);
  for (size_t i = enc_conv_.size(); i-- > 0;)
    dx = enc_conv_[i].backward(dx, enc_conv_cache_[i], tape.slots[enc_conv_base + 2 * i],
                               tape.slots[enc_conv_base + 2 * i + 1]);
  latent_cache_.valid = false;
}

template <class T>
std::vector<nn::ParamRef<T>> AutoencoderNet<T>::params() {
  std::vector<nn::ParamRef<T>> ps;
  for (size_t i = 0; i < enc_conv_.size(); ++i) {
    ps.push_back({"enc_conv" + std::to_string(i) + ".k", &enc_conv_[i].k});
    ps.push_back({"enc_conv" + std::to_string(i) + ".b", &enc_conv_[i].b});
  }
  for (size_t i = 0; i < enc_.layers.size(); ++i) {
    ps.push_back({"enc" + std::to_string(i) + ".w", &enc_.layers[i].w});
    ps.push_back({"enc" + std::to_string(i) + ".b", &enc_.layers[i].b});
  }
  ps.push_back({"mu.w", &mu_head_.w});
  ps.push_back({"mu.b", &mu_head_.b});
  if (has_logvar()) {
    ps.push_back({"logvar.w", &logvar_head_.w});
    ps.push_back({"logvar.b", &logvar_head_.b});
  }
  for (size_t i = 0; i < dec_.layers.size(); ++i) {
    ps.push_back({"dec" + std::to_string(i) + ".w", &dec_.layers[i].w});
    ps.push_back({"dec" + std::to_string(i) + ".b", &dec_.layers[i].b});
  }
  ps.push_back({"dec_out.w", &dec_out_.w});
  ps.push_back({"dec_out.b", &dec_out_.b});
  for (size_t i = 0; i < dec_conv_.size(); ++i) {
    ps.push_back({"dec_conv" + std::to_string(i) + ".k", &dec_conv_[i].k});
    ps.push_back({"dec_conv" + std::to_string(i) + ".b", &dec_conv_[i].b});
  }
  return ps;
}

template <class T>
size_t AutoencoderNet<T>::param_count() const {
  size_t n = 0;
  for (const auto& c : enc_conv_) n += c.k.size() + c.b.size();
  for (const auto& l : enc_.layers) n += l.w.size() + l.b.size();
  n += mu_head_.w.size() + mu_head_.b.size();
  if (spec_.variant != Variant::AE) n += logvar_head_.w.size() + logvar_head_.b.size();
  for (const auto& l : dec_.layers) n += l.w.size() + l.b.size();
  n += dec_out_.w.size() + dec_out_.b.size();
  for (const auto& c : dec_conv_) n += c.k.size() + c.b.size();
  return n;
}

template class AutoencoderNet<float>;
template class AutoencoderNet<double>;

ModelBundle build(const ArchitectureSpec& spec, uint64_t seed) {
  spec.validate();
  ModelBundle m;
  m.spec = spec;
  m.net = AutoencoderNet<float>(spec, seed);
  m.meta.seed = seed;
  return m;
}

EncoderOutput encode(const ModelBundle& m, const std::vector<float>& flat) {
  auto r = m.net.infer(flat);
  return EncoderOutput{std::move(r.mu), std::move(r.log_var), std::move(r.z), {}};
}

EncoderOutput encode_sampled(const ModelBundle& m, const std::vector<float>& flat,
                             nn::Rng& rng) {
  auto r = m.net.infer(flat);
  EncoderOutput out{std::move(r.mu), std::move(r.log_var), {}, {}};
  if (out.log_var.empty()) {
    out.z = out.mu;
    return out;
  }
  out.eps.resize(out.mu.size());
  out.z.resize(out.mu.size());
  for (size_t i = 0; i < out.mu.size(); ++i) {
    out.eps[i] = float(rng.gaussian());
    out.z[i] = out.mu[i] + std::exp(out.log_var[i] / 2.0f) * out.eps[i];
  }
  return out;
}

std::vector<float> decode(const ModelBundle& m, const std::vector<float>& z) {
  if (int(z.size()) != m.spec.latent_dim)
    throw InputError("decode: latent vector length " + std::to_string(z.size()) +
                     " != latent dim " + std::to_string(m.spec.latent_dim));
  auto& net = m.net;
  // Reuse the decoder path of an inference pass: run decoder stacks directly.
  std::vector<float> d = net.decoder().forward(z);
  d = net.decoder_out().forward(d);
  if (!net.decoder_conv().empty()) {
    int len = m.spec.conv_lengths().back();
    for (const auto& c : net.decoder_conv()) {
      d = c.forward(d, len);
      len = c.out_len(len);
    }
  }
  return d;
}

Window reconstruct(const ModelBundle& m, const Window& w) {
  if (w.length != m.spec.window_length || w.channels != m.spec.channels)
    throw InputError("reconstruct: window geometry does not match model");
  auto r = m.net.infer(w.values);
  return unflatten_window(r.recon, w.length, w.channels, w.start_index);
}

}  // namespace aemon
