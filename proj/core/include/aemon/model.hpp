#pragma once

// The three autoencoder variants (AE, VAE, VAE-CNN) behind one
// encoder/decoder contract. The decoder always mirrors the encoder.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aemon/errors.hpp"
#include "aemon/nn.hpp"
#include "aemon/preprocessing.hpp"

namespace aemon {

enum class Variant { AE, VAE, VAE_CNN };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct ConvLayerSpec {
  int out_channels = 0;
  int kernel = 0;
  int stride = 0;

  bool operator==(const ConvLayerSpec&) const = default;
};

struct ArchitectureSpec {
  Variant variant = Variant::VAE;
  int window_length = 100;  // T
  int channels = 0;         // n
  std::vector<int> hidden_widths{30, 30, 30};
  int latent_dim = 15;
  // VAE_CNN only: two conv stages applied over the time axis before the
  // dense stack; the decoder regrows the sequence with transposed convs.
  std::vector<ConvLayerSpec> conv{{16, 5, 2}, {32, 5, 2}};

  int input_dim() const { return window_length * channels; }
  void validate() const;
  // Sequence lengths after each encoder conv stage (VAE_CNN).
  std::vector<int> conv_lengths() const;

  bool operator==(const ArchitectureSpec&) const = default;
};

// log-variance is clamped to +-kLogVarClamp before use.
inline constexpr double kLogVarClamp = 10.0;

template <class T>
struct ForwardResult {
  std::vector<T> recon;    // [T*n]
  std::vector<T> mu;       // [latent]
  std::vector<T> log_var;  // [latent], empty for AE
  std::vector<T> z;        // [latent]
  std::vector<T> eps;      // [latent], only for sampled forward passes
};

template <class T>
class AutoencoderNet {
 public:
  AutoencoderNet() = default;
  AutoencoderNet(const ArchitectureSpec& spec, uint64_t seed);

  const ArchitectureSpec& spec() const { return spec_; }

  // Read-only pass: z = mu, no caches touched. Thread-safe.
  ForwardResult<T> infer(const std::vector<T>& x) const;

  // Caching pass for training. When sample is true, z = mu + exp(lv/2)*eps
  // with eps drawn from noise_rng; otherwise eps = 0 and z = mu.
  ForwardResult<T> forward_train(const std::vector<T>& x, nn::Rng& noise_rng, bool sample);

  // Reverse pass from the cached forward. d_recon is dL/d(reconstruction);
  // d_mu_extra / d_logvar_extra add loss terms applied directly to the
  // latent moments (the KL path); pass empty vectors when unused.
  void backward(const std::vector<T>& d_recon, const std::vector<T>& d_mu_extra,
                const std::vector<T>& d_logvar_extra, nn::GradientTape<T>& tape);

  std::vector<nn::ParamRef<T>> params();
  size_t param_count() const;

  // Structural accessors used by serialization and tests.
  const std::vector<nn::Conv1d<T>>& encoder_conv() const { return enc_conv_; }
  const nn::DenseStack<T>& encoder() const { return enc_; }
  const nn::Dense<T>& mu_head() const { return mu_head_; }
  const nn::Dense<T>& logvar_head() const { return logvar_head_; }
  const nn::DenseStack<T>& decoder() const { return dec_; }
  const nn::Dense<T>& decoder_out() const { return dec_out_; }
  const std::vector<nn::ConvT1d<T>>& decoder_conv() const { return dec_conv_; }
  bool has_logvar() const { return spec_.variant != Variant::AE; }

 private:
  std::vector<T> encode_trunk(const std::vector<T>& x,
                              std::vector<typename nn::Conv1d<T>::Cache>* conv_caches,
                              nn::DenseStack<T>* cached_stack) const;
  std::vector<T> decode_from(const std::vector<T>& z,
                             typename nn::Dense<T>::Cache* out_cache,
                             std::vector<typename nn::ConvT1d<T>::Cache>* conv_caches,
                             nn::DenseStack<T>* cached_stack) const;

  ArchitectureSpec spec_;
  std::vector<nn::Conv1d<T>> enc_conv_;
  nn::DenseStack<T> enc_;
  nn::Dense<T> mu_head_;
  nn::Dense<T> logvar_head_;
  nn::DenseStack<T> dec_;
  nn::Dense<T> dec_out_;
  std::vector<nn::ConvT1d<T>> dec_conv_;

  // Training caches.
  std::vector<typename nn::Conv1d<T>::Cache> enc_conv_cache_;
  typename nn::Dense<T>::Cache mu_cache_;
  typename nn::Dense<T>::Cache logvar_cache_;
  typename nn::Dense<T>::Cache dec_out_cache_;
  std::vector<typename nn::ConvT1d<T>::Cache> dec_conv_cache_;
  struct LatentCache {
    std::vector<T> logvar;  // clamped
    std::vector<T> eps;
    std::vector<uint8_t> in_range;  // 0 where the clamp was active
    bool valid = false;
  } latent_cache_;
};

struct TrainingMeta {
  uint64_t seed = 0;
  int epochs = 0;
  double final_loss = 0.0;
};

// Trained (or initialized) model plus the statistics needed to feed it.
struct ModelBundle {
  ArchitectureSpec spec;
  AutoencoderNet<float> net;
  NormStats norm;
  TrainingMeta meta;
};

struct EncoderOutput {
  std::vector<float> mu;
  std::vector<float> log_var;  // empty for AE
  std::vector<float> z;
  std::vector<float> eps;  // empty unless sampled
};

// Deterministic per seed. Norm stats start empty; training fills them.
ModelBundle build(const ArchitectureSpec& spec, uint64_t seed);

// Inference-mode encoding: z = mu, repeatable.
EncoderOutput encode(const ModelBundle& m, const std::vector<float>& flat);

// Training-mode encoding with reparameterization noise from rng.
EncoderOutput encode_sampled(const ModelBundle& m, const std::vector<float>& flat,
                             nn::Rng& rng);

std::vector<float> decode(const ModelBundle& m, const std::vector<float>& z);

// encode->decode in inference mode, reshaped to the input geometry.
Window reconstruct(const ModelBundle& m, const Window& w);

extern template class AutoencoderNet<float>;
extern template class AutoencoderNet<double>;

}  // namespace aemon
