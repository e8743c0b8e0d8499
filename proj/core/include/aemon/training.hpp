#pragma once

// Loss functions and the epoch/batch training loop.

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "aemon/model.hpp"
#include "aemon/preprocessing.hpp"

namespace aemon {

// L2 norm of the elementwise difference, accumulated in double.
template <class T>
double recon_loss(const std::vector<T>& x, const std::vector<T>& x_prime) {
  if (x.size() != x_prime.size())
    throw InputError("recon_loss: length mismatch " + std::to_string(x.size()) + " vs " +
                     std::to_string(x_prime.size()));
  double acc = 0.0;
  for (size_t j = 0; j < x.size(); ++j) {
    const double d = double(x[j]) - double(x_prime[j]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

// KL divergence of N(mu, exp(log_var)) to N(0, I). Computed per element
// as 0.5 * (mu^2 + expm1(lv) - lv), which is exactly zero at (0, 0) and
// stays nonnegative under rounding.
template <class T>
double kl_loss(const std::vector<T>& mu, const std::vector<T>& log_var) {
  if (mu.size() != log_var.size()) throw InputError("kl_loss: length mismatch");
  double acc = 0.0;
  for (size_t j = 0; j < mu.size(); ++j) {
    const double m = double(mu[j]);
    const double lv = double(log_var[j]);
    acc += 0.5 * (m * m + (std::expm1(lv) - lv));
  }
  return acc;
}

template <class T>
double total_loss(Variant variant, const std::vector<T>& x, const std::vector<T>& x_prime,
                  const std::vector<T>& mu, const std::vector<T>& log_var, double beta) {
  if (variant == Variant::AE) {
    if (!mu.empty() || !log_var.empty())
      throw InputError("total_loss: KL arguments supplied for a plain AE");
    return recon_loss(x, x_prime);
  }
  return recon_loss(x, x_prime) + beta * kl_loss(mu, log_var);
}

struct TrainConfig {
  int epochs = 500;
  int batch_size = 25;
  int window_length = 100;  // must agree with the architecture
  double learning_rate = 1e-3;
  double kl_weight = 1.0;  // beta
  uint64_t seed = 0;
  bool shuffle = true;
  // When false, the reparameterization noise is forced to zero. Used by
  // tests to compare VAE and AE optimization paths.
  bool sample_latent = true;

  void validate() const;
};

struct EpochStats {
  double recon_loss = 0.0;
  double kl_loss = 0.0;
  double seconds = 0.0;
};

struct TrainRecord {
  std::vector<EpochStats> epochs;
  int windows_used_per_epoch = 0;
  int batches_per_epoch = 0;

  // Columns: epoch,recon_loss,kl_loss,seconds
  void write_csv(std::ostream& os) const;
};

// Runs epochs x batches of Adam steps over shuffled batches; the last
// partial batch of an epoch is dropped. Deterministic per config.seed
// (wall-clock fields excepted). norm is embedded into the returned bundle.
std::pair<ModelBundle, TrainRecord> train(const ArchitectureSpec& spec,
                                          const TrainConfig& config,
                                          const std::vector<Window>& train_windows,
                                          const NormStats& norm);

}  // namespace aemon
