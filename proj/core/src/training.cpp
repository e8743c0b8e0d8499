#include "aemon/training.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace aemon {

void TrainConfig::validate() const {
  if (epochs < 1) throw InputError("train config: epochs must be >= 1");
  if (batch_size < 1) throw InputError("train config: batch size must be >= 1");
  if (window_length < 2) throw InputError("train config: window length must be >= 2");
  if (learning_rate <= 0.0) throw InputError("train config: learning rate must be > 0");
  if (kl_weight < 0.0) throw InputError("train config: kl weight must be >= 0");
}

void TrainRecord::write_csv(std::ostream& os) const {
  os << "epoch,recon_loss,kl_loss,seconds\n";
  os << std::setprecision(12);
  for (size_t e = 0; e < epochs.size(); ++e)
    os << e << ',' << epochs[e].recon_loss << ',' << epochs[e].kl_loss << ','
       << epochs[e].seconds << '\n';
}

std::pair<ModelBundle, TrainRecord> train(const ArchitectureSpec& spec,
                                          const TrainConfig& config,
                                          const std::vector<Window>& train_windows,
                                          const NormStats& norm) {
  spec.validate();
  config.validate();
  if (config.window_length != spec.window_length)
    throw InputError("train: config window length " + std::to_string(config.window_length) +
                     " does not match architecture " + std::to_string(spec.window_length));
  if (int(train_windows.size()) < config.batch_size)
    throw InputError("train: need at least one full batch (" +
                     std::to_string(config.batch_size) + " windows), got " +
                     std::to_string(train_windows.size()));
  for (const auto& w : train_windows)
    if (w.length != spec.window_length || w.channels != spec.channels)
      throw InputError("train: window geometry does not match architecture");

  ModelBundle bundle = build(spec, config.seed);
  bundle.norm = norm;
  auto params = bundle.net.params();
  auto tape = nn::make_tape(params);
  auto adam = nn::make_adam(params, config.learning_rate);

  nn::Rng shuffle_rng(nn::Rng::mix(config.seed, 1001));
  nn::Rng noise_rng(nn::Rng::mix(config.seed, 1002));
  const bool vae = spec.variant != Variant::AE;
  const bool sample = vae && config.sample_latent;
  const int batch = config.batch_size;
  const int batches = int(train_windows.size()) / batch;
  const double inv_batch = 1.0 / double(batch);

  std::vector<size_t> order(train_windows.size());
  std::iota(order.begin(), order.end(), size_t(0));

  TrainRecord record;
  record.batches_per_epoch = batches;
  record.windows_used_per_epoch = batches * batch;
  record.epochs.reserve(size_t(config.epochs));

  std::vector<float> d_recon(size_t(spec.input_dim()));
  std::vector<float> d_mu(vae ? size_t(spec.latent_dim) : 0);
  std::vector<float> d_logvar(vae ? size_t(spec.latent_dim) : 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    if (config.shuffle) shuffle_rng.shuffle(order);
    double epoch_recon = 0.0;
    double epoch_kl = 0.0;
    for (int bi = 0; bi < batches; ++bi) {
      tape.zero();
      for (int k = 0; k < batch; ++k) {
        const Window& w = train_windows[order[size_t(bi) * batch + k]];
        auto fwd = bundle.net.forward_train(w.values, noise_rng, sample);
        const double rec = recon_loss(w.values, fwd.recon);
        const double kl = vae ? kl_loss(fwd.mu, fwd.log_var) : 0.0;
        const double total = rec + config.kl_weight * kl;
        if (!std::isfinite(total))
          throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                  ", batch " + std::to_string(bi),
                              epoch, bi);
        epoch_recon += rec;
        epoch_kl += kl;

        // d(total)/d(recon_j) = (recon_j - x_j) / rec, scaled by 1/batch.
        const double scale = rec > 0.0 ? inv_batch / rec : 0.0;
        for (size_t j = 0; j < d_recon.size(); ++j)
          d_recon[j] = float((double(fwd.recon[j]) - double(w.values[j])) * scale);
        if (vae) {
          const double ks = config.kl_weight * inv_batch;
          for (size_t j = 0; j < d_mu.size(); ++j) {
            d_mu[j] = float(ks * double(fwd.mu[j]));
            d_logvar[j] = float(ks * 0.5 * std::expm1(double(fwd.log_var[j])));
          }
          bundle.net.backward(d_recon, d_mu, d_logvar, tape);
        } else {
          bundle.net.backward(d_recon, {}, {}, tape);
        }
      }
      nn::adam_step(params, tape, adam);
    }
    const auto t1 = std::chrono::steady_clock::now();
    EpochStats stats;
    const double denom = double(batches * batch);
    stats.recon_loss = epoch_recon / denom;
    stats.kl_loss = epoch_kl / denom;
    stats.seconds = std::chrono::duration<double>(t1 - t0).count();
    record.epochs.push_back(stats);
  }

  bundle.meta.seed = config.seed;
  bundle.meta.epochs = config.epochs;
  bundle.meta.final_loss =
      record.epochs.back().recon_loss + config.kl_weight * record.epochs.back().kl_loss;
  return {std::move(bundle), std::move(record)};
}

}  // namespace aemon
