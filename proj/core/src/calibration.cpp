#include "aemon/calibration.hpp"

#include <cmath>

namespace aemon {

void ThresholdProfile::validate() const {
  if (per_feature.empty()) throw InputError("threshold profile has no per-feature thresholds");
  for (double c : per_feature)
    if (!std::isfinite(c) || c < 0.0)
      throw InputError("threshold profile: per-feature thresholds must be finite and >= 0");
  if (!std::isfinite(aggregate) || aggregate < 0.0)
    throw InputError("threshold profile: aggregate threshold must be finite and >= 0");
  if (tolerance_factor < 0.0)
    throw InputError("threshold profile: tolerance factor must be >= 0");
  if (lower && (!std::isfinite(*lower) || *lower < 0.0))
    throw InputError("threshold profile: lower threshold must be finite and >= 0");
  if (upper && (!std::isfinite(*upper) || *upper < 0.0))
    throw InputError("threshold profile: upper threshold must be finite and >= 0");
  if (lower && upper && !(*lower < *upper))
    throw InputError("threshold profile: lower threshold must be below upper");
}

WindowError reconstruction_errors(const Window& w, const Window& w_prime) {
  if (w.length != w_prime.length || w.channels != w_prime.channels)
    throw InputError("reconstruction_errors: window shapes differ");
  WindowError e;
  e.per_feature.assign(size_t(w.channels), 0.0);
  double total = 0.0;
  for (int t = 0; t < w.length; ++t) {
    for (int c = 0; c < w.channels; ++c) {
      const double d = std::abs(double(w.at(t, c)) - double(w_prime.at(t, c)));
      e.per_feature[size_t(c)] += d;
      total += d;
    }
  }
  for (auto& v : e.per_feature) v /= double(w.length);
  e.mean_abs = total / (double(w.length) * double(w.channels));
  return e;
}

WindowError window_error(const ModelBundle& m, const Window& w) {
  return reconstruction_errors(w, reconstruct(m, w));
}

namespace {

struct ErrorMaxima {
  double mean_abs = 0.0;
  std::vector<double> per_feature;
  int64_t windows = 0;
};

ErrorMaxima max_errors(const ModelBundle& m, const std::vector<TimeSeries>& runs, int stride) {
  ErrorMaxima mx;
  mx.per_feature.assign(size_t(m.spec.channels), 0.0);
  for (const auto& run : runs) {
    const auto windows = make_windows(run, m.norm, m.spec.window_length, stride);
    for (const auto& w : windows) {
      const WindowError e = window_error(m, w);
      mx.mean_abs = std::max(mx.mean_abs, e.mean_abs);
      for (size_t c = 0; c < mx.per_feature.size(); ++c)
        mx.per_feature[c] = std::max(mx.per_feature[c], e.per_feature[c]);
      ++mx.windows;
    }
  }
  return mx;
}

}  // namespace

ThresholdProfile calibrate(const ModelBundle& m, const std::vector<TimeSeries>& holdout,
                           double tolerance_factor, int stride) {
  if (holdout.empty()) throw InputError("calibrate: holdout set is empty");
  if (tolerance_factor < 0.0) throw InputError("calibrate: tolerance factor must be >= 0");
  if (stride < 1) throw InputError("calibrate: stride must be >= 1");

  const ErrorMaxima mx = max_errors(m, holdout, stride);
  ThresholdProfile p;
  p.tolerance_factor = tolerance_factor;
  p.per_feature.resize(mx.per_feature.size());
  for (size_t c = 0; c < mx.per_feature.size(); ++c)
    p.per_feature[c] = (1.0 + tolerance_factor) * mx.per_feature[c];
  p.aggregate = (1.0 + tolerance_factor) * mx.mean_abs;
  p.validate();
  return p;
}

ThresholdProfile calibrate_dual(const ModelBundle& m,
                                const std::vector<TimeSeries>& rough_runs,
                                const std::vector<TimeSeries>& target_runs,
                                double tolerance_factor, int stride) {
  if (rough_runs.empty() || target_runs.empty())
    throw InputError("calibrate_dual: rough and target run sets must be non-empty");

  ThresholdProfile p = calibrate(m, target_runs, tolerance_factor, stride);
  p.lower = p.aggregate;

  double rough_sum = 0.0;
  int64_t rough_windows = 0;
  for (const auto& run : rough_runs) {
    const auto windows = make_windows(run, m.norm, m.spec.window_length, stride);
    for (const auto& w : windows) {
      rough_sum += window_error(m, w).mean_abs;
      ++rough_windows;
    }
  }
  const double rough_mean = rough_sum / double(rough_windows);
  if (rough_mean <= *p.lower)
    throw InputError(
        "calibrate_dual: rough-state reconstruction error does not exceed the "
        "target-state threshold; the states are not separable by this model");
  p.upper = *p.lower + 0.5 * (rough_mean - *p.lower);
  p.validate();
  return p;
}

bool exceeds_per_feature(const ThresholdProfile& p, const std::vector<double>& per_feature) {
  if (per_feature.size() != p.per_feature.size())
    throw InputError("exceeds_per_feature: channel count mismatch");
  for (size_t c = 0; c < per_feature.size(); ++c)
    if (per_feature[c] > p.per_feature[c]) return true;
  return false;
}

}  // namespace aemon
