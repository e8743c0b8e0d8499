#pragma once

// Failure-data-free threshold computation from held-out nominal runs.

#include <optional>
#include <vector>

#include "aemon/model.hpp"
#include "aemon/preprocessing.hpp"

namespace aemon {

struct ThresholdProfile {
  // Per-channel thresholds on the per-feature mean absolute error.
  std::vector<double> per_feature;
  double tolerance_factor = 0.0;
  // Threshold on the window-level mean absolute error.
  double aggregate = 0.0;
  // Completion-style detection: error falling below `lower` means the
  // target state is reached; rising above `upper` afterwards aborts.
  std::optional<double> lower;
  std::optional<double> upper;

  void validate() const;
};

struct WindowError {
  double mean_abs = 0.0;               // mean |w - w'| over all T*n elements
  std::vector<double> per_feature;     // mean |w - w'| over T samples, per channel
};

// Reconstructs the window with the model and returns its error profile.
WindowError window_error(const ModelBundle& m, const Window& w);

// Error profile of an already-computed reconstruction.
WindowError reconstruction_errors(const Window& w, const Window& w_prime);

// Per-feature maxima over every stride-spaced window of the holdout runs,
// inflated by (1 + tolerance_factor). By construction every calibration
// window classifies as nominal under the resulting profile.
ThresholdProfile calibrate(const ModelBundle& m, const std::vector<TimeSeries>& holdout,
                           double tolerance_factor, int stride = 1);

// Dual-threshold profile for completion-style tasks. The model must be
// trained on target-state data; `lower` is the calibrated max error over
// the target-state holdout, `upper` sits halfway between `lower` and the
// mean rough-state error.
ThresholdProfile calibrate_dual(const ModelBundle& m,
                                const std::vector<TimeSeries>& rough_runs,
                                const std::vector<TimeSeries>& target_runs,
                                double tolerance_factor, int stride = 1);

// Decision rule: anomalous iff any channel error exceeds its threshold.
bool exceeds_per_feature(const ThresholdProfile& p, const std::vector<double>& per_feature);

}  // namespace aemon
