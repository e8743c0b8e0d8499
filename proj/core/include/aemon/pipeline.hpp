#pragma once

// End-to-end orchestration shared by the CLI, the ablation runner and the
// acceptance suite: corpus -> train -> calibrate -> score -> evaluate.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aemon/dataset_io.hpp"
#include "aemon/detector.hpp"
#include "aemon/metrics.hpp"
#include "aemon/model_io.hpp"
#include "aemon/training.hpp"

namespace aemon::pipeline {

struct PipelineOptions {
  Variant variant = Variant::VAE;
  std::vector<int> hidden_widths{30, 30, 30};
  int latent_dim = 15;
  std::vector<ConvLayerSpec> conv{{16, 5, 2}, {32, 5, 2}};
  int window_length = 100;
  int train_stride = 1;
  int eval_stride = 1;
  double holdout_fraction = 0.2;  // nominal runs reserved for calibration
  TrainConfig train;
  double tolerance_factor = 0.0;

  std::string canonical_string() const;  // hashed into provenance
};

// Deterministic split: the last ceil(fraction * N) nominal runs are the
// calibration holdout, the rest train (in manifest order).
struct NominalSplit {
  std::vector<const LoadedRun*> train;
  std::vector<const LoadedRun*> holdout;
};
NominalSplit split_nominal(const Corpus& corpus, double holdout_fraction);

std::string hash_corpus(const Corpus& corpus);

// Fit normalization on the training nominal runs, window them, train, and
// wrap the result with provenance. The profile is left empty.
ModelArtifact train_on_corpus(const Corpus& corpus, const PipelineOptions& options);

// Calibrates on the holdout runs recorded in the artifact's provenance.
void calibrate_artifact(ModelArtifact& artifact, const Corpus& corpus,
                        double tolerance_factor, int stride = 1);

// Dual-threshold calibration: target state = recorded holdout, rough
// state = the failure runs of the named scenario.
void calibrate_dual_artifact(ModelArtifact& artifact, const Corpus& corpus,
                             const std::string& rough_scenario, double tolerance_factor,
                             int stride = 1);

struct RunScores {
  std::string run_path;
  std::optional<int64_t> onset;
  std::vector<int64_t> window_end;
  std::vector<double> mean_abs;
  std::vector<std::vector<double>> per_feature;  // [window][channel]
};
RunScores score_series(const ModelBundle& model, const TimeSeries& series, int stride);

// Window label rule: a window is positive iff it ends at or after the
// labeled onset (it contains perturbed samples).
bool window_positive(const RunScores& scores, size_t window_idx);

struct EvaluationRow {
  std::string scenario;
  std::string tag;
  int runs = 0;
  int64_t windows_pos = 0;
  int64_t windows_neg = 0;
  double f1_ours = 0.0;    // calibrated aggregate threshold, no failure data
  double f1_max = 0.0;     // oracle threshold optimized on this scenario
  double f1_global = 0.0;  // oracle threshold optimized over all scenarios
  double auroc_window = 0.0;
  double auroc_run = 0.0;  // run score = max window error
  double avg_latency_ms = 0.0;
  int detected_runs = 0;
  int undetected_runs = 0;
  int early_flags = 0;  // latency <= 0
};

struct EvaluationTable {
  std::vector<EvaluationRow> rows;
  std::string to_csv() const;
};

// Negatives: every window of the calibration holdout runs plus pre-onset
// windows of the failure runs under evaluation.
EvaluationTable evaluate_corpus(const ModelArtifact& artifact, const Corpus& corpus,
                                int eval_stride = 1);

// Pooled window-level scored set over all failure scenarios (negatives as
// in evaluate_corpus); used by the ablation sweeps.
ScoredSet pooled_scored_set(const ModelArtifact& artifact, const Corpus& corpus,
                            int eval_stride, const std::string& scenario_filter = "");

// Trains on the first k = max(1, floor(fraction * N_train)) training runs
// per fraction and reports pooled AUROC. Fractions whose subset yields
// fewer than one batch of windows are skipped.
std::vector<EfficiencyPoint> ablate_data_fractions(const Corpus& corpus,
                                                   const PipelineOptions& options,
                                                   const std::vector<double>& fractions,
                                                   const std::string& scenario_filter = "");

struct AblationPoint {
  std::string key;
  double auroc = 0.0;
  bool skipped = false;
};

std::vector<AblationPoint> ablate_window_sizes(const Corpus& corpus,
                                               const PipelineOptions& options,
                                               const std::vector<int>& window_sizes,
                                               const std::string& scenario_filter = "");

std::vector<AblationPoint> ablate_variants(const Corpus& corpus,
                                           const PipelineOptions& options,
                                           const std::string& scenario_filter = "");

// Named channel-kind groups: ft, ft_pose, ft_joints, all.
std::vector<AblationPoint> ablate_features(const Corpus& corpus,
                                           const PipelineOptions& options,
                                           const std::vector<std::string>& groups,
                                           const std::string& scenario_filter = "");

std::vector<int> feature_group_indices(const std::vector<Channel>& channels,
                                       const std::string& group);

}  // namespace aemon::pipeline
