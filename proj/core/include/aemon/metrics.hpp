#pragma once

// Detection metrics: confusion counts, precision/recall/F1/FPR, ROC and
// AUROC, oracle-threshold sweeps, data-efficiency curves, latency stats.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aemon/detector.hpp"
#include "aemon/errors.hpp"

namespace aemon {

struct ScoredPoint {
  double score = 0.0;
  bool positive = false;
};

struct ScoredSet {
  std::vector<ScoredPoint> points;
  std::string granularity = "window";  // "window" or "run"

  int64_t positives() const;
  int64_t negatives() const;
};

struct Confusion {
  int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  int64_t total() const { return tp + fp + tn + fn; }
};

// Positive classification iff score > threshold.
Confusion confusion(const ScoredSet& scored, double threshold);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fpr = 0.0;
  // Zero-denominator cases report 0 with the matching flag set.
  bool degenerate_precision = false;
  bool degenerate_recall = false;
  bool degenerate_f1 = false;
  bool degenerate_fpr = false;
};

Prf prf(const Confusion& c);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // monotone in FPR, endpoints (0,0) and (1,1)
  double auroc = 0.0;
};

// Sweeps every distinct score; tied scores step simultaneously; AUROC is
// the trapezoidal area. Requires at least one positive and one negative.
RocCurve roc_auroc(const ScoredSet& scored);

// Exhaustive sweep; ties broken toward the higher threshold.
struct BestF1 {
  double threshold = 0.0;
  double f1 = 0.0;
};
BestF1 best_f1_threshold(const ScoredSet& scored);

struct EfficiencyPoint {
  double fraction = 0.0;
  double auroc = 0.0;
  bool skipped = false;
};

// Calls train_eval per fraction; a nullopt result marks the point skipped
// (e.g. the subset is too small to train on).
std::vector<EfficiencyPoint> data_efficiency(
    const std::function<std::optional<ScoredSet>(double)>& train_eval,
    const std::vector<double>& fractions);

struct LatencySummary {
  double mean_ms = 0.0;  // over detected runs
  int64_t detected = 0;
  int64_t undetected = 0;
  int64_t early_flagged = 0;  // latency <= 0
  std::vector<std::pair<std::string, double>> per_tag_mean_ms;
};

// Reports must carry labeled onsets; undetected runs are excluded from the
// mean and counted separately.
LatencySummary latency_stats(const std::vector<DetectionReport>& reports);

}  // namespace aemon
