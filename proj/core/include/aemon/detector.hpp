#pragma once

// Online streaming detection over a rolling window of incoming frames.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aemon/calibration.hpp"
#include "aemon/model.hpp"

namespace aemon {

enum class DetectMode { FailureDetection, CompletionDetection };
enum class Action { Continue, Stop, TaskComplete };

const char* to_string(DetectMode m);
const char* to_string(Action a);
DetectMode detect_mode_from_string(const std::string& s);

struct Verdict {
  int64_t frame_index = 0;
  bool anomalous = false;
  bool invalid_frame = false;  // rejected non-finite input, scored as anomalous
  double mean_abs = 0.0;
  std::vector<double> per_feature;
  std::vector<int> triggering_features;
  Action action = Action::Continue;
};

struct DetectorConfig {
  DetectMode mode = DetectMode::FailureDetection;
  // Stop fires after this many consecutive exceedances (1 = first hit).
  int consecutive_required = 1;
};

// Single-writer streaming detector. Holds the last T normalized frames in
// a ring buffer; emits a verdict per frame once warm. After a Stop the
// state is latched and further frames are ignored until reset().
class Detector {
 public:
  Detector(const ModelBundle& model, const ThresholdProfile& profile,
           DetectorConfig config = {});

  // Normalizes and appends one raw frame of n channel values. Returns a
  // verdict once warmed up (or an error verdict for a non-finite frame).
  std::optional<Verdict> push_frame(const std::vector<float>& frame);

  void reset();

  int64_t frame_index() const { return frame_index_; }
  int64_t frames_seen() const { return frames_seen_; }
  bool warmed_up() const { return frames_seen_ >= window_length_; }
  Action latched_action() const { return latched_; }
  bool task_completed() const { return completed_; }

 private:
  Verdict score_current(int64_t frame_index);

  const ModelBundle* model_;
  ThresholdProfile profile_;
  DetectorConfig config_;
  int window_length_;
  int channels_;
  std::vector<float> ring_;     // [T x n], row ring_head_ is the oldest
  std::vector<float> scratch_;  // time-ordered flattened window
  int ring_head_ = 0;
  int64_t frame_index_ = 0;
  int64_t frames_seen_ = 0;
  int consecutive_ = 0;
  bool completed_ = false;
  Action latched_ = Action::Continue;
};

struct DetectionReport {
  std::string run_id;
  DetectMode mode = DetectMode::FailureDetection;
  double sample_rate = 500.0;
  std::string label_tag;
  std::vector<Verdict> verdicts;
  std::optional<int64_t> first_detection;   // first anomalous verdict
  std::optional<int64_t> completion_index;  // completion mode only
  std::optional<int64_t> labeled_onset;
  // Signed: (first_detection - labeled_onset) / sample_rate. Negative or
  // zero values are kept and flagged.
  std::optional<double> latency_ms;
  bool early_detection = false;
  Action final_action = Action::Continue;
};

// Replays a recorded series through push_frame; verdicts are identical to
// streaming the same frames.
DetectionReport run_offline(const ModelBundle& model, const ThresholdProfile& profile,
                            const TimeSeries& series, DetectorConfig config = {});

}  // namespace aemon
