#include "aemon/detector.hpp"

#include <cmath>

namespace aemon {

const char* to_string(DetectMode m) {
  return m == DetectMode::FailureDetection ? "failure_detection" : "completion_detection";
}

const char* to_string(Action a) {
  switch (a) {
    case Action::Continue: return "continue";
    case Action::Stop: return "stop";
    case Action::TaskComplete: return "task_complete";
  }
  return "continue";
}

DetectMode detect_mode_from_string(const std::string& s) {
  if (s == "failure_detection" || s == "failure") return DetectMode::FailureDetection;
  if (s == "completion_detection" || s == "completion")
    return DetectMode::CompletionDetection;
  throw InputError("unknown detect mode: " + s);
}

Detector::Detector(const ModelBundle& model, const ThresholdProfile& profile,
                   DetectorConfig config)
    : model_(&model),
      profile_(profile),
      config_(config),
      window_length_(model.spec.window_length),
      channels_(model.spec.channels) {
  profile_.validate();
  if (int(profile_.per_feature.size()) != channels_)
    throw InputError("detector: profile channel count does not match model");
  if (config_.consecutive_required < 1)
    throw InputError("detector: consecutive_required must be >= 1");
  if (config_.mode == DetectMode::CompletionDetection && (!profile_.lower || !profile_.upper))
    throw InputError("detector: completion mode requires lower and upper thresholds");
  if (model.norm.channel_count() != channels_)
    throw InputError("detector: model normalization stats missing or mismatched");
  ring_.assign(size_t(window_length_) * channels_, 0.0f);
  scratch_.resize(ring_.size());
}

void Detector::reset() {
  std::fill(ring_.begin(), ring_.end(), 0.0f);
  ring_head_ = 0;
  frame_index_ = 0;
  frames_seen_ = 0;
  consecutive_ = 0;
  completed_ = false;
  latched_ = Action::Continue;
}

std::optional<Verdict> Detector::push_frame(const std::vector<float>& frame) {
  if (latched_ == Action::Stop) return std::nullopt;
  if (int(frame.size()) != channels_)
    throw InputError("push_frame: frame has " + std::to_string(frame.size()) +
                     " values, expected " + std::to_string(channels_));

  const int64_t index = frame_index_++;

  bool finite = true;
  for (float v : frame)
    if (!std::isfinite(v)) {
      finite = false;
      break;
    }
  if (!finite) {
    // Fail-safe: a bad sensor frame counts as an exceedance and is not
    // admitted into the window.
    Verdict v;
    v.frame_index = index;
    v.anomalous = true;
    v.invalid_frame = true;
    consecutive_ += 1;
    if (config_.mode == DetectMode::CompletionDetection ||
        consecutive_ >= config_.consecutive_required) {
      v.action = Action::Stop;
      latched_ = Action::Stop;
    }
    return v;
  }

  float* row = ring_.data() + size_t(ring_head_) * channels_;
  for (int c = 0; c < channels_; ++c)
    row[c] = float(model_->norm.normalize(double(frame[size_t(c)]), c));
  ring_head_ = (ring_head_ + 1) % window_length_;
  frames_seen_ += 1;

  if (!warmed_up()) return std::nullopt;
  return score_current(index);
}

Verdict Detector::score_current(int64_t frame_index) {
  // Unroll the ring into time order: ring_head_ points at the oldest row.
  const size_t row_bytes = size_t(channels_) * sizeof(float);
  const size_t tail_rows = size_t(window_length_ - ring_head_);
  std::memcpy(scratch_.data(), ring_.data() + size_t(ring_head_) * channels_,
              tail_rows * row_bytes);
  if (ring_head_ > 0)
    std::memcpy(scratch_.data() + tail_rows * channels_, ring_.data(),
                size_t(ring_head_) * row_bytes);

  const auto fwd = model_->net.infer(scratch_);

  Verdict v;
  v.frame_index = frame_index;
  v.per_feature.assign(size_t(channels_), 0.0);
  double total = 0.0;
  for (int t = 0; t < window_length_; ++t) {
    const size_t base = size_t(t) * channels_;
    for (int c = 0; c < channels_; ++c) {
      const double d =
          std::abs(double(scratch_[base + c]) - double(fwd.recon[base + c]));
      v.per_feature[size_t(c)] += d;
      total += d;
    }
  }
  for (auto& e : v.per_feature) e /= double(window_length_);
  v.mean_abs = total / (double(window_length_) * channels_);

  if (config_.mode == DetectMode::FailureDetection) {
    for (int c = 0; c < channels_; ++c)
      if (v.per_feature[size_t(c)] > profile_.per_feature[size_t(c)])
        v.triggering_features.push_back(c);
    v.anomalous = !v.triggering_features.empty();
    consecutive_ = v.anomalous ? consecutive_ + 1 : 0;
    if (v.anomalous && consecutive_ >= config_.consecutive_required) {
      v.action = Action::Stop;
      latched_ = Action::Stop;
    }
  } else {
    if (!completed_) {
      if (v.mean_abs < *profile_.lower) {
        completed_ = true;
        v.action = Action::TaskComplete;
        latched_ = Action::TaskComplete;
      }
    } else if (v.mean_abs > *profile_.upper) {
      v.anomalous = true;
      v.action = Action::Stop;
      latched_ = Action::Stop;
    }
  }
  return v;
}

DetectionReport run_offline(const ModelBundle& model, const ThresholdProfile& profile,
                            const TimeSeries& series, DetectorConfig config) {
  series.validate();
  if (series.length() < model.spec.window_length)
    throw InputError("run_offline: series shorter than the model window");
  if (series.channel_count() != model.spec.channels)
    throw InputError("run_offline: series channel count does not match model");

  Detector det(model, profile, config);
  DetectionReport report;
  report.mode = config.mode;
  report.sample_rate = series.sample_rate;

  const int64_t len = series.length();
  std::vector<float> frame(size_t(series.channel_count()));
  for (int64_t t = 0; t < len; ++t) {
    for (int c = 0; c < series.channel_count(); ++c) frame[size_t(c)] = series.at(t, c);
    auto v = det.push_frame(frame);
    if (!v) continue;
    if (v->anomalous && !report.first_detection) report.first_detection = v->frame_index;
    if (v->action == Action::TaskComplete) report.completion_index = v->frame_index;
    report.verdicts.push_back(std::move(*v));
  }
  report.final_action = det.latched_action();

  if (!series.labels.empty()) {
    int64_t onset = series.labels.front().onset_index;
    report.label_tag = series.labels.front().tag;
    for (const auto& l : series.labels) onset = std::min(onset, l.onset_index);
    report.labeled_onset = onset;
    if (report.first_detection) {
      report.latency_ms =
          double(*report.first_detection - onset) / series.sample_rate * 1000.0;
      report.early_detection = *report.latency_ms <= 0.0;
    }
  }
  return report;
}

}  // namespace aemon
