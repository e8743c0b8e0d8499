#pragma once

// Raw multichannel series -> normalized sliding windows and back.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aemon/errors.hpp"

namespace aemon {

enum class ChannelKind {
  Force,
  Torque,
  JointPosition,
  JointVelocity,
  JointTorque,
  Pose,
  Gripper,
  Other,
};

const char* to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(const std::string& s);

struct Channel {
  std::string name;
  ChannelKind kind = ChannelKind::Other;

  bool operator==(const Channel&) const = default;
};

struct AnomalyLabel {
  int64_t onset_index = 0;
  std::string tag;
};

// Uniformly sampled n-channel signal, data row-major [length x n].
struct TimeSeries {
  double sample_rate = 500.0;
  std::vector<Channel> channels;
  std::vector<float> data;
  std::vector<AnomalyLabel> labels;

  int64_t length() const {
    return channels.empty() ? 0 : int64_t(data.size()) / int64_t(channels.size());
  }
  int channel_count() const { return int(channels.size()); }

  float at(int64_t row, int ch) const { return data[size_t(row) * channels.size() + ch]; }
  float& at(int64_t row, int ch) { return data[size_t(row) * channels.size() + ch]; }

  // Checks the structural invariants; throws InputError on violation.
  void validate() const;
};

// Per-channel z-score statistics, fitted on nominal data only.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> std_dev;  // floored at kStdFloor

  static constexpr double kStdFloor = 1e-6;

  int channel_count() const { return int(mean.size()); }
  double normalize(double x, int ch) const { return (x - mean[ch]) / std_dev[ch]; }
  double denormalize(double z, int ch) const { return z * std_dev[ch] + mean[ch]; }
};

// A normalized [T x n] slice ending at series row start_index.
struct Window {
  int64_t start_index = 0;  // index of the last sample in the window
  int length = 0;           // T
  int channels = 0;         // n
  std::vector<float> values;  // time-major [T x n]

  float at(int t, int ch) const { return values[size_t(t) * channels + ch]; }
  float& at(int t, int ch) { return values[size_t(t) * channels + ch]; }
};

// Population statistics over all samples of all series concatenated.
// All series must share the channel schema.
NormStats fit_norm(const std::vector<TimeSeries>& train);

// Windows with end indices T-1, T-1+stride, ...; count floor((L-T)/stride)+1.
std::vector<Window> make_windows(const TimeSeries& series, const NormStats& stats,
                                 int window_length, int stride = 1);

int64_t window_count(int64_t series_length, int window_length, int stride);

// Time-major flattening: [T x n] -> [T*n], row t=0 first. Exact inverse.
std::vector<float> flatten_window(const Window& w);
Window unflatten_window(const std::vector<float>& flat, int window_length, int channels,
                        int64_t start_index = 0);

// Projection onto a subset of channels (indices into series.channels),
// preserving order, labels and sample rate.
TimeSeries select_channels(const TimeSeries& series, const std::vector<int>& indices);

}  // namespace aemon
