#include "aemon/preprocessing.hpp"

#include <cmath>
#include <unordered_set>

namespace aemon {

const char* to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Force: return "force";
    case ChannelKind::Torque: return "torque";
    case ChannelKind::JointPosition: return "joint_position";
    case ChannelKind::JointVelocity: return "joint_velocity";
    case ChannelKind::JointTorque: return "joint_torque";
    case ChannelKind::Pose: return "pose";
    case ChannelKind::Gripper: return "gripper";
    case ChannelKind::Other: return "other";
  }
  return "other";
}

ChannelKind channel_kind_from_string(const std::string& s) {
  if (s == "force") return ChannelKind::Force;
  if (s == "torque") return ChannelKind::Torque;
  if (s == "joint_position") return ChannelKind::JointPosition;
  if (s == "joint_velocity") return ChannelKind::JointVelocity;
  if (s == "joint_torque") return ChannelKind::JointTorque;
  if (s == "pose") return ChannelKind::Pose;
  if (s == "gripper") return ChannelKind::Gripper;
  if (s == "other") return ChannelKind::Other;
  throw InputError("unknown channel kind: " + s);
}

void TimeSeries::validate() const {
  if (channels.empty()) throw InputError("time series has no channels");
  if (data.empty()) throw InputError("time series has no samples");
  if (data.size() % channels.size() != 0)
    throw InputError("time series data size is not a multiple of channel count");
  if (sample_rate <= 0.0) throw InputError("sample rate must be positive");
  std::unordered_set<std::string> names;
  for (const auto& c : channels)
    if (!names.insert(c.name).second)
      throw InputError("duplicate channel name: " + c.name);
  for (float v : data)
    if (!std::isfinite(v)) throw InputError("time series contains a non-finite sample");
  const int64_t len = length();
  for (const auto& l : labels)
    if (l.onset_index < 0 || l.onset_index >= len)
      throw InputError("label onset " + std::to_string(l.onset_index) +
                       " outside series of length " + std::to_string(len));
}

NormStats fit_norm(const std::vector<TimeSeries>& train) {
  if (train.empty()) throw InputError("fit_norm: no training series");
  const auto& schema = train.front().channels;
  for (const auto& s : train) {
    if (s.channels != schema)
      throw InputError("fit_norm: series channel schemas differ");
    s.validate();
  }
  const int n = int(schema.size());
  std::vector<double> sum(n, 0.0);
  int64_t count = 0;
  for (const auto& s : train) {
    const int64_t len = s.length();
    for (int64_t t = 0; t < len; ++t)
      for (int c = 0; c < n; ++c) sum[c] += double(s.at(t, c));
    count += len;
  }
  NormStats stats;
  stats.mean.resize(n);
  stats.std_dev.resize(n);
  for (int c = 0; c < n; ++c) stats.mean[c] = sum[c] / double(count);
  std::vector<double> sq(n, 0.0);
  for (const auto& s : train) {
    const int64_t len = s.length();
    for (int64_t t = 0; t < len; ++t)
      for (int c = 0; c < n; ++c) {
        const double d = double(s.at(t, c)) - stats.mean[c];
        sq[c] += d * d;
      }
  }
  for (int c = 0; c < n; ++c) {
    double var = sq[c] / double(count);
    stats.std_dev[c] = std::max(std::sqrt(var), NormStats::kStdFloor);
  }
  return stats;
}

int64_t window_count(int64_t series_length, int window_length, int stride) {
  if (series_length < window_length) return 0;
  return (series_length - window_length) / stride + 1;
}

std::vector<Window> make_windows(const TimeSeries& series, const NormStats& stats,
                                 int window_length, int stride) {
  if (window_length < 1) throw InputError("make_windows: window length must be >= 1");
  if (stride < 1) throw InputError("make_windows: stride must be >= 1");
  const int n = series.channel_count();
  if (stats.channel_count() != n)
    throw InputError("make_windows: normalization stats channel count mismatch");
  const int64_t len = series.length();
  if (len < window_length)
    throw InputError("make_windows: series length " + std::to_string(len) +
                     " shorter than window " + std::to_string(window_length));
  const int64_t count = window_count(len, window_length, stride);
  std::vector<Window> windows;
  windows.reserve(size_t(count));
  for (int64_t k = 0; k < count; ++k) {
    Window w;
    w.start_index = window_length - 1 + k * stride;
    w.length = window_length;
    w.channels = n;
    w.values.resize(size_t(window_length) * n);
    const int64_t first = w.start_index - window_length + 1;
    for (int t = 0; t < window_length; ++t)
      for (int c = 0; c < n; ++c)
        w.values[size_t(t) * n + c] = float(stats.normalize(double(series.at(first + t, c)), c));
    windows.push_back(std::move(w));
  }
  return windows;
}

std::vector<float> flatten_window(const Window& w) { return w.values; }

Window unflatten_window(const std::vector<float>& flat, int window_length, int channels,
                        int64_t start_index) {
  if (int64_t(flat.size()) != int64_t(window_length) * channels)
    throw InputError("unflatten_window: size does not match [T x n]");
  Window w;
  w.start_index = start_index;
  w.length = window_length;
  w.channels = channels;
  w.values = flat;
  return w;
}

TimeSeries select_channels(const TimeSeries& series, const std::vector<int>& indices) {
  if (indices.empty()) throw InputError("select_channels: no channels selected");
  const int n = series.channel_count();
  for (int i : indices)
    if (i < 0 || i >= n)
      throw InputError("select_channels: index " + std::to_string(i) + " out of range");
  TimeSeries out;
  out.sample_rate = series.sample_rate;
  out.labels = series.labels;
  for (int i : indices) out.channels.push_back(series.channels[size_t(i)]);
  const int64_t len = series.length();
  out.data.reserve(size_t(len) * indices.size());
  for (int64_t t = 0; t < len; ++t)
    for (int i : indices) out.data.push_back(series.at(t, i));
  return out;
}

}  // namespace aemon
