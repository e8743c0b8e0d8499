#include "aemon/synthdata.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "aemon/dataset_io.hpp"
#include "aemon/nn.hpp"

namespace aemon::synth {

using nn::Rng;

namespace {

constexpr double kPi = 3.14159265358979323846;

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

// Seed streams within one run.
enum Stream : uint64_t {
  kLayoutStream = 2001,
  kNoiseStream = 2002,
  kJitterStream = 2003,
  kOnsetStream = 3001,
  kFailureStream = 3002,
};

bool force_like(ChannelKind k) { return k == ChannelKind::Force || k == ChannelKind::Torque; }
bool position_like(ChannelKind k) {
  return k == ChannelKind::JointPosition || k == ChannelKind::JointVelocity ||
         k == ChannelKind::Pose;
}

// Fixed per (profile, channel): the task's signal shape.
struct ChanModel {
  ChannelKind kind = ChannelKind::Other;
  double plateau = 0.0;     // contact-phase level (force-like)
  double ripple_amp = 0.0;  // process oscillation on top of the plateau
  double ripple_hz = 0.0;
  double sigma = 0.0;             // noise sigma at contact
  std::array<double, 5> way{};    // waypoints at phase boundaries (position-like)
  // Per-run jitter, filled by resolve_run.
  double amp = 1.0;
  double phase = 0.0;
  std::array<double, 5> way_jitter{};
};

ChanModel chan_model(const TaskProfile& profile, int ci) {
  Rng rng(Rng::mix(fnv1a(profile.name), 5000 + uint64_t(ci)));
  ChanModel m;
  m.kind = profile.channels[size_t(ci)].kind;
  const std::string& name = profile.channels[size_t(ci)].name;
  switch (m.kind) {
    case ChannelKind::Force:
      if (name.size() && name.back() == 'z') {
        m.plateau = -(10.0 + 8.0 * rng.uniform01());  // main process force
      } else {
        m.plateau = (0.8 + 1.7 * rng.uniform01()) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
      }
      m.ripple_amp = 0.2 + 0.7 * rng.uniform01();
      m.ripple_hz = 1.5 + 2.5 * rng.uniform01();
      m.sigma = 0.25 + 0.25 * rng.uniform01();
      break;
    case ChannelKind::Torque:
      m.plateau = (0.2 + 0.6 * rng.uniform01()) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
      m.ripple_amp = 0.04 + 0.08 * rng.uniform01();
      m.ripple_hz = 1.5 + 2.5 * rng.uniform01();
      m.sigma = 0.02 + 0.03 * rng.uniform01();
      break;
    case ChannelKind::JointPosition:
    case ChannelKind::JointVelocity:
    case ChannelKind::JointTorque:
      for (auto& w : m.way) w = -1.0 + 2.0 * rng.uniform01();
      m.way[3] = m.way[2] + 0.05 * (2.0 * rng.uniform01() - 1.0);  // near-static contact
      m.sigma = 0.003;
      break;
    case ChannelKind::Pose:
      for (auto& w : m.way) w = -0.3 + 0.6 * rng.uniform01();
      m.way[3] = m.way[2] + 0.01 * (2.0 * rng.uniform01() - 1.0);
      m.sigma = 0.0008;
      break;
    case ChannelKind::Gripper:
    case ChannelKind::Other:
      m.sigma = 0.01;
      break;
  }
  return m;
}

struct RunComponents {
  RunLayout layout;
  int n = 0;
  std::vector<ChanModel> chans;
  std::vector<double> base;   // [L x n], noise-free
  std::vector<double> noise;  // [L x n]
  std::vector<double> phase_noise_factor;
  std::vector<int> phase_of;  // phase index per sample
};

RunLayout make_layout(const TaskProfile& profile, uint64_t seed) {
  Rng rng(Rng::mix(seed, kLayoutStream));
  const double sigma = std::sqrt(profile.duration_var_s2);
  double duration = profile.duration_mean_s + sigma * rng.gaussian();
  duration = std::clamp(duration, 0.25 * profile.duration_mean_s, 4.0 * profile.duration_mean_s);
  RunLayout layout;
  layout.duration_s = duration;
  layout.length = std::max<int64_t>(int64_t(std::llround(duration * profile.sample_rate)),
                                    int64_t(4 * profile.phases.size()));
  double cum = 0.0;
  for (const auto& p : profile.phases) {
    layout.phase_start.push_back(int64_t(std::llround(cum * double(layout.length))));
    cum += p.fraction;
  }
  return layout;
}

// Contact envelope: 0 while free, ramps across approach, 1 in contact,
// decays over the first 40% of retreat. Phases are indexed free=0,
// approach=1, contact=2, retreat=3.
double contact_envelope(int phase, double tau) {
  switch (phase) {
    case 0: return 0.0;
    case 1: return smoothstep(tau);
    case 2: return 1.0;
    default: return 1.0 - smoothstep(tau / 0.4);
  }
}

RunComponents generate_components(const TaskProfile& profile, uint64_t seed) {
  profile.validate();
  RunComponents rc;
  rc.layout = make_layout(profile, seed);
  rc.n = int(profile.channels.size());
  const int64_t L = rc.layout.length;
  rc.base.assign(size_t(L) * rc.n, 0.0);
  rc.noise.assign(size_t(L) * rc.n, 0.0);
  for (const auto& p : profile.phases) rc.phase_noise_factor.push_back(p.noise_factor);

  rc.phase_of.resize(size_t(L));
  {
    size_t p = 0;
    for (int64_t t = 0; t < L; ++t) {
      while (p + 1 < rc.layout.phase_start.size() && t >= rc.layout.phase_start[p + 1]) ++p;
      rc.phase_of[size_t(t)] = int(p);
    }
  }

  Rng jitter(Rng::mix(seed, kJitterStream));
  rc.chans.reserve(size_t(rc.n));
  for (int c = 0; c < rc.n; ++c) {
    ChanModel m = chan_model(profile, c);
    m.amp = 1.0 + 0.03 * jitter.gaussian();
    m.phase = 2.0 * kPi * jitter.uniform01();
    for (auto& wj : m.way_jitter) wj = 0.02 * jitter.gaussian();
    rc.chans.push_back(m);
  }

  const auto& starts = rc.layout.phase_start;
  auto phase_pos = [&](int64_t t, int p) {
    const int64_t s = starts[size_t(p)];
    const int64_t e = (size_t(p) + 1 < starts.size()) ? starts[size_t(p) + 1] : L;
    return e > s ? double(t - s) / double(e - s) : 0.0;
  };

  for (int c = 0; c < rc.n; ++c) {
    const ChanModel& m = rc.chans[size_t(c)];
    for (int64_t t = 0; t < L; ++t) {
      const int p = rc.phase_of[size_t(t)];
      const double tau = phase_pos(t, p);
      double v = 0.0;
      if (force_like(m.kind)) {
        const double e = contact_envelope(p, tau);
        const double ts = double(t) / profile.sample_rate;
        v = m.amp * e *
            (m.plateau + m.ripple_amp * std::sin(2.0 * kPi * m.ripple_hz * ts + m.phase));
      } else if (position_like(m.kind)) {
        const double w0 = m.way[size_t(p)] + m.way_jitter[size_t(p)];
        const double w1 = m.way[size_t(p) + 1] + m.way_jitter[size_t(p) + 1];
        v = w0 + (w1 - w0) * smoothstep(tau);
      }
      rc.base[size_t(t) * rc.n + c] = v;
    }
  }

  Rng noise(Rng::mix(seed, kNoiseStream));
  for (int64_t t = 0; t < L; ++t) {
    const double pf = rc.phase_noise_factor[size_t(rc.phase_of[size_t(t)])];
    for (int c = 0; c < rc.n; ++c)
      rc.noise[size_t(t) * rc.n + c] = rc.chans[size_t(c)].sigma * pf * noise.gaussian();
  }
  return rc;
}

TimeSeries assemble(const TaskProfile& profile, const RunComponents& rc) {
  TimeSeries series;
  series.sample_rate = profile.sample_rate;
  series.channels = profile.channels;
  series.data.resize(rc.base.size());
  for (size_t i = 0; i < rc.base.size(); ++i)
    series.data[i] = float(rc.base[i] + rc.noise[i]);
  return series;
}

// Ramp that is already non-zero at the onset sample itself.
double onset_ramp(int64_t t, int64_t onset, double ramp_len) {
  return smoothstep(double(t - onset + 1) / ramp_len);
}

void inject_failure(RunComponents& rc, const TaskProfile& profile, const FailureSpec& spec,
                    int64_t onset, uint64_t seed) {
  Rng rng(Rng::mix(seed, kFailureStream));
  const int64_t L = rc.layout.length;
  const int n = rc.n;
  const double M = spec.magnitude;
  const double ramp = 25.0;

  // Per-channel signed directions, drawn once.
  std::vector<double> dir(size_t(n));
  for (auto& d : dir) d = rng.uniform01() < 0.5 ? -1.0 : 1.0;

  auto for_rows = [&](auto&& fn) {
    for (int64_t t = onset; t < L; ++t)
      for (int c = 0; c < n; ++c) fn(t, c, rc.chans[size_t(c)].kind);
  };

  switch (spec.tag) {
    case FailureTag::DisturbanceSpike: {
      // Sharp transient that decays to a sustained residual: the contact
      // is pushed off its nominal track and stays off.
      const double tau = std::max(1.0, spec.duration_s * profile.sample_rate / 3.0);
      for_rows([&](int64_t t, int c, ChannelKind k) {
        const double decay = 0.85 * std::exp(-double(t - onset) / tau) + 0.15;
        double scale = 0.0;
        if (k == ChannelKind::Force) scale = 8.0;
        else if (k == ChannelKind::Torque) scale = 0.6;
        else if (k == ChannelKind::Pose) scale = 0.006;
        else if (position_like(k)) scale = 0.012;
        rc.base[size_t(t) * n + c] += dir[size_t(c)] * M * scale * decay;
      });
      break;
    }
    case FailureTag::MisalignmentOffset: {
      // Shifted contact geometry: constant force/pose offsets plus an
      // off-frequency ripple component.
      for_rows([&](int64_t t, int c, ChannelKind k) {
        const double r = onset_ramp(t, onset, ramp);
        const double ts = double(t) / profile.sample_rate;
        double add = 0.0;
        if (k == ChannelKind::Force) {
          const auto& m = rc.chans[size_t(c)];
          add = dir[size_t(c)] * M * 4.0 * r +
                M * 1.2 * r * std::sin(2.0 * kPi * (1.7 * m.ripple_hz) * ts + m.phase);
        } else if (k == ChannelKind::Torque) {
          add = dir[size_t(c)] * M * 0.3 * r;
        } else if (k == ChannelKind::Pose) {
          add = dir[size_t(c)] * M * 0.004 * r;
        } else if (position_like(k)) {
          add = dir[size_t(c)] * M * 0.008 * r;
        }
        rc.base[size_t(t) * n + c] += add;
      });
      break;
    }
    case FailureTag::MissingContact: {
      // No part in the gripper: the contact force never develops; the
      // free-motion trajectory continues slightly off-nominal.
      for_rows([&](int64_t t, int c, ChannelKind k) {
        const double r = onset_ramp(t, onset, ramp);
        const size_t i = size_t(t) * n + c;
        if (force_like(k)) {
          rc.base[i] *= (1.0 - r);
          rc.noise[i] = rc.chans[size_t(c)].sigma * rc.phase_noise_factor[0] * rng.gaussian();
        } else if (k == ChannelKind::Pose) {
          rc.base[i] += dir[size_t(c)] * M * 0.004 * r;
        } else if (position_like(k)) {
          rc.base[i] += dir[size_t(c)] * M * 0.008 * r;
        }
      });
      break;
    }
    case FailureTag::WrongPartProfile: {
      // Different part geometry: weaker plateau, different process
      // oscillation, slightly shifted pose.
      for_rows([&](int64_t t, int c, ChannelKind k) {
        const double r = onset_ramp(t, onset, ramp);
        const size_t i = size_t(t) * n + c;
        if (k == ChannelKind::Force || k == ChannelKind::Torque) {
          const auto& m = rc.chans[size_t(c)];
          const double ts = double(t) / profile.sample_rate;
          rc.base[i] *= (1.0 - 0.45 * M * r);
          rc.base[i] += M * r * 0.35 * std::abs(m.plateau) *
                        std::sin(2.0 * kPi * (2.3 * m.ripple_hz) * ts + m.phase);
        } else if (k == ChannelKind::Pose) {
          rc.base[i] += dir[size_t(c)] * M * 0.002 * r;
        }
      });
      break;
    }
    case FailureTag::ObstructedTarget: {
      // Blocked target: force overshoot while the pose path stalls.
      std::vector<double> frozen(size_t(n));
      for (int c = 0; c < n; ++c) frozen[size_t(c)] = rc.base[size_t(onset) * n + c];
      for_rows([&](int64_t t, int c, ChannelKind k) {
        const double r = onset_ramp(t, onset, ramp);
        const size_t i = size_t(t) * n + c;
        if (force_like(k)) {
          rc.base[i] *= (1.0 + 0.8 * M * r);
        } else if (position_like(k)) {
          rc.base[i] = (1.0 - r) * rc.base[i] + r * frozen[size_t(c)];
        }
      });
      break;
    }
    case FailureTag::TextureChange: {
      // Different surface state: noisier contact with a stronger,
      // faster process oscillation.
      for_rows([&](int64_t t, int c, ChannelKind k) {
        const size_t i = size_t(t) * n + c;
        if (force_like(k)) {
          const auto& m = rc.chans[size_t(c)];
          const double ts = double(t) / profile.sample_rate;
          const double r = onset_ramp(t, onset, ramp);
          rc.noise[i] *= (1.0 + 2.0 * M * r);
          rc.base[i] += M * r * 0.6 * m.ripple_amp *
                        std::sin(2.0 * kPi * (1.9 * m.ripple_hz) * ts + m.phase);
        }
      });
      break;
    }
    case FailureTag::DisplacedObject: {
      // Object moved: trajectory offset plus delayed contact.
      const int64_t delay = int64_t(spec.duration_s * profile.sample_rate);
      std::vector<double> shifted(rc.base.size());
      for (int64_t t = onset; t < L; ++t)
        for (int c = 0; c < n; ++c) {
          const int64_t src = std::max<int64_t>(0, t - delay);
          shifted[size_t(t) * n + c] = rc.base[size_t(src) * n + c];
        }
      for_rows([&](int64_t t, int c, ChannelKind k) {
        const double r = onset_ramp(t, onset, ramp);
        const size_t i = size_t(t) * n + c;
        if (force_like(k)) {
          rc.base[i] = (1.0 - r) * rc.base[i] + r * shifted[i];
        } else if (position_like(k)) {
          rc.base[i] += dir[size_t(c)] * M * 0.003 * r;
        }
      });
      break;
    }
  }
}

}  // namespace

void TaskProfile::validate() const {
  if (channels.empty()) throw InputError("task profile has no channels");
  if (sample_rate <= 0.0) throw InputError("task profile: sample rate must be positive");
  if (duration_mean_s <= 0.0) throw InputError("task profile: duration must be positive");
  if (duration_var_s2 < 0.0) throw InputError("task profile: duration variance must be >= 0");
  if (phases.empty()) throw InputError("task profile has no phases");
  double sum = 0.0;
  for (const auto& p : phases) {
    if (p.fraction <= 0.0) throw InputError("task profile: phase fractions must be positive");
    sum += p.fraction;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw InputError("task profile: phase fractions must sum to 1");
}

void TaskProfile::scale_duration(double factor) {
  if (factor <= 0.0) throw InputError("duration scale must be positive");
  duration_mean_s *= factor;
  duration_var_s2 *= factor * factor;
}

namespace {

std::vector<Channel> robot_channels(int joints) {
  std::vector<Channel> ch;
  for (const char* axis : {"x", "y", "z"})
    ch.push_back({std::string("force_") + axis, ChannelKind::Force});
  for (const char* axis : {"x", "y", "z"})
    ch.push_back({std::string("torque_") + axis, ChannelKind::Torque});
  for (int i = 0; i < joints; ++i)
    ch.push_back({"joint_pos_" + std::to_string(i), ChannelKind::JointPosition});
  for (const char* axis : {"x", "y", "z", "rx", "ry", "rz"})
    ch.push_back({std::string("pose_") + axis, ChannelKind::Pose});
  return ch;
}

}  // namespace

TaskProfile TaskProfile::preset(const std::string& name) {
  TaskProfile p;
  p.name = name;
  if (name == "cabling_like") {
    p.channels = robot_channels(7);  // 6 F/T + 7 joints + 6 pose = 19
    p.duration_mean_s = 43.1;
    p.duration_var_s2 = 3.4;
    p.phases = {{"free_motion", 0.25, 0.3},
                {"approach", 0.15, 0.6},
                {"contact", 0.45, 1.0},
                {"retreat", 0.15, 0.4}};
  } else if (name == "screwing_like") {
    p.channels = robot_channels(6);
    p.duration_mean_s = 17.2;
    p.duration_var_s2 = 0.1;
    p.phases = {{"free_motion", 0.2, 0.3},
                {"approach", 0.1, 0.6},
                {"contact", 0.55, 1.0},
                {"retreat", 0.15, 0.4}};
  } else if (name == "polishing_like") {
    p.channels = robot_channels(6);
    p.duration_mean_s = 39.0;
    p.duration_var_s2 = 1.1;
    p.phases = {{"free_motion", 0.1, 0.3},
                {"approach", 0.1, 0.6},
                {"contact", 0.7, 1.0},
                {"retreat", 0.1, 0.4}};
  } else {
    throw InputError("unknown task profile preset: " + name);
  }
  return p;
}

const char* to_string(FailureTag t) {
  switch (t) {
    case FailureTag::DisturbanceSpike: return "disturbance_spike";
    case FailureTag::MisalignmentOffset: return "misalignment_offset";
    case FailureTag::MissingContact: return "missing_contact";
    case FailureTag::WrongPartProfile: return "wrong_part_profile";
    case FailureTag::ObstructedTarget: return "obstructed_target";
    case FailureTag::TextureChange: return "texture_change";
    case FailureTag::DisplacedObject: return "displaced_object";
  }
  return "disturbance_spike";
}

FailureTag failure_tag_from_string(const std::string& s) {
  if (s == "disturbance_spike") return FailureTag::DisturbanceSpike;
  if (s == "misalignment_offset") return FailureTag::MisalignmentOffset;
  if (s == "missing_contact") return FailureTag::MissingContact;
  if (s == "wrong_part_profile") return FailureTag::WrongPartProfile;
  if (s == "obstructed_target") return FailureTag::ObstructedTarget;
  if (s == "texture_change") return FailureTag::TextureChange;
  if (s == "displaced_object") return FailureTag::DisplacedObject;
  throw InputError("unknown failure tag: " + s);
}

FailureSpec FailureSpec::preset(FailureTag tag) {
  FailureSpec s;
  s.tag = tag;
  switch (tag) {
    case FailureTag::DisturbanceSpike:
      s.duration_s = 0.4;
      s.onset_phase = 2;
      s.onset_lo = 0.1;
      s.onset_hi = 0.7;
      break;
    case FailureTag::MisalignmentOffset:
      s.onset_phase = 1;
      s.onset_lo = 0.6;
      s.onset_hi = 0.9;
      break;
    case FailureTag::MissingContact:
      s.onset_phase = 1;
      s.onset_lo = 0.0;
      s.onset_hi = 0.05;
      break;
    case FailureTag::WrongPartProfile:
      s.onset_phase = 2;
      s.onset_lo = 0.0;
      s.onset_hi = 0.05;
      break;
    case FailureTag::ObstructedTarget:
      s.onset_phase = 2;
      s.onset_lo = 0.0;
      s.onset_hi = 0.1;
      break;
    case FailureTag::TextureChange:
      s.onset_phase = 2;
      s.onset_lo = 0.0;
      s.onset_hi = 0.1;
      break;
    case FailureTag::DisplacedObject:
      s.duration_s = 0.3;
      s.onset_phase = 1;
      s.onset_lo = 0.2;
      s.onset_hi = 0.5;
      break;
  }
  return s;
}

RunLayout layout_for(const TaskProfile& profile, uint64_t seed) {
  profile.validate();
  return make_layout(profile, seed);
}

int64_t onset_for(const TaskProfile& profile, const FailureSpec& spec, uint64_t seed) {
  if (spec.magnitude < 0.0) throw InputError("failure magnitude must be >= 0");
  if (spec.onset_phase < 0 || spec.onset_phase >= int(profile.phases.size()))
    throw InputError("failure onset phase outside the run's phase script");
  if (spec.onset_lo < 0.0 || spec.onset_hi > 1.0 || spec.onset_lo > spec.onset_hi)
    throw InputError("failure onset fraction range invalid");
  const RunLayout layout = layout_for(profile, seed);
  const int64_t start = layout.phase_start[size_t(spec.onset_phase)];
  const int64_t end = (size_t(spec.onset_phase) + 1 < layout.phase_start.size())
                          ? layout.phase_start[size_t(spec.onset_phase) + 1]
                          : layout.length;
  Rng rng(Rng::mix(seed, kOnsetStream));
  const double u = spec.onset_lo + (spec.onset_hi - spec.onset_lo) * rng.uniform01();
  int64_t onset = start + int64_t(u * double(end - start));
  onset = std::clamp<int64_t>(onset, start, end - 1);
  if (onset < 0 || onset >= layout.length)
    throw InputError("failure onset falls outside the run");
  return onset;
}

TimeSeries gen_nominal(const TaskProfile& profile, uint64_t seed) {
  return assemble(profile, generate_components(profile, seed));
}

TimeSeries gen_failure(const TaskProfile& profile, const FailureSpec& spec, uint64_t seed) {
  const int64_t onset = onset_for(profile, spec, seed);
  RunComponents rc = generate_components(profile, seed);
  inject_failure(rc, profile, spec, onset, seed);
  TimeSeries series = assemble(profile, rc);
  series.labels.push_back({onset, to_string(spec.tag)});
  return series;
}

ScenarioSpec scenario_preset(const std::string& name, int count) {
  ScenarioSpec s;
  s.name = name;
  s.count = count;
  std::string tag_name = name;
  double magnitude = 1.0;
  const std::string subtle = "_subtle";
  if (tag_name.size() > subtle.size() &&
      tag_name.compare(tag_name.size() - subtle.size(), subtle.size(), subtle) == 0) {
    tag_name = tag_name.substr(0, tag_name.size() - subtle.size());
    magnitude = 0.15;
  }
  s.failure = FailureSpec::preset(failure_tag_from_string(tag_name));
  s.failure.magnitude = magnitude;
  return s;
}

CorpusSpec default_corpus(const std::string& profile_name) {
  CorpusSpec c;
  c.profile = TaskProfile::preset(profile_name);
  if (profile_name == "cabling_like") {
    c.n_nominal = 20;
    for (const char* s : {"disturbance_spike", "misalignment_offset", "missing_contact",
                          "wrong_part_profile", "misalignment_offset_subtle"})
      c.scenarios.push_back(scenario_preset(s, 10));
  } else if (profile_name == "screwing_like") {
    c.n_nominal = 140;
    for (const char* s :
         {"missing_contact", "obstructed_target", "misalignment_offset", "wrong_part_profile"})
      c.scenarios.push_back(scenario_preset(s, 10));
  } else if (profile_name == "polishing_like") {
    c.n_nominal = 30;
    for (const char* s : {"disturbance_spike", "texture_change", "wrong_part_profile",
                          "displaced_object", "obstructed_target"})
      c.scenarios.push_back(scenario_preset(s, 10));
  } else {
    throw InputError("unknown task profile preset: " + profile_name);
  }
  return c;
}

void gen_corpus(const CorpusSpec& spec, const std::string& out_dir, uint64_t seed) {
  spec.profile.validate();
  if (spec.n_nominal < 1) throw InputError("corpus needs at least one nominal run");
  for (const auto& s : spec.scenarios)
    if (s.count < 1) throw InputError("scenario '" + s.name + "' has count < 1");

  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  std::error_code ec;
  fs::create_directories(root / "runs", ec);
  if (ec) throw IoError("cannot create corpus directory: " + (root / "runs").string());

  DatasetManifest manifest;
  manifest.sample_rate = spec.profile.sample_rate;
  manifest.channels = spec.profile.channels;

  char name[128];
  for (int i = 0; i < spec.n_nominal; ++i) {
    const uint64_t run_seed = Rng::mix(seed, 10000 + uint64_t(i));
    std::snprintf(name, sizeof name, "runs/nominal_%03d.csv", i);
    write_run(gen_nominal(spec.profile, run_seed), root / name);
    RunEntry e;
    e.path = name;
    e.kind = "nominal";
    e.seed = run_seed;
    manifest.runs.push_back(e);
  }
  for (size_t s = 0; s < spec.scenarios.size(); ++s) {
    const auto& scenario = spec.scenarios[s];
    for (int j = 0; j < scenario.count; ++j) {
      const uint64_t run_seed = Rng::mix(seed, 20000 + s * 1000 + uint64_t(j));
      std::snprintf(name, sizeof name, "runs/%s_%02d.csv", scenario.name.c_str(), j);
      TimeSeries series = gen_failure(spec.profile, scenario.failure, run_seed);
      write_run(series, root / name);
      RunEntry e;
      e.path = name;
      e.kind = "failure";
      e.scenario = scenario.name;
      e.tag = to_string(scenario.failure.tag);
      e.onset_index = series.labels.front().onset_index;
      e.seed = run_seed;
      manifest.runs.push_back(e);
    }
  }
  write_manifest(manifest, root / "manifest.json");
}

}  // namespace aemon::synth
