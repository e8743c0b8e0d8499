#pragma once

// Deterministic synthetic generator of contact-task-like multichannel
// runs: phase-scripted trajectories, contact-force plateaus, seeded
// noise, and a labeled failure taxonomy injected at known onsets.

#include <cstdint>
#include <string>
#include <vector>

#include "aemon/preprocessing.hpp"

namespace aemon::synth {

struct PhaseSpec {
  std::string name;
  double fraction = 0.0;      // of the run duration; fractions sum to 1
  double noise_factor = 1.0;  // multiplier on per-channel noise sigma
};

struct TaskProfile {
  std::string name;
  std::vector<Channel> channels;
  double sample_rate = 500.0;
  double duration_mean_s = 0.0;
  double duration_var_s2 = 0.0;
  std::vector<PhaseSpec> phases;

  void validate() const;
  // Presets: cabling_like, screwing_like, polishing_like.
  static TaskProfile preset(const std::string& name);
  // Shrinks runs for desk-scale experiments; variance scales with factor^2.
  void scale_duration(double factor);
};

enum class FailureTag {
  DisturbanceSpike,
  MisalignmentOffset,
  MissingContact,
  WrongPartProfile,
  ObstructedTarget,
  TextureChange,
  DisplacedObject,
};

const char* to_string(FailureTag t);
FailureTag failure_tag_from_string(const std::string& s);

struct FailureSpec {
  FailureTag tag = FailureTag::DisturbanceSpike;
  double magnitude = 1.0;  // scales the tag's designed deltas; >= 0
  double duration_s = 0.4;  // transient time constant where applicable
  int onset_phase = 2;      // phase the onset is drawn in
  double onset_lo = 0.1;    // uniform position within that phase
  double onset_hi = 0.7;

  static FailureSpec preset(FailureTag tag);
};

struct RunLayout {
  int64_t length = 0;
  double duration_s = 0.0;
  std::vector<int64_t> phase_start;  // one entry per phase
};

// Duration and phase boundaries a given seed will produce.
RunLayout layout_for(const TaskProfile& profile, uint64_t seed);

// Onset sample a given (failure, seed) pair will use.
int64_t onset_for(const TaskProfile& profile, const FailureSpec& spec, uint64_t seed);

TimeSeries gen_nominal(const TaskProfile& profile, uint64_t seed);

// Same underlying run as gen_nominal(profile, seed); samples at or after
// the onset carry the perturbation, everything before is bit-identical.
TimeSeries gen_failure(const TaskProfile& profile, const FailureSpec& spec, uint64_t seed);

struct ScenarioSpec {
  std::string name;  // e.g. "misalignment_offset_subtle"
  FailureSpec failure;
  int count = 0;
};

// Scenario names are failure tags, optionally with a "_subtle" suffix
// that scales the magnitude down to 0.15x.
ScenarioSpec scenario_preset(const std::string& name, int count);

struct CorpusSpec {
  TaskProfile profile;
  int n_nominal = 0;
  std::vector<ScenarioSpec> scenarios;
};

// Run counts mirroring the presets' task mix.
CorpusSpec default_corpus(const std::string& profile_name);

// Writes runs/*.csv plus manifest.json under out_dir; byte-identical when
// regenerated with the same spec and seed.
void gen_corpus(const CorpusSpec& spec, const std::string& out_dir, uint64_t seed);

}  // namespace aemon::synth
