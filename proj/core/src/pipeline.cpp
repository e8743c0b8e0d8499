#include "aemon/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace aemon::pipeline {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string PipelineOptions::canonical_string() const {
  std::ostringstream os;
  os << "variant=" << to_string(variant) << ";hidden=";
  for (size_t i = 0; i < hidden_widths.size(); ++i)
    os << (i ? "," : "") << hidden_widths[i];
  os << ";latent=" << latent_dim << ";conv=";
  for (size_t i = 0; i < conv.size(); ++i)
    os << (i ? "," : "") << conv[i].out_channels << ':' << conv[i].kernel << ':'
       << conv[i].stride;
  os << ";T=" << window_length << ";train_stride=" << train_stride
     << ";eval_stride=" << eval_stride << ";holdout=" << fmt(holdout_fraction)
     << ";epochs=" << train.epochs << ";batch=" << train.batch_size
     << ";lr=" << fmt(train.learning_rate) << ";beta=" << fmt(train.kl_weight)
     << ";seed=" << train.seed << ";shuffle=" << (train.shuffle ? 1 : 0)
     << ";sample=" << (train.sample_latent ? 1 : 0) << ";tol=" << fmt(tolerance_factor);
  return os.str();
}

NominalSplit split_nominal(const Corpus& corpus, double holdout_fraction) {
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0)
    throw InputError("holdout fraction must lie in [0, 1)");
  std::vector<const LoadedRun*> nominal;
  for (const auto& r : corpus.runs)
    if (r.entry.kind == "nominal") nominal.push_back(&r);
  if (nominal.size() < 2)
    throw InputError("corpus needs at least two nominal runs to split");
  size_t holdout = size_t(std::ceil(holdout_fraction * double(nominal.size())));
  holdout = std::clamp<size_t>(holdout, 1, nominal.size() - 1);
  NominalSplit split;
  split.train.assign(nominal.begin(), nominal.end() - long(holdout));
  split.holdout.assign(nominal.end() - long(holdout), nominal.end());
  return split;
}

std::string hash_corpus(const Corpus& corpus) {
  uint64_t h = 0xcbf29ce484222325ull;
  const auto manifest_hash = hash_file(corpus.root / "manifest.json");
  h = fnv1a_bytes(manifest_hash.data(), manifest_hash.size(), h);
  for (const auto& r : corpus.runs) {
    const auto rh = hash_file(corpus.root / r.entry.path);
    h = fnv1a_bytes(rh.data(), rh.size(), h);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

ArchitectureSpec spec_from_options(const PipelineOptions& options, int channels) {
  ArchitectureSpec spec;
  spec.variant = options.variant;
  spec.window_length = options.window_length;
  spec.channels = channels;
  spec.hidden_widths = options.hidden_widths;
  spec.latent_dim = options.latent_dim;
  spec.conv = options.conv;
  return spec;
}

std::vector<Window> windows_of_runs(const std::vector<const LoadedRun*>& runs,
                                    const NormStats& norm, int window_length, int stride) {
  std::vector<Window> windows;
  for (const auto* r : runs) {
    auto w = make_windows(r->series, norm, window_length, stride);
    windows.insert(windows.end(), std::make_move_iterator(w.begin()),
                   std::make_move_iterator(w.end()));
  }
  return windows;
}

// Trains on an explicit run subset; shared by the full pipeline and the
// data-efficiency sweep. Returns nullopt when the subset cannot fill one
// batch of windows.
std::optional<ModelArtifact> train_runs(const Corpus& corpus, const PipelineOptions& options,
                                        const std::vector<const LoadedRun*>& train,
                                        const std::vector<const LoadedRun*>& holdout) {
  std::vector<TimeSeries> train_series;
  train_series.reserve(train.size());
  for (const auto* r : train) train_series.push_back(r->series);
  const NormStats norm = fit_norm(train_series);

  std::vector<Window> windows =
      windows_of_runs(train, norm, options.window_length, options.train_stride);
  if (int(windows.size()) < options.train.batch_size) return std::nullopt;

  TrainConfig config = options.train;
  config.window_length = options.window_length;
  ArchitectureSpec spec =
      spec_from_options(options, int(corpus.manifest.channels.size()));
  auto [bundle, record] = aemon::train(spec, config, windows, norm);
  (void)record;

  ModelArtifact artifact;
  artifact.bundle = std::move(bundle);
  artifact.channels = corpus.manifest.channels;
  artifact.sample_rate = corpus.manifest.sample_rate;
  artifact.provenance.seed = config.seed;
  artifact.provenance.config_hash = hash_string(options.canonical_string());
  artifact.provenance.corpus_hash = hash_corpus(corpus);
  for (const auto* r : holdout) artifact.provenance.holdout_runs.push_back(r->entry.path);
  return artifact;
}

std::vector<const LoadedRun*> holdout_runs_of(const ModelArtifact& artifact,
                                              const Corpus& corpus) {
  std::set<std::string> holdout(artifact.provenance.holdout_runs.begin(),
                                artifact.provenance.holdout_runs.end());
  std::vector<const LoadedRun*> runs;
  for (const auto& r : corpus.runs)
    if (holdout.count(r.entry.path)) runs.push_back(&r);
  if (runs.empty())
    throw InputError(
        "artifact records no calibration holdout runs present in this corpus");
  return runs;
}

std::string scenario_of(const RunEntry& e) {
  return e.scenario.empty() ? e.tag : e.scenario;
}

}  // namespace

ModelArtifact train_on_corpus(const Corpus& corpus, const PipelineOptions& options) {
  const NominalSplit split = split_nominal(corpus, options.holdout_fraction);
  auto artifact = train_runs(corpus, options, split.train, split.holdout);
  if (!artifact)
    throw InputError("training set yields fewer windows than one batch; "
                     "reduce batch size or stride");
  return std::move(*artifact);
}

void calibrate_artifact(ModelArtifact& artifact, const Corpus& corpus,
                        double tolerance_factor, int stride) {
  const auto holdout = holdout_runs_of(artifact, corpus);
  std::vector<TimeSeries> series;
  for (const auto* r : holdout) series.push_back(r->series);
  artifact.profile = calibrate(artifact.bundle, series, tolerance_factor, stride);
}

void calibrate_dual_artifact(ModelArtifact& artifact, const Corpus& corpus,
                             const std::string& rough_scenario, double tolerance_factor,
                             int stride) {
  const auto holdout = holdout_runs_of(artifact, corpus);
  std::vector<TimeSeries> target;
  for (const auto* r : holdout) target.push_back(r->series);
  std::vector<TimeSeries> rough;
  for (const auto& r : corpus.runs)
    if (r.entry.kind == "failure" && scenario_of(r.entry) == rough_scenario)
      rough.push_back(r.series);
  if (rough.empty())
    throw InputError("no failure runs found for rough scenario '" + rough_scenario + "'");
  artifact.profile =
      calibrate_dual(artifact.bundle, rough, target, tolerance_factor, stride);
}

RunScores score_series(const ModelBundle& model, const TimeSeries& series, int stride) {
  RunScores scores;
  if (!series.labels.empty()) {
    int64_t onset = series.labels.front().onset_index;
    for (const auto& l : series.labels) onset = std::min(onset, l.onset_index);
    scores.onset = onset;
  }
  const auto windows = make_windows(series, model.norm, model.spec.window_length, stride);
  scores.window_end.reserve(windows.size());
  scores.mean_abs.reserve(windows.size());
  scores.per_feature.reserve(windows.size());
  for (const auto& w : windows) {
    WindowError e = window_error(model, w);
    scores.window_end.push_back(w.start_index);
    scores.mean_abs.push_back(e.mean_abs);
    scores.per_feature.push_back(std::move(e.per_feature));
  }
  return scores;
}

bool window_positive(const RunScores& scores, size_t window_idx) {
  return scores.onset && scores.window_end[window_idx] >= *scores.onset;
}

namespace {

struct ScenarioScores {
  std::string scenario;
  std::string tag;
  std::vector<RunScores> runs;
  std::vector<const LoadedRun*> loaded;
};

void append_run_points(const RunScores& r, ScoredSet& set) {
  for (size_t i = 0; i < r.mean_abs.size(); ++i)
    set.points.push_back({r.mean_abs[i], window_positive(r, i)});
}

}  // namespace

ScoredSet pooled_scored_set(const ModelArtifact& artifact, const Corpus& corpus,
                            int eval_stride, const std::string& scenario_filter) {
  ScoredSet set;
  for (const auto* r : holdout_runs_of(artifact, corpus))
    append_run_points(score_series(artifact.bundle, r->series, eval_stride), set);
  for (const auto& r : corpus.runs) {
    if (r.entry.kind != "failure") continue;
    if (!scenario_filter.empty() && scenario_of(r.entry) != scenario_filter) continue;
    append_run_points(score_series(artifact.bundle, r.series, eval_stride), set);
  }
  return set;
}

EvaluationTable evaluate_corpus(const ModelArtifact& artifact, const Corpus& corpus,
                                int eval_stride) {
  if (!artifact.profile)
    throw InputError("evaluate: the model artifact has no threshold profile; calibrate first");

  const auto holdout = holdout_runs_of(artifact, corpus);
  std::vector<RunScores> negative_scores;
  for (const auto* r : holdout)
    negative_scores.push_back(score_series(artifact.bundle, r->series, eval_stride));

  // Scenario grouping in manifest order.
  std::vector<ScenarioScores> scenarios;
  std::map<std::string, size_t> index;
  for (const auto& r : corpus.runs) {
    if (r.entry.kind != "failure") continue;
    const std::string name = scenario_of(r.entry);
    auto it = index.find(name);
    if (it == index.end()) {
      index[name] = scenarios.size();
      scenarios.push_back({name, r.entry.tag, {}, {}});
      it = index.find(name);
    }
    scenarios[it->second].runs.push_back(
        score_series(artifact.bundle, r.series, eval_stride));
    scenarios[it->second].loaded.push_back(&r);
  }

  ScoredSet pooled;
  for (const auto& n : negative_scores) append_run_points(n, pooled);
  for (const auto& s : scenarios)
    for (const auto& r : s.runs) append_run_points(r, pooled);
  const BestF1 global_best = best_f1_threshold(pooled);

  EvaluationTable table;
  for (const auto& s : scenarios) {
    EvaluationRow row;
    row.scenario = s.scenario;
    row.tag = s.tag;
    row.runs = int(s.runs.size());

    ScoredSet set;
    for (const auto& n : negative_scores) append_run_points(n, set);
    for (const auto& r : s.runs) append_run_points(r, set);
    row.windows_pos = set.positives();
    row.windows_neg = set.negatives();

    row.f1_ours = prf(confusion(set, artifact.profile->aggregate)).f1;
    row.f1_max = best_f1_threshold(set).f1;
    row.f1_global = prf(confusion(set, global_best.threshold)).f1;
    row.auroc_window = roc_auroc(set).auroc;

    ScoredSet run_level;
    run_level.granularity = "run";
    for (const auto& n : negative_scores) {
      const double score =
          n.mean_abs.empty() ? 0.0 : *std::max_element(n.mean_abs.begin(), n.mean_abs.end());
      run_level.points.push_back({score, false});
    }
    for (const auto& r : s.runs) {
      const double score =
          r.mean_abs.empty() ? 0.0 : *std::max_element(r.mean_abs.begin(), r.mean_abs.end());
      run_level.points.push_back({score, true});
    }
    row.auroc_run = roc_auroc(run_level).auroc;

    std::vector<DetectionReport> reports;
    for (const auto* lr : s.loaded)
      reports.push_back(run_offline(artifact.bundle, *artifact.profile, lr->series, {}));
    const LatencySummary lat = latency_stats(reports);
    row.avg_latency_ms = lat.mean_ms;
    row.detected_runs = int(lat.detected);
    row.undetected_runs = int(lat.undetected);
    row.early_flags = int(lat.early_flagged);

    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string EvaluationTable::to_csv() const {
  std::string out =
      "scenario,tag,runs,windows_pos,windows_neg,f1_ours,f1_max,f1_global,"
      "auroc_window,auroc_run,avg_latency_ms,detected_runs,undetected_runs,early_flags\n";
  for (const auto& r : rows) {
    out += r.scenario + ',' + r.tag + ',' + std::to_string(r.runs) + ',' +
           std::to_string(r.windows_pos) + ',' + std::to_string(r.windows_neg) + ',' +
           fmt(r.f1_ours) + ',' + fmt(r.f1_max) + ',' + fmt(r.f1_global) + ',' +
           fmt(r.auroc_window) + ',' + fmt(r.auroc_run) + ',' + fmt(r.avg_latency_ms) + ',' +
           std::to_string(r.detected_runs) + ',' + std::to_string(r.undetected_runs) + ',' +
           std::to_string(r.early_flags) + '\n';
  }
  return out;
}

std::vector<EfficiencyPoint> ablate_data_fractions(const Corpus& corpus,
                                                   const PipelineOptions& options,
                                                   const std::vector<double>& fractions,
                                                   const std::string& scenario_filter) {
  const NominalSplit split = split_nominal(corpus, options.holdout_fraction);
  auto train_eval = [&](double fraction) -> std::optional<ScoredSet> {
    const size_t k =
        std::max<size_t>(1, size_t(std::floor(fraction * double(split.train.size()))));
    std::vector<const LoadedRun*> subset(split.train.begin(),
                                         split.train.begin() + long(k));
    auto artifact = train_runs(corpus, options, subset, split.holdout);
    if (!artifact) return std::nullopt;
    return pooled_scored_set(*artifact, corpus, options.eval_stride, scenario_filter);
  };
  return data_efficiency(train_eval, fractions);
}

namespace {

AblationPoint run_ablation(const Corpus& corpus, const PipelineOptions& options,
                           const std::string& key, const std::string& scenario_filter) {
  AblationPoint point;
  point.key = key;
  try {
    ModelArtifact artifact = train_on_corpus(corpus, options);
    point.auroc =
        roc_auroc(pooled_scored_set(artifact, corpus, options.eval_stride, scenario_filter))
            .auroc;
  } catch (const Error&) {
    point.skipped = true;
  }
  return point;
}

}  // namespace

std::vector<AblationPoint> ablate_window_sizes(const Corpus& corpus,
                                               const PipelineOptions& options,
                                               const std::vector<int>& window_sizes,
                                               const std::string& scenario_filter) {
  std::vector<AblationPoint> points;
  for (int w : window_sizes) {
    PipelineOptions o = options;
    o.window_length = w;
    points.push_back(run_ablation(corpus, o, "T=" + std::to_string(w), scenario_filter));
  }
  return points;
}

std::vector<AblationPoint> ablate_variants(const Corpus& corpus,
                                           const PipelineOptions& options,
                                           const std::string& scenario_filter) {
  std::vector<AblationPoint> points;
  for (Variant v : {Variant::AE, Variant::VAE, Variant::VAE_CNN}) {
    PipelineOptions o = options;
    o.variant = v;
    points.push_back(run_ablation(corpus, o, to_string(v), scenario_filter));
  }
  return points;
}

std::vector<int> feature_group_indices(const std::vector<Channel>& channels,
                                       const std::string& group) {
  auto want = [&](ChannelKind k) {
    if (group == "all") return true;
    const bool ft = k == ChannelKind::Force || k == ChannelKind::Torque;
    if (group == "ft") return ft;
    if (group == "ft_pose") return ft || k == ChannelKind::Pose;
    if (group == "ft_joints")
      return ft || k == ChannelKind::JointPosition || k == ChannelKind::JointVelocity ||
             k == ChannelKind::JointTorque;
    throw InputError("unknown feature group: " + group +
                     " (expected ft, ft_pose, ft_joints or all)");
  };
  std::vector<int> idx;
  for (size_t i = 0; i < channels.size(); ++i)
    if (want(channels[i].kind)) idx.push_back(int(i));
  if (idx.empty()) throw InputError("feature group '" + group + "' selects no channels");
  return idx;
}

std::vector<AblationPoint> ablate_features(const Corpus& corpus,
                                           const PipelineOptions& options,
                                           const std::vector<std::string>& groups,
                                           const std::string& scenario_filter) {
  std::vector<AblationPoint> points;
  for (const auto& group : groups) {
    const auto idx = feature_group_indices(corpus.manifest.channels, group);
    Corpus sub;
    sub.root = corpus.root;
    sub.manifest = corpus.manifest;
    sub.manifest.channels.clear();
    for (int i : idx) sub.manifest.channels.push_back(corpus.manifest.channels[size_t(i)]);
    for (const auto& r : corpus.runs) {
      LoadedRun lr;
      lr.entry = r.entry;
      lr.series = select_channels(r.series, idx);
      sub.runs.push_back(std::move(lr));
    }
    points.push_back(run_ablation(sub, options, group, scenario_filter));
  }
  return points;
}

}  // namespace aemon::pipeline
