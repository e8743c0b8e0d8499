#include "aemon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace aemon {

int64_t ScoredSet::positives() const {
  int64_t p = 0;
  for (const auto& s : points) p += s.positive ? 1 : 0;
  return p;
}

int64_t ScoredSet::negatives() const { return int64_t(points.size()) - positives(); }

Confusion confusion(const ScoredSet& scored, double threshold) {
  if (scored.points.empty()) throw MetricError("confusion: empty scored set");
  Confusion c;
  for (const auto& s : scored.points) {
    const bool predicted = s.score > threshold;
    if (predicted && s.positive) ++c.tp;
    else if (predicted && !s.positive) ++c.fp;
    else if (!predicted && s.positive) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Prf prf(const Confusion& c) {
  Prf r;
  if (c.tp + c.fp > 0) {
    r.precision = double(c.tp) / double(c.tp + c.fp);
  } else {
    r.degenerate_precision = true;
  }
  if (c.tp + c.fn > 0) {
    r.recall = double(c.tp) / double(c.tp + c.fn);
  } else {
    r.degenerate_recall = true;
  }
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  } else {
    r.degenerate_f1 = true;
  }
  if (c.fp + c.tn > 0) {
    r.fpr = double(c.fp) / double(c.fp + c.tn);
  } else {
    r.degenerate_fpr = true;
  }
  return r;
}

namespace {

// Distinct scores descending with per-group positive/negative counts.
struct ScoreGroups {
  std::vector<double> score;
  std::vector<int64_t> pos;
  std::vector<int64_t> neg;
  int64_t total_pos = 0;
  int64_t total_neg = 0;
};

ScoreGroups group_scores(const ScoredSet& scored) {
  std::map<double, std::pair<int64_t, int64_t>, std::greater<double>> groups;
  for (const auto& s : scored.points) {
    auto& g = groups[s.score];
    if (s.positive) ++g.first;
    else ++g.second;
  }
  ScoreGroups out;
  for (const auto& [score, counts] : groups) {
    out.score.push_back(score);
    out.pos.push_back(counts.first);
    out.neg.push_back(counts.second);
    out.total_pos += counts.first;
    out.total_neg += counts.second;
  }
  return out;
}

}  // namespace

RocCurve roc_auroc(const ScoredSet& scored) {
  if (scored.points.empty()) throw MetricError("roc: empty scored set");
  const ScoreGroups g = group_scores(scored);
  if (g.total_pos == 0 || g.total_neg == 0)
    throw MetricError("roc: need at least one positive and one negative");

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  int64_t tp = 0, fp = 0;
  double auroc = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  for (size_t i = 0; i < g.score.size(); ++i) {
    tp += g.pos[i];
    fp += g.neg[i];
    const double tpr = double(tp) / double(g.total_pos);
    const double fpr = double(fp) / double(g.total_neg);
    auroc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    curve.points.push_back({fpr, tpr, g.score[i]});
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  curve.auroc = auroc;
  return curve;
}

BestF1 best_f1_threshold(const ScoredSet& scored) {
  if (scored.points.empty()) throw MetricError("best_f1_threshold: empty scored set");
  const ScoreGroups g = group_scores(scored);

  BestF1 best;
  best.threshold = std::numeric_limits<double>::infinity();
  best.f1 = prf(confusion(scored, best.threshold)).f1;

  // Classification is score > t, so candidate t = each distinct score
  // admits everything strictly above it; -inf admits everything.
  int64_t tp = 0, fp = 0;
  for (size_t i = 0; i < g.score.size(); ++i) {
    const double t = g.score[i];
    const double f1 = [&] {
      Confusion c;
      c.tp = tp;
      c.fp = fp;
      c.fn = g.total_pos - tp;
      c.tn = g.total_neg - fp;
      return prf(c).f1;
    }();
    if (f1 > best.f1) {
      best.f1 = f1;
      best.threshold = t;
    }
    tp += g.pos[i];
    fp += g.neg[i];
  }
  {
    Confusion c;
    c.tp = g.total_pos;
    c.fp = g.total_neg;
    const double f1 = prf(c).f1;
    if (f1 > best.f1) {
      best.f1 = f1;
      best.threshold = -std::numeric_limits<double>::infinity();
    }
  }
  return best;
}

std::vector<EfficiencyPoint> data_efficiency(
    const std::function<std::optional<ScoredSet>(double)>& train_eval,
    const std::vector<double>& fractions) {
  if (!train_eval) throw InputError("data_efficiency: no train/eval callback");
  for (double f : fractions)
    if (!(f > 0.0) || f > 1.0)
      throw InputError("data_efficiency: fractions must lie in (0, 1]");
  std::vector<EfficiencyPoint> curve;
  curve.reserve(fractions.size());
  for (double f : fractions) {
    EfficiencyPoint p;
    p.fraction = f;
    const auto scored = train_eval(f);
    if (!scored) {
      p.skipped = true;
      p.auroc = std::numeric_limits<double>::quiet_NaN();
    } else {
      p.auroc = roc_auroc(*scored).auroc;
    }
    curve.push_back(p);
  }
  return curve;
}

LatencySummary latency_stats(const std::vector<DetectionReport>& reports) {
  LatencySummary s;
  double sum = 0.0;
  std::map<std::string, std::pair<double, int64_t>> per_tag;
  bool any_labeled = false;
  for (const auto& r : reports) {
    if (!r.labeled_onset) continue;
    any_labeled = true;
    if (r.latency_ms) {
      ++s.detected;
      sum += *r.latency_ms;
      if (*r.latency_ms <= 0.0) ++s.early_flagged;
      auto& t = per_tag[r.label_tag];
      t.first += *r.latency_ms;
      t.second += 1;
    } else {
      ++s.undetected;
    }
  }
  if (!any_labeled) throw MetricError("latency_stats: no reports carry labeled onsets");
  if (s.detected > 0) s.mean_ms = sum / double(s.detected);
  for (const auto& [tag, acc] : per_tag)
    s.per_tag_mean_ms.emplace_back(tag, acc.first / double(acc.second));
  return s;
}

}  // namespace aemon
