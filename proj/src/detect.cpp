#include "dhnet/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dhnet/error.hpp"
#include "dhnet/features.hpp"

namespace dhnet {

ConfusionCounts confusion(std::span<const Prediction> predictions, std::span<const int> truth) {
  if (predictions.size() != truth.size()) throw InvalidArgument("confusion: prediction/label count mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool pos = predictions[i].label == 1;
    if (truth[i] == 1)
      (pos ? c.tp : c.fn)++;
    else
      (pos ? c.fp : c.tn)++;
  }
  return c;
}

Metrics compute_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw UndefinedMetrics("compute_metrics: all confusion counts are zero");
  auto ratio = [](double num, double den) -> std::optional<double> {
    if (den == 0.0) return std::nullopt;
    return num / den;
  };
  const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
  const double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
  const auto acc = ratio(tp + tn, tp + tn + fp + fn);
  const auto tnr = ratio(tn, tn + fp);
  const auto pre = ratio(tp, tp + fp);
  const auto rec = ratio(tp, tp + fn);
  std::optional<double> f1;
  if (pre && rec) f1 = ratio(2.0 * *pre * *rec, *pre + *rec);
  auto pct = [](std::optional<double> v) -> std::optional<double> {
    if (!v) return std::nullopt;
    return *v * 100.0;
  };
  return Metrics{pct(acc), pct(tnr), pct(pre), pct(rec), pct(f1)};
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("roc_auc: score/label count mismatch");
  std::size_t pos = 0, neg = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw InvalidArgument("roc_auc: labels must be 0 or 1");
    (l ? pos : neg)++;
  }
  if (pos == 0 || neg == 0) throw InvalidArgument("roc_auc: both classes must be present");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] ? tp : fp)++;
      ++i;
    }
    roc.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                          static_cast<double>(tp) / static_cast<double>(pos)});
  }
  double auc = 0.0;
  for (std::size_t k = 1; k < roc.points.size(); ++k) {
    const RocPoint& a = roc.points[k - 1];
    const RocPoint& b = roc.points[k];
    auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  roc.auc = auc;
  return roc;
}

int gop_vote(std::span<const int> labels) {
  if (labels.empty()) throw InvalidArgument("gop_vote: no predictions");
  std::size_t ones = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw InvalidArgument("gop_vote: labels must be 0 or 1");
    ones += l;
  }
  return 2 * ones >= labels.size() ? 1 : 0;
}

Prediction predict_plane(DHNet& model, const YPlane& plane, const ScanParams& params, int frame_index) {
  const FeatureSet fs = extract_all(plane, params.q_m, params.q_s, params.alpha);
  const FeatureRecord rec = FeatureRecord::from_features(fs, 0, params.q_s);
  const nn::Tensor logits = model.forward(make_batch(std::span(&rec, 1)), nn::Mode::kEval);
  return make_prediction(logits[0], logits[1], frame_index);
}

std::vector<ScanEntry> temporal_scan(std::span<const YPlane> frames, DHNet& model, const ScanParams& params) {
  std::vector<ScanEntry> out;
  out.reserve(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    ScanEntry e;
    e.frame_index = static_cast<int>(t);
    try {
      e.prediction = predict_plane(model, frames[t], params, e.frame_index);
    } catch (const Error& err) {
      e.error = err.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ScanEntry> temporal_scan(std::span<const std::filesystem::path> frames, DHNet& model,
                                     const ScanParams& params) {
  std::vector<ScanEntry> out;
  out.reserve(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    ScanEntry e;
    e.frame_index = static_cast<int>(t);
    try {
      e.prediction = predict_plane(model, load_luma(frames[t]), params, e.frame_index);
    } catch (const Error& err) {
      e.error = err.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

Prediction first_iframe_detect(std::span<const YPlane> frames, DHNet& model, const ScanParams& params) {
  if (frames.empty()) throw InvalidArgument("first_iframe_detect: empty video");
  return predict_plane(model, frames[0], params, 0);
}

GopVerdict gop_detect(std::span<const YPlane> frames, DHNet& model, const ScanParams& params, int gop_size, int phi) {
  if (phi < 1) throw InvalidArgument("gop_detect: phi must be >= 1");
  const std::vector<int> iframes = iframe_indices(gop_size, static_cast<int>(frames.size()));
  if (iframes.empty()) throw InvalidArgument("gop_detect: no I-frames in input");
  GopVerdict v;
  std::vector<int> labels;
  for (std::size_t k = 0; k < iframes.size() && k < static_cast<std::size_t>(phi); ++k) {
    v.votes.push_back(predict_plane(model, frames[iframes[k]], params, iframes[k]));
    labels.push_back(v.votes.back().label);
  }
  v.label = gop_vote(labels);
  return v;
}

nlohmann::json metrics_report(const Metrics& m, std::optional<double> auc) {
  auto r2 = [](std::optional<double> v) -> nlohmann::json {
    if (!v) return nullptr;
    return std::round(*v * 100.0) / 100.0;
  };
  nlohmann::json j{{"acc", r2(m.acc)}, {"tnr", r2(m.tnr)}, {"pre", r2(m.pre)}, {"rec", r2(m.rec)}, {"f1", r2(m.f1)}};
  j["auc"] = auc ? nlohmann::json(std::round(*auc * 10000.0) / 10000.0) : nlohmann::json(nullptr);
  return j;
}

namespace {

std::string csv_row(const Prediction& p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d,%.6f,%d\n", p.frame_index, p.score, p.label);
  return buf;
}

}  // namespace

std::string score_csv(std::span<const ScanEntry> entries) {
  std::string out = "frame_index,score,label\n";
  for (const ScanEntry& e : entries)
    if (e.prediction) out += csv_row(*e.prediction);
  return out;
}

std::string score_csv(std::span<const Prediction> predictions) {
  std::string out = "frame_index,score,label\n";
  for (const Prediction& p : predictions) out += csv_row(p);
  return out;
}

}  // namespace dhnet
