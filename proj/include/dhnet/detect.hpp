#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dhnet/frame_io.hpp"
#include "dhnet/intra_quant.hpp"
#include "dhnet/model.hpp"

namespace dhnet {

struct ConfusionCounts {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::uint64_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(std::span<const Prediction> predictions, std::span<const int> truth);

// Percentages; a metric whose denominator is zero is left empty.
struct Metrics {
  std::optional<double> acc, tnr, pre, rec, f1;
};

// Throws UndefinedMetrics when all counts are zero.
Metrics compute_metrics(const ConfusionCounts& counts);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) ... (1,1)
  double auc = 0.0;
};

// Thresholds at every distinct score (samples with equal scores switch
// together); trapezoidal AUC. Label 1 is the positive class. Throws
// InvalidArgument if either class is missing.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

// Majority label; an exact tie goes to 1. Throws InvalidArgument on empty input.
int gop_vote(std::span<const int> labels);

// Settings for turning a decoded frame into network input.
struct ScanParams {
  Matrix8 q_m = {};
  int q_s = 1;
  int alpha = 60;
};

Prediction predict_plane(DHNet& model, const YPlane& plane, const ScanParams& params, int frame_index = 0);

struct ScanEntry {
  int frame_index = 0;
  std::optional<Prediction> prediction;
  std::string error;  // set when the frame could not be read or scored
};

// Scores every frame in order. A frame that fails yields an entry with an
// error message and the scan continues.
std::vector<ScanEntry> temporal_scan(std::span<const YPlane> frames, DHNet& model, const ScanParams& params);
std::vector<ScanEntry> temporal_scan(std::span<const std::filesystem::path> frames, DHNet& model,
                                     const ScanParams& params);

// Prediction for frame 0 only. Throws InvalidArgument on an empty video.
Prediction first_iframe_detect(std::span<const YPlane> frames, DHNet& model, const ScanParams& params);

struct GopVerdict {
  int label = 0;
  std::vector<Prediction> votes;
};

// Scores the I-frames at 0, g, 2g, ... (the first `phi` of them) and votes.
GopVerdict gop_detect(std::span<const YPlane> frames, DHNet& model, const ScanParams& params, int gop_size, int phi);

// {acc, tnr, pre, rec, f1} rounded to 2 decimals (null when undefined) and
// auc rounded to 4 decimals.
nlohmann::json metrics_report(const Metrics& metrics, std::optional<double> auc);

// "frame_index,score,label" rows with a header; failed entries are skipped.
std::string score_csv(std::span<const ScanEntry> entries);
std::string score_csv(std::span<const Prediction> predictions);

}  // namespace dhnet
