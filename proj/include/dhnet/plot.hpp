#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dhnet/detect.hpp"

namespace dhnet {

// Parses "frame_index,score,label" CSV (header required). Throws ParseError
// with the offending line number.
std::vector<Prediction> parse_score_csv(std::string_view text);

// Reads the "roc" array of an eval report. Throws ParseError if missing.
std::vector<RocPoint> roc_from_report(const nlohmann::json& report);

// ROC polyline on the unit square with the chance diagonal.
std::string roc_svg(const std::vector<RocPoint>& points, std::optional<double> auc);
std::string roc_csv(const std::vector<RocPoint>& points);

// Score against frame index, one vertex per prediction, with the 0.5
// decision line.
std::string series_svg(const std::vector<Prediction>& series);
std::string series_csv(const std::vector<Prediction>& series);

}  // namespace dhnet
