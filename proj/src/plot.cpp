#include "dhnet/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "dhnet/error.hpp"

namespace dhnet {

namespace {

constexpr double kWidth = 480, kHeight = 360, kMargin = 48;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& field, long line, const char* what) {
  T v{};
  const char* end = field.data() + field.size();
  auto [p, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || p != end) throw ParseError(std::string("invalid ") + what + " '" + field + "'", line);
  return v;
}

std::string svg_open(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
         "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n<title>" + title +
         "</title>\n<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
         "\" fill=\"white\"/>\n";
}

std::string axes(const std::string& xlabel, const std::string& ylabel) {
  const double x0 = kMargin, y0 = kHeight - kMargin, x1 = kWidth - kMargin, y1 = kMargin;
  std::string s;
  s += "<polyline points=\"" + fmt(x0) + "," + fmt(y1) + " " + fmt(x0) + "," + fmt(y0) + " " + fmt(x1) + "," +
       fmt(y0) + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  s += "<text x=\"" + fmt((x0 + x1) / 2) + "\" y=\"" + fmt(kHeight - 12) +
       "\" font-size=\"12\" text-anchor=\"middle\">" + xlabel + "</text>\n";
  s += "<text x=\"14\" y=\"" + fmt((y0 + y1) / 2) + "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
       fmt((y0 + y1) / 2) + ")\">" + ylabel + "</text>\n";
  return s;
}

double px(double u) { return kMargin + u * (kWidth - 2 * kMargin); }
double py(double v) { return kHeight - kMargin - v * (kHeight - 2 * kMargin); }

}  // namespace

std::vector<Prediction> parse_score_csv(std::string_view text) {
  std::vector<Prediction> out;
  std::istringstream in{std::string(text)};
  std::string line;
  long n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (!header) {
      if (t != "frame_index,score,label") throw ParseError("expected header 'frame_index,score,label'", n);
      header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ls(t);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(trim(f));
    if (fields.size() != 3) throw ParseError("expected 3 fields, got " + std::to_string(fields.size()), n);
    Prediction p;
    p.frame_index = parse_number<int>(fields[0], n, "frame_index");
    p.score = parse_number<double>(fields[1], n, "score");
    p.label = parse_number<int>(fields[2], n, "label");
    if (p.score < 0.0 || p.score > 1.0) throw ParseError("score outside [0,1]", n);
    if (p.label != 0 && p.label != 1) throw ParseError("label must be 0 or 1", n);
    out.push_back(p);
  }
  if (!header) throw ParseError("empty score CSV");
  return out;
}

std::vector<RocPoint> roc_from_report(const nlohmann::json& report) {
  if (!report.is_object() || !report.contains("roc") || !report["roc"].is_array())
    throw ParseError("report has no 'roc' array");
  std::vector<RocPoint> pts;
  for (const auto& p : report["roc"]) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ParseError("roc entries must be [fpr, tpr] pairs");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

std::string roc_svg(const std::vector<RocPoint>& points, std::optional<double> auc) {
  std::string s = svg_open("ROC");
  s += axes("false positive rate", "true positive rate");
  s += "<line x1=\"" + fmt(px(0)) + "\" y1=\"" + fmt(py(0)) + "\" x2=\"" + fmt(px(1)) + "\" y2=\"" + fmt(py(1)) +
       "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) s += ' ';
    s += fmt(px(points[i].fpr)) + "," + fmt(py(points[i].tpr));
  }
  s += "\"/>\n";
  if (auc) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "AUC = %.4f", *auc);
    s += "<text x=\"" + fmt(px(0.6)) + "\" y=\"" + fmt(py(0.1)) + "\" font-size=\"12\">" + buf + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string roc_csv(const std::vector<RocPoint>& points) {
  std::string s = "fpr,tpr\n";
  char buf[64];
  for (const RocPoint& p : points) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", p.fpr, p.tpr);
    s += buf;
  }
  return s;
}

std::string series_svg(const std::vector<Prediction>& series) {
  std::string s = svg_open("Per-frame score");
  s += axes("frame index", "score");
  int lo = 0, hi = 1;
  if (!series.empty()) {
    lo = series.front().frame_index;
    hi = series.front().frame_index;
    for (const Prediction& p : series) {
      lo = std::min(lo, p.frame_index);
      hi = std::max(hi, p.frame_index);
    }
    if (hi == lo) hi = lo + 1;
  }
  auto fx = [&](int t) { return px(static_cast<double>(t - lo) / (hi - lo)); };
  s += "<line x1=\"" + fmt(px(0)) + "\" y1=\"" + fmt(py(0.5)) + "\" x2=\"" + fmt(px(1)) + "\" y2=\"" + fmt(py(0.5)) +
       "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  s += "<polyline fill=\"none\" stroke=\"firebrick\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (i) s += ' ';
    s += fmt(fx(series[i].frame_index)) + "," + fmt(py(series[i].score));
  }
  s += "\"/>\n</svg>\n";
  return s;
}

std::string series_csv(const std::vector<Prediction>& series) { return score_csv(std::span(series)); }

}  // namespace dhnet
