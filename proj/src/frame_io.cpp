#include "dhnet/frame_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "dhnet/error.hpp"

namespace dhnet {

namespace fs = std::filesystem;

RgbFrame::RgbFrame(int w, int h, std::vector<std::uint8_t> rgb)
    : width(w), height(h), data(std::move(rgb)) {
  if (w <= 0 || h <= 0) throw InvalidArgument("RgbFrame: dimensions must be positive");
  if (data.size() != static_cast<std::size_t>(w) * h * 3)
    throw InvalidArgument("RgbFrame: data length does not match width*height*3");
}

YPlane::YPlane(int width, int height, double fill)
    : width_(width), height_(height),
      samples_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill) {
  if (width < 0 || height < 0) throw InvalidArgument("YPlane: negative dimensions");
}

YPlane::YPlane(int width, int height, std::vector<double> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (width < 0 || height < 0) throw InvalidArgument("YPlane: negative dimensions");
  if (samples_.size() != static_cast<std::size_t>(width) * height)
    throw InvalidArgument("YPlane: sample count does not match dimensions");
}

YPlane YPlane::cropped(int width, int height) const {
  if (width > width_ || height > height_ || width < 0 || height < 0)
    throw InvalidArgument("YPlane::cropped: crop exceeds plane");
  YPlane out(width, height);
  for (int r = 0; r < height; ++r)
    std::copy_n(samples_.begin() + static_cast<std::ptrdiff_t>(r) * width_, width,
                out.samples_.begin() + static_cast<std::ptrdiff_t>(r) * width);
  return out;
}

std::uint8_t luma_bt601(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  // Exact in integers: round(x) == floor(x + 0.5) for x >= 0.
  const int scaled = 299 * r + 587 * g + 114 * b;
  return static_cast<std::uint8_t>(std::min((scaled + 500) / 1000, 255));
}

YPlane rgb_to_y(const RgbFrame& frame) {
  if (frame.width <= 0 || frame.height <= 0 ||
      frame.data.size() != static_cast<std::size_t>(frame.width) * frame.height * 3)
    throw InvalidArgument("rgb_to_y: malformed frame");
  YPlane out(frame.width, frame.height);
  auto dst = out.samples();
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = luma_bt601(frame.data[3 * i], frame.data[3 * i + 1], frame.data[3 * i + 2]);
  return out;
}

std::vector<int> iframe_indices(int gop_size, int n_frames) {
  if (gop_size < 1) throw InvalidArgument("iframe_indices: gop_size must be >= 1");
  if (n_frames < 0) throw InvalidArgument("iframe_indices: n_frames must be >= 0");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>((n_frames + gop_size - 1) / gop_size));
  for (int t = 0; t < n_frames; t += gop_size) out.push_back(t);
  return out;
}

std::string_view to_string(QmId id) {
  switch (id) {
    case QmId::kQ1: return "Q1";
    case QmId::kQ2: return "Q2";
    case QmId::kCustom: return "custom";
  }
  return "Q1";
}

QmId parse_qm_id(std::string_view text) {
  if (text == "Q1") return QmId::kQ1;
  if (text == "Q2") return QmId::kQ2;
  if (text == "custom") return QmId::kCustom;
  throw InvalidArgument("unknown quantization matrix id '" + std::string(text) + "'");
}

std::string manifest_line(const FrameRecord& record) {
  nlohmann::json j;
  j["path"] = record.path;
  j["label"] = record.label;
  j["q_s_last"] = record.q_s_last;
  j["q_m_id"] = std::string(to_string(record.q_m_id));
  j["gop_size"] = record.gop_size;
  j["frame_index"] = record.frame_index;
  return j.dump();
}

FrameRecord parse_manifest_line(std::string_view line, long line_number) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed manifest JSON: ") + e.what(), line_number);
  }
  if (!j.is_object()) throw ParseError("manifest record is not an object", line_number);
  FrameRecord r;
  try {
    r.path = j.at("path").get<std::string>();
    r.label = j.at("label").get<int>();
    r.q_s_last = j.at("q_s_last").get<int>();
    r.q_m_id = parse_qm_id(j.at("q_m_id").get<std::string>());
    r.gop_size = j.at("gop_size").get<int>();
    r.frame_index = j.at("frame_index").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad manifest field: ") + e.what(), line_number);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), line_number);
  }
  if (r.label != 0 && r.label != 1) throw ParseError("label must be 0 or 1", line_number);
  if (r.q_s_last < 1 || r.q_s_last > 31) throw ParseError("q_s_last must be in 1..31", line_number);
  if (r.gop_size < 1) throw ParseError("gop_size must be >= 1", line_number);
  if (r.frame_index < 0) throw ParseError("frame_index must be >= 0", line_number);
  return r;
}

std::vector<FrameRecord> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::vector<FrameRecord> out;
  std::string line;
  long n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_manifest_line(line, n));
  }
  if (in.bad()) throw IoError("error reading manifest " + path.string());
  return out;
}

void write_manifest(std::span<const FrameRecord> records, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  for (const auto& r : records) out << manifest_line(r) << '\n';
  if (!out) throw IoError("error writing manifest " + path.string());
}

namespace {

std::vector<char> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

// Parses a PNM header ("P5"/"P6", width, height, maxval) and returns the
// offset of the first raster byte.
std::size_t parse_pnm_header(const std::vector<char>& buf, const char* magic, int& w, int& h,
                             const fs::path& path) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < buf.size()) {
      if (buf[pos] == '#') {
        while (pos < buf.size() && buf[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(buf[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_ws();
    if (pos >= buf.size() || !std::isdigit(static_cast<unsigned char>(buf[pos])))
      throw ParseError("malformed PNM header in " + path.string());
    long v = 0;
    while (pos < buf.size() && std::isdigit(static_cast<unsigned char>(buf[pos]))) {
      v = v * 10 + (buf[pos++] - '0');
      if (v > (1 << 24)) throw ParseError("PNM dimension too large in " + path.string());
    }
    return static_cast<int>(v);
  };
  if (buf.size() < 2 || buf[0] != magic[0] || buf[1] != magic[1])
    throw ParseError(path.string() + " is not a " + magic + " file");
  pos = 2;
  w = read_int();
  h = read_int();
  const int maxval = read_int();
  if (w <= 0 || h <= 0) throw ParseError("PNM dimensions must be positive in " + path.string());
  if (maxval != 255) throw ParseError("only maxval 255 is supported in " + path.string());
  if (pos >= buf.size() || !std::isspace(static_cast<unsigned char>(buf[pos])))
    throw ParseError("malformed PNM header in " + path.string());
  return pos + 1;
}

}  // namespace

YPlane read_pgm(const fs::path& path) {
  const auto buf = slurp(path);
  int w = 0, h = 0;
  const std::size_t off = parse_pnm_header(buf, "P5", w, h, path);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (buf.size() < off + n) throw ParseError("truncated PGM raster in " + path.string());
  std::vector<double> samples(n);
  for (std::size_t i = 0; i < n; ++i) samples[i] = static_cast<unsigned char>(buf[off + i]);
  return YPlane(w, h, std::move(samples));
}

void write_pgm(const YPlane& plane, const fs::path& path) {
  if (plane.empty()) throw InvalidArgument("write_pgm: empty plane");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << plane.width() << ' ' << plane.height() << "\n255\n";
  std::vector<char> raster(plane.samples().size());
  std::transform(plane.samples().begin(), plane.samples().end(), raster.begin(), [](double v) {
    return static_cast<char>(static_cast<unsigned char>(std::clamp(std::round(v), 0.0, 255.0)));
  });
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (!out) throw IoError("error writing " + path.string());
}

RgbFrame read_ppm(const fs::path& path) {
  const auto buf = slurp(path);
  int w = 0, h = 0;
  const std::size_t off = parse_pnm_header(buf, "P6", w, h, path);
  const std::size_t n = static_cast<std::size_t>(w) * h * 3;
  if (buf.size() < off + n) throw ParseError("truncated PPM raster in " + path.string());
  std::vector<std::uint8_t> rgb(buf.begin() + static_cast<std::ptrdiff_t>(off),
                                buf.begin() + static_cast<std::ptrdiff_t>(off + n));
  return RgbFrame(w, h, std::move(rgb));
}

RgbFrame read_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    const std::string msg = image.message;
    if (!fs::exists(path)) throw IoError("cannot open " + path.string());
    throw ParseError("cannot decode PNG " + path.string() + ": " + msg);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgb.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ParseError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return RgbFrame(static_cast<int>(image.width), static_cast<int>(image.height), std::move(rgb));
}

void write_png(const RgbFrame& frame, const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width);
  image.height = static_cast<png_uint_32>(frame.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, frame.data.data(), 0, nullptr))
    throw IoError("cannot write PNG " + path.string() + ": " + image.message);
}

YPlane load_luma(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return rgb_to_y(read_png(path));
  if (ext == ".ppm") return rgb_to_y(read_ppm(path));
  throw InvalidArgument("unsupported frame format '" + ext + "' for " + path.string());
}

std::vector<fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm" || ext == ".png" || ext == ".ppm") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace dhnet
