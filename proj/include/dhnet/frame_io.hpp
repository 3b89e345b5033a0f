#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dhnet {

// Interleaved 8-bit RGB frame.
struct RgbFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width * height * 3, row-major

  RgbFrame() = default;
  RgbFrame(int w, int h, std::vector<std::uint8_t> rgb);
};

// Luma plane. Samples are kept as doubles in [0, 255] so the transforms
// downstream can consume them directly.
class YPlane {
 public:
  YPlane() = default;
  YPlane(int width, int height, double fill = 0.0);
  YPlane(int width, int height, std::vector<double> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return samples_.empty(); }

  double& operator()(int row, int col) { return samples_[static_cast<std::size_t>(row) * width_ + col]; }
  double operator()(int row, int col) const {
    return samples_[static_cast<std::size_t>(row) * width_ + col];
  }

  std::span<double> samples() { return samples_; }
  std::span<const double> samples() const { return samples_; }

  // Top-left crop; dimensions must not exceed the current ones.
  YPlane cropped(int width, int height) const;

  bool operator==(const YPlane&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> samples_;
};

// BT.601 full-range luma, round half away from zero, clamped to [0, 255].
std::uint8_t luma_bt601(std::uint8_t r, std::uint8_t g, std::uint8_t b);
YPlane rgb_to_y(const RgbFrame& frame);

// Frame positions of the I-frames of a fixed-GOP sequence.
std::vector<int> iframe_indices(int gop_size, int n_frames);

enum class QmId { kQ1, kQ2, kCustom };

std::string_view to_string(QmId id);
QmId parse_qm_id(std::string_view text);

struct FrameRecord {
  std::string path;
  int label = 0;  // 0 single, 1 double
  int q_s_last = 1;
  QmId q_m_id = QmId::kQ1;
  int gop_size = 1;
  int frame_index = 0;

  bool operator==(const FrameRecord&) const = default;
};

std::string manifest_line(const FrameRecord& record);
FrameRecord parse_manifest_line(std::string_view line, long line_number = 0);
std::vector<FrameRecord> load_manifest(const std::filesystem::path& path);
void write_manifest(std::span<const FrameRecord> records, const std::filesystem::path& path);

// Binary PGM (P5, maxval 255). Samples are rounded and clamped on write.
YPlane read_pgm(const std::filesystem::path& path);
void write_pgm(const YPlane& plane, const std::filesystem::path& path);

RgbFrame read_png(const std::filesystem::path& path);
void write_png(const RgbFrame& frame, const std::filesystem::path& path);

// Binary PPM (P6, maxval 255).
RgbFrame read_ppm(const std::filesystem::path& path);

// Loads a luma plane, dispatching on extension: .pgm is read as Y directly,
// .png and .ppm are converted with rgb_to_y.
YPlane load_luma(const std::filesystem::path& path);

// Frame files in a directory (.pgm/.png/.ppm), sorted by filename.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);

}  // namespace dhnet
