#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "dhnet/frame_io.hpp"
#include "dhnet/intra_quant.hpp"
#include "dhnet/rng.hpp"

namespace dhnet {

// Relative strength of the three texture components.
struct TextureMix {
  double gradient = 1.0;
  double noise = 1.0;
  double rectangles = 1.0;
};

// Seeded luma texture: smooth gradient, band-limited noise and hard-edged
// rectangles, plus fine grain, rounded to integers in [0, 255].
YPlane synth_texture(int width, int height, const TextureMix& mix, Rng& rng);

struct QPair {
  int first = 0;
  int second = 0;
  bool operator==(const QPair&) const = default;
};

struct SynthConfig {
  int n_planes = 2000;
  int width = 256;
  int height = 256;
  std::vector<int> q_values = {3, 5, 7};
  // Double-compression pairs; empty means every ordered pair of distinct
  // q_values.
  std::vector<QPair> pairs;
  QmId codec_qm = QmId::kQ2;  // table used to quantize
  QmId aux_qm = QmId::kQ1;    // table recorded for the auxiliary feature
  std::uint64_t seed = 0;
  TextureMix mix;

  // Throws InvalidArgument on out-of-range q, q1 == q2 pairs or bad sizes.
  void validate() const;
  std::vector<QPair> effective_pairs() const;
};

struct SynthPlane {
  YPlane plane;
  int label = 0;
  int q_first = 0;  // 0 for single compression
  int q_last = 0;
};

// Item `index` of the dataset; depends only on (config, index). Even indices
// are single-compressed, odd indices double-compressed, and q values cycle so
// every q_last appears equally often in both classes.
SynthPlane synth_plane(const SynthConfig& config, std::size_t index);

struct DatasetSplit {
  std::vector<FrameRecord> all, train, validation, test;
};

// Stratified 8:1:1 split of record positions, shuffled with `seed`.
DatasetSplit split_dataset(const std::vector<FrameRecord>& records, std::uint64_t seed);

// Writes planes/plane_NNNNN.pgm and manifest.jsonl, train.jsonl, val.jsonl,
// test.jsonl under `out_dir`. Manifest paths are relative to `out_dir`.
DatasetSplit write_plane_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

// Decoded frames of a fixed-GOP encode: I-frames at t % gop == 0 coded with
// `intra`, the rest predicted from the previous decoded frame with `inter`.
std::vector<YPlane> encode_sequence(const std::vector<YPlane>& frames, int gop_size, const QuantConfig& intra,
                                    const QuantConfig& inter);

struct VideoConfig {
  int n_frames = 120;
  int width = 256;
  int height = 256;
  double frame_noise = 2.0;  // per-frame grain standard deviation
  int inter_step = 16;       // flat inter-table value
  QmId codec_qm = QmId::kQ2;
  std::uint64_t seed = 0;
  TextureMix mix;
};

// Raw frames of a static scene with independent grain per frame.
std::vector<YPlane> synth_raw_video(const VideoConfig& config, std::uint64_t video_seed);

// Single pass with (gop, q).
std::vector<YPlane> synth_single_video(const VideoConfig& config, std::uint64_t video_seed, int gop, int q);

// Decoded output of re-encoding the (g1, q1) decode with (g2, q2).
std::vector<YPlane> synth_double_video(const VideoConfig& config, std::uint64_t video_seed, int g1, int q1, int g2,
                                       int q2);

// frame_NNNNN.pgm files in `dir`.
void write_frames(const std::vector<YPlane>& frames, const std::filesystem::path& dir);

}  // namespace dhnet
