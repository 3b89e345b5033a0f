#include "dhnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "dhnet/error.hpp"

namespace dhnet {

namespace {

// Running-sum box blur, clamped at the borders.
void box_blur_rows(std::vector<double>& img, int w, int h, int radius) {
  std::vector<double> row(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    double* p = img.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d) s += p[std::clamp(x + d, 0, w - 1)];
      row[x] = s / (2 * radius + 1);
    }
    std::copy(row.begin(), row.end(), p);
  }
}

void box_blur(std::vector<double>& img, int w, int h, int radius) {
  box_blur_rows(img, w, h, radius);
  std::vector<double> t(img.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) t[static_cast<std::size_t>(x) * h + y] = img[static_cast<std::size_t>(y) * w + x];
  box_blur_rows(t, h, w, radius);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img[static_cast<std::size_t>(y) * w + x] = t[static_cast<std::size_t>(x) * h + y];
}

YPlane quantize_samples(int w, int h, const std::vector<double>& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::clamp(std::round(x), 0.0, 255.0); });
  return YPlane(w, h, std::move(out));
}

}  // namespace

YPlane synth_texture(int width, int height, const TextureMix& mix, Rng& rng) {
  if (width <= 0 || height <= 0) throw InvalidArgument("synth_texture: dimensions must be positive");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<double> img(n, rng.uniform(90.0, 165.0));

  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double span = rng.uniform(20.0, 70.0) * mix.gradient;
  const double gx = std::cos(angle) * span / width, gy = std::sin(angle) * span / height;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      img[static_cast<std::size_t>(y) * width + x] += gx * (x - width / 2.0) + gy * (y - height / 2.0);

  std::vector<double> noise(n);
  for (double& v : noise) v = rng.normal();
  const int radius = rng.uniform_int(1, 3);
  box_blur(noise, width, height, radius);
  // Blurring by a (2r+1)^2 box shrinks the deviation by about 2r+1.
  const double noise_sd = rng.uniform(4.0, 14.0) * mix.noise * (2 * radius + 1);
  for (std::size_t i = 0; i < n; ++i) img[i] += noise_sd * noise[i];

  const int n_rect = static_cast<int>(std::lround(rng.uniform_int(3, 8) * mix.rectangles));
  for (int r = 0; r < n_rect; ++r) {
    const int x0 = rng.uniform_int(0, width - 1), y0 = rng.uniform_int(0, height - 1);
    const int x1 = std::min(width, x0 + rng.uniform_int(8, std::max(8, width / 2)));
    const int y1 = std::min(height, y0 + rng.uniform_int(8, std::max(8, height / 2)));
    const double offset = rng.uniform(-40.0, 40.0);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) img[static_cast<std::size_t>(y) * width + x] += offset;
  }

  const double grain = rng.uniform(1.0, 3.0);
  for (double& v : img) v += grain * rng.normal();
  for (double& v : img) v = std::clamp(v, 30.0, 225.0);
  return quantize_samples(width, height, img);
}

void SynthConfig::validate() const {
  if (n_planes < 0) throw InvalidArgument("synth: n_planes must be >= 0");
  if (width < 16 || height < 16) throw InvalidArgument("synth: planes must be at least 16x16");
  if (q_values.empty()) throw InvalidArgument("synth: q_values is empty");
  for (int q : q_values)
    if (q < 1 || q > 31) throw InvalidArgument("synth: q value " + std::to_string(q) + " outside 1..31");
  for (const QPair& p : pairs) {
    if (p.first < 1 || p.first > 31 || p.second < 1 || p.second > 31)
      throw InvalidArgument("synth: q pair outside 1..31");
    if (p.first == p.second)
      throw InvalidArgument("synth: q pair (" + std::to_string(p.first) + "," + std::to_string(p.second) +
                            ") has q1 == q2");
  }
  if (codec_qm == QmId::kCustom || aux_qm == QmId::kCustom)
    throw InvalidArgument("synth: custom quantization tables are not supported");
  if (effective_pairs().empty()) throw InvalidArgument("synth: no double-compression pairs available");
}

std::vector<QPair> SynthConfig::effective_pairs() const {
  if (!pairs.empty()) return pairs;
  std::vector<QPair> out;
  for (int a : q_values)
    for (int b : q_values)
      if (a != b) out.push_back({a, b});
  return out;
}

SynthPlane synth_plane(const SynthConfig& config, std::size_t index) {
  Rng rng(derive_seed(config.seed, index));
  const YPlane raw = synth_texture(config.width, config.height, config.mix, rng);
  const Matrix8& qm = matrix_for(config.codec_qm);
  const std::size_t slot = index / 2;
  SynthPlane out;
  if (index % 2 == 0) {
    const int q = config.q_values[slot % config.q_values.size()];
    out.plane = compress_plane(raw, QuantConfig::make(q, qm));
    out.label = 0;
    out.q_last = q;
  } else {
    const std::vector<QPair> pairs = config.effective_pairs();
    const QPair p = pairs[slot % pairs.size()];
    out.plane = double_compress(raw, QuantConfig::make(p.first, qm), QuantConfig::make(p.second, qm));
    out.label = 1;
    out.q_first = p.first;
    out.q_last = p.second;
  }
  return out;
}

DatasetSplit split_dataset(const std::vector<FrameRecord>& records, std::uint64_t seed) {
  DatasetSplit split;
  split.all = records;
  Rng rng(derive_seed(seed, 0x53504c54));
  for (int label = 0; label <= 1; ++label) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < records.size(); ++i)
      if (records[i].label == label) idx.push_back(i);
    rng.shuffle(std::span(idx));
    const std::size_t n_train = idx.size() * 8 / 10;
    const std::size_t n_val = idx.size() / 10;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      auto& dst = k < n_train ? split.train : (k < n_train + n_val ? split.validation : split.test);
      dst.push_back(records[idx[k]]);
    }
  }
  auto by_path = [](const FrameRecord& a, const FrameRecord& b) { return a.path < b.path; };
  std::sort(split.train.begin(), split.train.end(), by_path);
  std::sort(split.validation.begin(), split.validation.end(), by_path);
  std::sort(split.test.begin(), split.test.end(), by_path);
  return split;
}

DatasetSplit write_plane_dataset(const SynthConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "planes", ec);
  if (ec) throw IoError("synth: cannot create " + (out_dir / "planes").string() + ": " + ec.message());

  const int n = config.n_planes;
  std::vector<FrameRecord> records(static_cast<std::size_t>(n));
  std::string failure;
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < n; ++i) {
    try {
      const SynthPlane item = synth_plane(config, static_cast<std::size_t>(i));
      char name[32];
      std::snprintf(name, sizeof name, "plane_%05d.pgm", i);
      const std::string rel = std::string("planes/") + name;
      write_pgm(item.plane, out_dir / rel);
      records[i] = FrameRecord{rel, item.label, item.q_last, config.aux_qm, 1, 0};
    } catch (const std::exception& e) {
#pragma omp critical(synth_failure)
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw IoError("synth: " + failure);

  DatasetSplit split = split_dataset(records, config.seed);
  write_manifest(split.all, out_dir / "manifest.jsonl");
  write_manifest(split.train, out_dir / "train.jsonl");
  write_manifest(split.validation, out_dir / "val.jsonl");
  write_manifest(split.test, out_dir / "test.jsonl");
  return split;
}

std::vector<YPlane> encode_sequence(const std::vector<YPlane>& frames, int gop_size, const QuantConfig& intra,
                                    const QuantConfig& inter) {
  if (gop_size < 1) throw InvalidArgument("encode_sequence: gop_size must be >= 1");
  std::vector<YPlane> out;
  out.reserve(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (t % static_cast<std::size_t>(gop_size) == 0)
      out.push_back(compress_plane(frames[t], intra));
    else
      out.push_back(code_predicted(frames[t], out.back(), inter));
  }
  return out;
}

std::vector<YPlane> synth_raw_video(const VideoConfig& config, std::uint64_t video_seed) {
  if (config.n_frames < 1) throw InvalidArgument("synth video: n_frames must be >= 1");
  Rng rng(derive_seed(config.seed, video_seed));
  const YPlane base = synth_texture(config.width, config.height, config.mix, rng);
  std::vector<YPlane> frames;
  frames.reserve(static_cast<std::size_t>(config.n_frames));
  for (int t = 0; t < config.n_frames; ++t) {
    YPlane f = base;
    for (double& v : f.samples()) v = std::clamp(std::round(v + config.frame_noise * rng.normal()), 0.0, 255.0);
    frames.push_back(std::move(f));
  }
  return frames;
}

namespace {

Matrix8 flat_matrix(int v) {
  Matrix8 m;
  m.fill(v);
  return m;
}

}  // namespace

std::vector<YPlane> synth_single_video(const VideoConfig& config, std::uint64_t video_seed, int gop, int q) {
  const Matrix8& qm = matrix_for(config.codec_qm);
  return encode_sequence(synth_raw_video(config, video_seed), gop, QuantConfig::make(q, qm),
                         QuantConfig::make(q, flat_matrix(config.inter_step)));
}

std::vector<YPlane> synth_double_video(const VideoConfig& config, std::uint64_t video_seed, int g1, int q1, int g2,
                                       int q2) {
  if (q1 == q2) throw InvalidArgument("synth video: q1 == q2");
  const Matrix8& qm = matrix_for(config.codec_qm);
  const Matrix8 inter = flat_matrix(config.inter_step);
  const auto first = encode_sequence(synth_raw_video(config, video_seed), g1, QuantConfig::make(q1, qm),
                                     QuantConfig::make(q1, inter));
  return encode_sequence(first, g2, QuantConfig::make(q2, qm), QuantConfig::make(q2, inter));
}

void write_frames(const std::vector<YPlane>& frames, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.pgm", t);
    write_pgm(frames[t], dir / name);
  }
}

}  // namespace dhnet
