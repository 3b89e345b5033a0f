#include "dhnet/feature_file.hpp"

#include <limits>

#include "dhnet/binary_io.hpp"
#include "dhnet/error.hpp"

namespace dhnet {

namespace fs = std::filesystem;

FeatureRecord FeatureRecord::from_features(const FeatureSet& features, int label, int q_s) {
  if (label != 0 && label != 1) throw InvalidArgument("FeatureRecord: label must be 0 or 1");
  if (q_s < 0 || q_s > 255) throw InvalidArgument("FeatureRecord: q_s out of range");
  FeatureRecord r;
  r.label = static_cast<std::uint8_t>(label);
  r.q_s = static_cast<std::uint8_t>(q_s);
  for (std::size_t i = 0; i < 3; ++i) {
    const HistFeature& h = features.hists[i];
    if (h.rows() > std::numeric_limits<std::uint16_t>::max() ||
        h.cols() > std::numeric_limits<std::uint16_t>::max())
      throw InvalidArgument("FeatureRecord: histogram too large for the file format");
    FeatureBlock& b = r.blocks[i];
    b.delta = static_cast<std::uint8_t>(h.delta);
    b.rows = static_cast<std::uint16_t>(h.rows());
    b.cols = static_cast<std::uint16_t>(h.cols());
    b.values.assign(h.values.begin(), h.values.end());
  }
  for (int k = 0; k < 64; ++k) r.aux[k] = static_cast<float>(features.aux.values[k]);
  return r;
}

FeatureFileWriter::FeatureFileWriter(const fs::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot write feature file " + path.string());
  out_.write("DHF1", 4);
  binary::put<std::uint32_t>(out_, 0);
}

FeatureFileWriter::~FeatureFileWriter() {
  try {
    close();
  } catch (...) {
  }
}

void FeatureFileWriter::append(const FeatureRecord& r) {
  if (closed_) throw InvalidArgument("FeatureFileWriter: append after close");
  if (count_ == std::numeric_limits<std::uint32_t>::max())
    throw InvalidArgument("FeatureFileWriter: too many records");
  binary::put<std::uint8_t>(out_, r.label);
  binary::put<std::uint8_t>(out_, r.q_s);
  for (const FeatureBlock& b : r.blocks) {
    if (b.values.size() != static_cast<std::size_t>(b.rows) * b.cols)
      throw InvalidArgument("FeatureFileWriter: block size does not match rows*cols");
    binary::put<std::uint8_t>(out_, b.delta);
    binary::put<std::uint16_t>(out_, b.rows);
    binary::put<std::uint16_t>(out_, b.cols);
    for (float v : b.values) binary::put<float>(out_, v);
  }
  for (float v : r.aux) binary::put<float>(out_, v);
  if (!out_) throw IoError("error writing feature file " + path_.string());
  ++count_;
}

void FeatureFileWriter::close() {
  if (closed_) return;
  closed_ = true;
  out_.seekp(4);
  binary::put<std::uint32_t>(out_, count_);
  out_.close();
  if (!out_) throw IoError("error finalizing feature file " + path_.string());
}

void write_feature_file(std::span<const FeatureRecord> records, const fs::path& path) {
  FeatureFileWriter w(path);
  for (const auto& r : records) w.append(r);
  w.close();
}

std::vector<FeatureRecord> read_feature_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file " + path.string());
  const std::string ctx = "feature file " + path.string();
  binary::expect_magic(in, "DHF1", ctx);
  const auto n = binary::get<std::uint32_t>(in, ctx);
  std::vector<FeatureRecord> out;
  out.reserve(std::min<std::uint32_t>(n, 1u << 20));
  for (std::uint32_t i = 0; i < n; ++i) {
    FeatureRecord r;
    r.label = binary::get<std::uint8_t>(in, ctx);
    r.q_s = binary::get<std::uint8_t>(in, ctx);
    for (FeatureBlock& b : r.blocks) {
      b.delta = binary::get<std::uint8_t>(in, ctx);
      b.rows = binary::get<std::uint16_t>(in, ctx);
      b.cols = binary::get<std::uint16_t>(in, ctx);
      b.values.resize(static_cast<std::size_t>(b.rows) * b.cols);
      if (!b.values.empty() &&
          !in.read(reinterpret_cast<char*>(b.values.data()),
                   static_cast<std::streamsize>(b.values.size() * sizeof(float))))
        throw ParseError("unexpected end of file in " + ctx);
      if constexpr (std::endian::native == std::endian::big) {
        for (float& v : b.values) {
          std::uint32_t u;
          std::memcpy(&u, &v, 4);
          u = __builtin_bswap32(u);
          std::memcpy(&v, &u, 4);
        }
      }
    }
    for (float& v : r.aux) v = binary::get<float>(in, ctx);
    out.push_back(std::move(r));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError(ctx + ": trailing bytes after records");
  return out;
}

}  // namespace dhnet
