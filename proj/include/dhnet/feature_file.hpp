#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "dhnet/features.hpp"

namespace dhnet {

// One histogram tensor as stored on disk (32-bit floats).
struct FeatureBlock {
  std::uint8_t delta = 0;
  std::uint16_t rows = 0;
  std::uint16_t cols = 0;
  std::vector<float> values;

  bool operator==(const FeatureBlock&) const = default;
};

struct FeatureRecord {
  std::uint8_t label = 0;
  std::uint8_t q_s = 0;
  std::array<FeatureBlock, 3> blocks;  // delta 4, 8, 16
  std::array<float, 64> aux{};

  static FeatureRecord from_features(const FeatureSet& features, int label, int q_s);
  bool operator==(const FeatureRecord&) const = default;
};

// "DHF1" file: magic, u32 record count, then the records. Writing goes through
// a single sink; the count is patched in on close().
class FeatureFileWriter {
 public:
  explicit FeatureFileWriter(const std::filesystem::path& path);
  ~FeatureFileWriter();
  FeatureFileWriter(const FeatureFileWriter&) = delete;
  FeatureFileWriter& operator=(const FeatureFileWriter&) = delete;

  void append(const FeatureRecord& record);
  void close();
  std::uint32_t count() const { return count_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::uint32_t count_ = 0;
  bool closed_ = false;
};

void write_feature_file(std::span<const FeatureRecord> records, const std::filesystem::path& path);
std::vector<FeatureRecord> read_feature_file(const std::filesystem::path& path);

}  // namespace dhnet
