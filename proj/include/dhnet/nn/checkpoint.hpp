#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dhnet/nn/tensor.hpp"

namespace dhnet::nn {

struct NamedTensor {
  std::string name;
  Tensor tensor;

  bool operator==(const NamedTensor&) const = default;
};

// "DHW1" file: magic, then tensors until end of file, each as u16 name
// length, UTF-8 name, u8 rank, u32 extents, little-endian float64 data.
void write_checkpoint(const std::vector<NamedTensor>& tensors, const std::filesystem::path& path);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

}  // namespace dhnet::nn
