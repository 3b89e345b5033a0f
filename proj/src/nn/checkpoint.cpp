#include "dhnet/nn/checkpoint.hpp"

#include <fstream>
#include <limits>

#include "dhnet/binary_io.hpp"
#include "dhnet/error.hpp"

namespace dhnet::nn {

namespace fs = std::filesystem;

void write_checkpoint(const std::vector<NamedTensor>& tensors, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write("DHW1", 4);
  for (const auto& [name, t] : tensors) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max())
      throw InvalidArgument("write_checkpoint: tensor name too long");
    if (t.rank() > std::numeric_limits<std::uint8_t>::max()) throw InvalidArgument("write_checkpoint: rank too large");
    binary::put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    binary::put<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.shape()) {
      if (d > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("write_checkpoint: extent too large");
      binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    }
    for (double v : t.data()) binary::put<double>(out, v);
  }
  if (!out) throw IoError("error writing checkpoint " + path.string());
}

std::vector<NamedTensor> read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string ctx = "checkpoint " + path.string();
  binary::expect_magic(in, "DHW1", ctx);
  std::vector<NamedTensor> out;
  while (in.peek() != std::char_traits<char>::eof()) {
    NamedTensor nt;
    const auto len = binary::get<std::uint16_t>(in, ctx);
    nt.name.resize(len);
    if (len && !in.read(nt.name.data(), len)) throw ParseError("unexpected end of file in " + ctx);
    const auto rank = binary::get<std::uint8_t>(in, ctx);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = binary::get<std::uint32_t>(in, ctx);
    std::vector<double> data(element_count(shape));
    for (double& v : data) v = binary::get<double>(in, ctx);
    nt.tensor = Tensor(std::move(shape), std::move(data));
    out.push_back(std::move(nt));
  }
  return out;
}

}  // namespace dhnet::nn
