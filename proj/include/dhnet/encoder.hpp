#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dhnet {

inline constexpr const char* kEncoderEnv = "DHNET_ENCODER";
inline constexpr const char* kDefaultEncoder = "ffmpeg";

struct EncoderJob {
  std::filesystem::path input;
  std::filesystem::path output;
  std::string codec = "libxvid";
  int q_s = 3;
  int gop_size = 6;
  std::vector<std::string> extra_args;

  void validate() const;
};

// Fixed-quantizer encode with a closed GOP of `gop_size` and no B-frames:
//   -y -hide_banner -loglevel error -i IN -c:v CODEC -qscale:v Q -g G -bf 0 EXTRA... OUT
std::vector<std::string> encode_arguments(const EncoderJob& job);

// Decoded-frame dump of `video` as RGB PNGs:
//   -y -hide_banner -loglevel error -i VIDEO -pix_fmt rgb24 DIR/frame_%05d.png
std::vector<std::string> dump_arguments(const std::filesystem::path& video, const std::filesystem::path& frame_dir);

// The encoder named by DHNET_ENCODER, else "ffmpeg", resolved against PATH
// when it contains no slash. Throws MissingTool if nothing executable is found.
std::filesystem::path resolve_encoder();
std::filesystem::path resolve_executable(const std::string& name);

struct ProcessResult {
  int exit_code = 0;
  std::string log;  // combined stdout and stderr
};

// Runs `program` with `args` without a shell.
ProcessResult run_process(const std::filesystem::path& program, const std::vector<std::string>& args);

struct EncodeOutcome {
  std::filesystem::path video;
  std::vector<std::filesystem::path> frames;
};

// Encodes, then dumps decoded frames into `frame_dir`. Throws
// ExternalToolFailed with the captured log on a nonzero exit.
EncodeOutcome run_encode(const EncoderJob& job, const std::filesystem::path& frame_dir);

}  // namespace dhnet
