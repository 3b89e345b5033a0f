#include "dhnet/encoder.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "dhnet/error.hpp"
#include "dhnet/frame_io.hpp"

namespace dhnet {

void EncoderJob::validate() const {
  if (input.empty()) throw InvalidArgument("encode: input path is empty");
  if (output.empty()) throw InvalidArgument("encode: output path is empty");
  if (codec.empty()) throw InvalidArgument("encode: codec is empty");
  if (q_s < 1 || q_s > 31) throw InvalidArgument("encode: q_s must be in 1..31");
  if (gop_size < 1) throw InvalidArgument("encode: gop size must be >= 1");
}

std::vector<std::string> encode_arguments(const EncoderJob& job) {
  job.validate();
  std::vector<std::string> a = {"-y",
                                "-hide_banner",
                                "-loglevel",
                                "error",
                                "-i",
                                job.input.string(),
                                "-c:v",
                                job.codec,
                                "-qscale:v",
                                std::to_string(job.q_s),
                                "-g",
                                std::to_string(job.gop_size),
                                "-bf",
                                "0"};
  a.insert(a.end(), job.extra_args.begin(), job.extra_args.end());
  a.push_back(job.output.string());
  return a;
}

std::vector<std::string> dump_arguments(const std::filesystem::path& video, const std::filesystem::path& frame_dir) {
  return {"-y",        "-hide_banner", "-loglevel", "error", "-i", video.string(), "-pix_fmt",
          "rgb24",     (frame_dir / "frame_%05d.png").string()};
}

namespace {

bool is_executable(const std::filesystem::path& p) {
  std::error_code ec;
  return std::filesystem::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

}  // namespace

std::filesystem::path resolve_executable(const std::string& name) {
  if (name.find('/') != std::string::npos) {
    if (is_executable(name)) return name;
    throw MissingTool("encoder '" + name + "' not found or not executable (set " + kEncoderEnv +
                      " to an ffmpeg binary built with libxvid)");
  }
  const char* path = std::getenv("PATH");
  std::stringstream dirs(path ? path : "");
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) continue;
    const std::filesystem::path candidate = std::filesystem::path(dir) / name;
    if (is_executable(candidate)) return candidate;
  }
  throw MissingTool("encoder '" + name + "' not found on PATH (install ffmpeg with libxvid or set " +
                    std::string(kEncoderEnv) + ")");
}

std::filesystem::path resolve_encoder() {
  const char* env = std::getenv(kEncoderEnv);
  return resolve_executable(env && *env ? env : kDefaultEncoder);
}

ProcessResult run_process(const std::filesystem::path& program, const std::vector<std::string>& args) {
  int pipefd[2];
  if (::pipe(pipefd) != 0) throw IoError(std::string("pipe: ") + std::strerror(errno));
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    throw IoError(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::dup2(pipefd[1], STDOUT_FILENO);
    ::dup2(pipefd[1], STDERR_FILENO);
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    const int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    std::vector<char*> argv;
    std::string prog = program.string();
    argv.push_back(prog.data());
    std::vector<std::string> copy = args;
    for (std::string& s : copy) argv.push_back(s.data());
    argv.push_back(nullptr);
    ::execv(prog.c_str(), argv.data());
    std::fprintf(stderr, "exec %s: %s\n", prog.c_str(), std::strerror(errno));
    ::_exit(127);
  }
  ::close(pipefd[1]);
  ProcessResult result;
  std::array<char, 4096> buf;
  ssize_t got;
  while ((got = ::read(pipefd[0], buf.data(), buf.size())) != 0) {
    if (got < 0) {
      if (errno == EINTR) continue;
      break;
    }
    result.log.append(buf.data(), static_cast<std::size_t>(got));
  }
  ::close(pipefd[0]);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return result;
}

EncodeOutcome run_encode(const EncoderJob& job, const std::filesystem::path& frame_dir) {
  const std::vector<std::string> enc_args = encode_arguments(job);
  const std::filesystem::path encoder = resolve_encoder();
  if (!std::filesystem::exists(job.input)) throw IoError("encode: input " + job.input.string() + " does not exist");
  std::error_code ec;
  std::filesystem::create_directories(frame_dir, ec);
  if (ec) throw IoError("encode: cannot create " + frame_dir.string() + ": " + ec.message());

  ProcessResult r = run_process(encoder, enc_args);
  if (r.exit_code != 0)
    throw ExternalToolFailed("encoder exited with code " + std::to_string(r.exit_code) + ":\n" + r.log);
  r = run_process(encoder, dump_arguments(job.output, frame_dir));
  if (r.exit_code != 0)
    throw ExternalToolFailed("frame dump exited with code " + std::to_string(r.exit_code) + ":\n" + r.log);
  return EncodeOutcome{job.output, list_frames(frame_dir)};
}

}  // namespace dhnet
