#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <unistd.h>

#include "dhnet/frame_io.hpp"
#include "dhnet/nn/tensor.hpp"
#include "dhnet/rng.hpp"

namespace dhnet::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("dhnet_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

// Independent integer samples in [0, 255].
inline YPlane random_plane(int w, int h, Rng& rng) {
  YPlane p(w, h);
  for (double& v : p.samples()) v = static_cast<double>(rng.below(256));
  return p;
}

inline nn::Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  nn::Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Compares `analytic` against central differences of `loss` with respect to
// `x`, at up to `samples` coordinates (all of them if the tensor is smaller).
// Relative error is |a - n| / max(|a| + |n|, floor).
inline GradCheck check_gradient(nn::Tensor& x, const nn::Tensor& analytic, const std::function<double()>& loss,
                                Rng& rng, std::size_t samples = 100, double step = 1e-5, double floor = 1e-6) {
  GradCheck r;
  const std::size_t n = x.size();
  std::vector<std::size_t> coords;
  if (n <= samples) {
    for (std::size_t i = 0; i < n; ++i) coords.push_back(i);
  } else {
    for (std::size_t k = 0; k < samples; ++k) coords.push_back(static_cast<std::size_t>(rng.below(n)));
  }
  for (std::size_t i : coords) {
    const double saved = x[i];
    x[i] = saved + step;
    const double up = loss();
    x[i] = saved - step;
    const double down = loss();
    x[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[i];
    const double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), floor);
    r.max_rel_error = std::max(r.max_rel_error, rel);
    ++r.checked;
  }
  return r;
}

}  // namespace dhnet::test
