#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <string>
#include <unistd.h>

#include "vgforge/builder.hpp"
#include "vgforge/digest.hpp"

namespace fixture {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("vgforge-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline vgforge::dataset::BuildOptions options(std::size_t C, std::size_t M, std::uint64_t seed, const fs::path& out,
                                              int workers = 1) {
  vgforge::dataset::BuildOptions o;
  o.categories = C;
  o.instances = M;
  o.global_seed = seed;
  o.out_dir = out;
  o.workers = workers;
  return o;
}

/// Files under `root` as relative path -> bytes digest, for tree comparison.
inline std::map<std::string, std::string> tree_digest(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = vgforge::sha256_file(e.path());
  return out;
}

}  // namespace fixture
