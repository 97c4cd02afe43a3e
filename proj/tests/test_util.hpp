#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "kgpr/graph.hpp"

namespace kgpr::test {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(KGPR_TEST_DATA_DIR) / name;
}

/// a-b, b-c, c-d, d-e, e-f under relation "r".
inline KnowledgeGraph chain_graph() {
  return KnowledgeGraph::from_tuples(
      {{"a", "r", "b"}, {"b", "r", "c"}, {"c", "r", "d"}, {"d", "r", "e"}, {"e", "r", "f"}});
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("kgpr_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace kgpr::test
