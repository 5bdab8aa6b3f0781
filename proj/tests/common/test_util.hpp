#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

namespace test_util {

/// Fresh, empty directory under the system temp dir, unique per call.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto p = std::filesystem::temp_directory_path() /
                 ("wordconf_test_" + std::to_string(::getpid()) + "_" + tag + "_" +
                  std::to_string(counter++));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace test_util
