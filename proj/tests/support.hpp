#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "tractconn/error.hpp"

namespace testing_support {

template <class Fn>
void expect_error(tractconn::Errc code, Fn&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected error " << tractconn::to_string(code);
  } catch (const tractconn::Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("tractconn-" + tag + "-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
