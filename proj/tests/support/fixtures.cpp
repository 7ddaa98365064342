#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>

namespace sftest {

std::filesystem::path DataPath(const std::string& name) { return std::filesystem::path(STYLEFACTOR_TEST_DATA) / name; }

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("stylefactor-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace sftest
