#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "mmfmd/fiber_modes.hpp"

namespace testing {

// Scratch directory shared by the test binaries (set by ctest).
inline std::filesystem::path scratch(const std::string& name) {
  const char* env = std::getenv("MMFMD_TEST_TMP");
  std::filesystem::path dir =
      env ? std::filesystem::path(env) : std::filesystem::temp_directory_path() / "mmfmd_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// Bases are expensive enough to share within one binary.
inline const mmfmd::ModeBasis& basis10_64() {
  static const mmfmd::ModeBasis b = mmfmd::build_basis(mmfmd::fiber10_spec(64));
  return b;
}

inline const mmfmd::ModeBasis& basis55_64() {
  static const mmfmd::ModeBasis b = mmfmd::build_basis(mmfmd::fiber55_spec(64));
  return b;
}

}  // namespace testing
