#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "mmfmd/fiber_modes.hpp"

namespace mmfmd {

// Plain-text `key = value` settings. '#' starts a comment; blank lines are
// ignored; later keys override earlier ones.
class Config {
public:
  Config() = default;
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

private:
  std::optional<std::string> find(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

// core_diameter_um, na, wavelength_nm, grid_size, window_factor or
// window_side_um. Defaults describe the 10-mode fiber on a 64 x 64 grid.
FiberSpec fiber_spec_from(const Config& cfg);

// Builds the basis and keeps only the first `modes` entries when set.
ModeBasis basis_from(const Config& cfg);

}  // namespace mmfmd
