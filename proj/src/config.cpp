#include "mmfmd/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "mmfmd/error.hpp"

namespace mmfmd {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty())
      throw ValidationError("config line " + std::to_string(line_no) + ": empty key");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

std::optional<std::string> Config::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return d;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': '" + *v + "' is not a number");
  }
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const auto i = std::stoll(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return i;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': '" + *v + "' is not an integer");
  }
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  if (v->empty() || v->front() == '-')
    throw ValidationError("config key '" + key + "': '" + *v + "' is not a non-negative integer");
  try {
    std::size_t used = 0;
    const auto i = std::stoull(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return i;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': '" + *v + "' is not a non-negative integer");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  std::string s = *v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ValidationError("config key '" + key + "': '" + *v + "' is not a boolean");
}

FiberSpec fiber_spec_from(const Config& cfg) {
  const double diameter = cfg.get_double("core_diameter_um", 10.0) * 1e-6;
  FiberSpec spec = FiberSpec::from_diameter(
      diameter, cfg.get_double("na", 0.1), cfg.get_double("wavelength_nm", 532.0) * 1e-9,
      static_cast<int>(cfg.get_int("grid_size", 64)), cfg.get_double("window_factor", 3.0));
  if (cfg.has("window_side_um")) spec.window_side = cfg.get_double("window_side_um", 0.0) * 1e-6;
  spec.validate();
  return spec;
}

ModeBasis basis_from(const Config& cfg) {
  auto basis = build_basis(fiber_spec_from(cfg));
  if (cfg.has("modes")) {
    const auto n = cfg.get_int("modes", 0);
    if (n < 1) throw ValidationError("config key 'modes' must be >= 1");
    return basis.truncated(static_cast<std::size_t>(n));
  }
  return basis;
}

}  // namespace mmfmd
