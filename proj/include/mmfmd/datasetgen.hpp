#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mmfmd/fiber_modes.hpp"
#include "mmfmd/labels.hpp"
#include "mmfmd/mode_weights.hpp"

namespace mmfmd {

// ---------------------------------------------------------------------------
// Dataset container
//
//   "MMFD" | u32 version=1 | u32 N | u32 H | u32 W | u64 count | u32 flags |
//   u64 seed | count x (H*W float32 image, 2N-1 float32 label)
//
// Little-endian throughout, no padding. Images are row-major and
// peak-normalized to 1.0.
// ---------------------------------------------------------------------------

inline constexpr std::array<char, 4> kDatasetMagic{'M', 'M', 'F', 'D'};
inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::size_t kDatasetHeaderBytes = 40;

enum DatasetFlags : std::uint32_t {
  kFlagSmc = 1u << 0,
  kFlagPrmc = 1u << 1,
};

struct DatasetHeader {
  std::uint32_t version = kContainerVersion;
  std::uint32_t modes = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint64_t count = 0;
  std::uint32_t flags = 0;
  std::uint64_t seed = 0;

  std::size_t label_length() const { return 2 * std::size_t{modes} - 1; }
  std::size_t record_floats() const { return std::size_t{height} * width + label_length(); }
  std::uint64_t file_size() const { return kDatasetHeaderBytes + count * record_floats() * 4; }
  bool operator==(const DatasetHeader&) const = default;
};

struct DatasetRecord {
  std::vector<float> image;
  std::vector<float> label;
  bool operator==(const DatasetRecord&) const = default;
};

// Writes the header up front; close() checks that exactly `count` records
// were appended.
class DatasetWriter {
public:
  DatasetWriter(const std::filesystem::path& path, const DatasetHeader& header);
  void write(const DatasetRecord& record);
  void close();
  std::uint64_t written() const noexcept { return written_; }

private:
  std::filesystem::path path_;
  DatasetHeader header_;
  std::ofstream out_;
  std::uint64_t written_ = 0;
};

// Streams records; validates magic, version and that the file holds `count`
// complete records.
class DatasetReader {
public:
  explicit DatasetReader(const std::filesystem::path& path);

  const DatasetHeader& header() const noexcept { return header_; }
  // Next record in file order; std::nullopt after the last one.
  std::optional<DatasetRecord> next();
  DatasetRecord read(std::uint64_t index);

private:
  DatasetRecord read_current(std::uint64_t index);

  std::filesystem::path path_;
  std::ifstream in_;
  DatasetHeader header_;
  std::uint64_t cursor_ = 0;
};

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path,
                                        DatasetHeader* header = nullptr);

// Image (float32, peak 1.0) and label for canonical weights.
DatasetRecord make_record(const ModeWeights& canonical, const ModeBasis& basis);
IntensityImage record_image(const DatasetRecord& record, double pixel_pitch = 1.0);
LabelVector record_label(const DatasetRecord& record);

// ---------------------------------------------------------------------------
// Specified mode combinations
// ---------------------------------------------------------------------------

enum class SmcMode { full_grid, extremes };

struct SmcGridSpec {
  double s_amp = 0.5;
  double s_phase = 0.5;
  SmcMode mode = SmcMode::full_grid;

  void validate() const;
  // floor(1/s) + 1 grid points per axis.
  std::uint64_t amp_points() const;
  std::uint64_t phase_points() const;
};

using BigCount = boost::multiprecision::cpp_int;

// (floor(1/s_amp)+1)^N * (floor(1/s_phase)+1)^(N-1): the full grid size,
// including the all-zero amplitude points.
BigCount smc_count(double s_amp, double s_phase, unsigned modes);

// Records gen_smc writes (all-zero amplitude points skipped).
BigCount smc_record_count(const SmcGridSpec& spec, unsigned modes);

// Canonical weights of SMC record `index` in enumeration order.
ModeWeights smc_weights(const SmcGridSpec& spec, unsigned modes, std::uint64_t index);

inline constexpr std::uint64_t kDefaultRecordCap = 5'000'000;

void gen_smc(const SmcGridSpec& spec, const ModeBasis& basis, const std::filesystem::path& out,
             std::uint64_t cap = kDefaultRecordCap);

// ---------------------------------------------------------------------------
// Pseudo-random mode combinations
// ---------------------------------------------------------------------------

// Raw draw for record k: rho_i ~ U[0,1], phi_i ~ U[0, 2 pi), phi_0 = 0.
ModeWeights prmc_raw_weights(std::uint64_t seed, std::uint64_t index, unsigned modes);
// Canonicalized draw.
ModeWeights prmc_weights(std::uint64_t seed, std::uint64_t index, unsigned modes);

void gen_prmc(std::uint64_t count, const ModeBasis& basis, std::uint64_t seed,
              const std::filesystem::path& out);

// ---------------------------------------------------------------------------
// Train / validation / test split
// ---------------------------------------------------------------------------

struct SplitSpec {
  // Either fractions (summing to 1) ...
  std::array<double, 3> fractions{0.8, 0.1, 0.1};
  // ... or absolute validation/test holdouts, the rest going to training.
  std::optional<std::array<std::uint64_t, 2>> holdouts;

  static SplitSpec ratio(double train, double val, double test);
  static SplitSpec holdout(std::uint64_t val, std::uint64_t test);
};

// Record counts per part; largest-remainder rounding for fractions.
std::array<std::uint64_t, 3> split_counts(std::uint64_t total, const SplitSpec& spec);

// Seeded permutation, then contiguous train/val/test assignment.
void split(const std::filesystem::path& in, const SplitSpec& spec, std::uint64_t seed,
           const std::array<std::filesystem::path, 3>& out);

}  // namespace mmfmd
