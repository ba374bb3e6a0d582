#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmfmd/datasetgen.hpp"
#include "mmfmd/field_ops.hpp"
#include "mmfmd/fiber_modes.hpp"

namespace mmfmd {

// ---------------------------------------------------------------------------
// Prediction container
//
//   "MMFP" | u32 version=1 | u32 N | u64 count | count x (2N-1 float32)
// ---------------------------------------------------------------------------

inline constexpr std::array<char, 4> kPredictionMagic{'M', 'M', 'F', 'P'};
inline constexpr std::size_t kPredictionHeaderBytes = 20;

struct PredictionFile {
  std::uint32_t modes = 0;
  std::vector<std::vector<float>> records;  // each 2N-1 values in [0, 1]
};

void write_predictions(const std::filesystem::path& path, const PredictionFile& preds);
PredictionFile read_predictions(const std::filesystem::path& path);

// Perfect predictor: the dataset's own labels.
PredictionFile exact_predictions(const std::filesystem::path& dataset);
// Degenerate predictor: every entry set to `value`.
PredictionFile constant_predictions(std::uint32_t modes, std::uint64_t count, float value = 0.5f);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ScoreReport {
  std::vector<double> gammas;
  std::string method;
  std::string resolution;

  double mean() const;
  double stddev() const;  // sample standard deviation, 0 below two entries
  double min() const;
};

// Decodes every prediction against its record's stored image (sign search)
// and collects the resulting correlation coefficients.
ScoreReport score_predictions(const std::filesystem::path& dataset, const PredictionFile& preds,
                              const ModeBasis& basis, const std::optional<RoiMask>& roi = {});

struct ResolutionComparison {
  ScoreReport full;  // holographic MD on the full camera grid
  ScoreReport down;  // holographic MD after downsampling
};

// What the reconstructed amplitude is correlated with.
enum class ScoreReference {
  ground_truth,  // noise-free amplitude of the simulated field
  measured,      // noisy camera amplitude fed to the decomposition
};

// Random fields on `basis`'s grid; pipeline A decomposes the noisy measured
// amplitude + phase directly, pipeline B first downsamples both to
// `low_size`. Each pipeline correlates its reconstructed amplitude with the
// reference amplitude at its own resolution.
ResolutionComparison compare_resolutions(std::size_t trials, const ModeBasis& basis,
                                         const CameraNoise& noise, std::uint64_t seed,
                                         std::size_t low_size = 64,
                                         ScoreReference reference = ScoreReference::ground_truth);

// CSV with columns index,gamma,method,resolution: one row per record, then
// summary rows (mean, std, min, count) per report and, when given, a ratio
// row holding `ratio`.
void emit_report(const std::vector<ScoreReport>& reports, const std::filesystem::path& path,
                 std::optional<double> ratio = std::nullopt);
void emit_report(const ScoreReport& report, const std::filesystem::path& path);

struct ParsedReport {
  std::vector<ScoreReport> reports;
  // (statistic, method, resolution) -> value, from the summary rows.
  struct Summary {
    std::string statistic;
    double value;
    std::string method;
    std::string resolution;
  };
  std::vector<Summary> summary;
};

ParsedReport parse_report(const std::filesystem::path& path);

}  // namespace mmfmd
