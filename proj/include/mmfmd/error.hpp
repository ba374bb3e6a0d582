#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mmfmd {

// Bad arguments, inconsistent configuration, or data that violates a
// documented contract. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The file system refused an open/read/write. CLI exit code 3.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// File opened fine but its contents are malformed.
class FormatError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class UnsupportedVersionError : public FormatError {
public:
  explicit UnsupportedVersionError(std::uint32_t version)
      : FormatError("unsupported container version " + std::to_string(version) +
                    " (expected 1)"),
        version_(version) {}
  std::uint32_t version() const noexcept { return version_; }

private:
  std::uint32_t version_;
};

class TruncatedFileError : public FormatError {
public:
  explicit TruncatedFileError(std::uint64_t record_index)
      : FormatError("file truncated: record " + std::to_string(record_index) +
                    " is incomplete"),
        record_index_(record_index) {}
  std::uint64_t record_index() const noexcept { return record_index_; }

private:
  std::uint64_t record_index_;
};

// Pearson correlation is undefined when one image is constant over the ROI.
class DegenerateCorrelationError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Sampled basis is not orthonormal enough (grid too coarse, window too small).
class OrthogonalityError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Off-axis sideband cannot be isolated from the autocorrelation term.
class ReconstructionError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class ConditioningError : public ValidationError {
public:
  explicit ConditioningError(double condition_number)
      : ValidationError("matrix is ill-conditioned (condition number " +
                        std::to_string(condition_number) + " > 1e6)"),
        condition_number_(condition_number) {}
  double condition_number() const noexcept { return condition_number_; }

private:
  double condition_number_;
};

}  // namespace mmfmd
