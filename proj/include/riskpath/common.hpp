#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace riskpath {

inline constexpr const char* kVersion = "0.1.0";

// Every failure mode the library reports. The CLI maps these onto
// stage-tagged exit codes; tests match on the code, not the message.
enum class errc {
  // transport / csv ingest
  malformed_header,
  truncated_observation,
  unsupported_version,
  missing_column,
  non_numeric_cell,
  // codebook
  empty_result,
  unknown_source,
  degenerate_split,
  // descriptives
  non_positive_value,
  unknown_level,
  // resampling
  single_class,
  too_few_minority,
  k_too_large,
  // solver
  collinear,
  no_convergence,
  invalid_penalty,
  alpha_zero,
  column_mismatch,
  // selection
  degenerate_fold,
  all_zero_path,
  // cli
  config_error,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::malformed_header: return "MalformedHeader";
    case errc::truncated_observation: return "TruncatedObservation";
    case errc::unsupported_version: return "UnsupportedVersion";
    case errc::missing_column: return "MissingColumn";
    case errc::non_numeric_cell: return "NonNumericCell";
    case errc::empty_result: return "EmptyResult";
    case errc::unknown_source: return "UnknownSource";
    case errc::degenerate_split: return "DegenerateSplit";
    case errc::non_positive_value: return "NonPositiveValue";
    case errc::unknown_level: return "UnknownLevel";
    case errc::single_class: return "SingleClass";
    case errc::too_few_minority: return "TooFewMinority";
    case errc::k_too_large: return "KTooLarge";
    case errc::collinear: return "Collinear";
    case errc::no_convergence: return "NoConvergence";
    case errc::invalid_penalty: return "InvalidPenalty";
    case errc::alpha_zero: return "AlphaZero";
    case errc::column_mismatch: return "ColumnMismatch";
    case errc::degenerate_fold: return "DegenerateFold";
    case errc::all_zero_path: return "AllZeroPath";
    case errc::config_error: return "ConfigError";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool ok, errc code, const std::string& what) {
  if (!ok) raise(code, what);
}

}  // namespace riskpath
