#pragma once

#include <stdexcept>
#include <string>

namespace aemon {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad caller-supplied data: shape mismatch, empty input, out-of-range value.
struct InputError : Error {
  using Error::Error;
};

// API misuse: backward without forward, optimizer state out of sync.
struct StateError : Error {
  using Error::Error;
};

// Invalid architecture description.
struct SpecError : Error {
  using Error::Error;
};

// Training produced a non-finite loss.
struct TrainingError : Error {
  TrainingError(const std::string& msg, int epoch_, int batch_)
      : Error(msg), epoch(epoch_), batch(batch_) {}
  int epoch = -1;
  int batch = -1;
};

// Malformed file content. line is 1-based; 0 = not line-specific.
struct ParseError : Error {
  explicit ParseError(const std::string& msg, long line_ = 0)
      : Error(msg), line(line_) {}
  long line = 0;
};

// Corrupt, truncated or version-incompatible artifact file.
struct IntegrityError : Error {
  using Error::Error;
};

// Filesystem failure (missing file, unwritable path).
struct IoError : Error {
  using Error::Error;
};

// Metric undefined for the given input (e.g. single-class ROC).
struct MetricError : Error {
  using Error::Error;
};

}  // namespace aemon
