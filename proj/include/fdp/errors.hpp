#pragma once

#include <stdexcept>

namespace fdp {

// Bad input data (malformed CSV, missing files, broken references). CLI exit 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A pipeline stage failed after inputs were accepted. CLI exit 3.
struct PipelineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fdp
