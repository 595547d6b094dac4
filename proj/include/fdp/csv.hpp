#pragma once

#include <istream>
#include <string>
#include <vector>

namespace fdp {

/// Minimal CSV reader: comma-separated, optional RFC-4180 quoting with ""
/// escapes, UTF-8 passed through untouched. Tracks the 1-based line number
/// for error reporting.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  /// Reads the next row into `fields`. Returns false at end of input.
  /// Blank lines are skipped.
  bool next(std::vector<std::string>& fields);

  long line_number() const { return line_; }

 private:
  std::istream& in_;
  long line_ = 0;
};

/// Quotes a field only when needed.
std::string csv_escape(const std::string& field);

}  // namespace fdp
