#pragma once

// Plain-text and binary artifact writers. CSV files use '.' decimals, '\n'
// line ends, a header row, and 17 significant digits for floats.

#include <string>
#include <vector>

#include "kron/algebra.hpp"

namespace kron {

std::string format_double(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& cells);
  void add_row(const std::vector<double>& values);
  std::string str() const;
  void write(const std::string& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

/// uint64 little-endian count followed by float64 little-endian values.
void write_eigenvalue_dump(const std::string& path, const RealVector& values);
RealVector read_eigenvalue_dump(const std::string& path);

}  // namespace kron
