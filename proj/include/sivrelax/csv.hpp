#pragma once

// Minimal CSV reading and writing for the tool's tabular inputs and outputs.
// Lines starting with '#' are comments; the first other line is the header.

#include <iosfwd>
#include <string>
#include <vector>

#include "sivrelax/dynamics.hpp"

namespace sivrelax {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws std::invalid_argument if missing.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  /// Parses a cell as a double; throws std::invalid_argument on bad input.
  double number(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Shortest round-trip representation of a double.
std::string format_number(double v);

/// Writes "# <provenance>" (if non-empty), the header, then rows.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header,
            const std::string& provenance = {});
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
  std::size_t width_;
};

/// Columns time_s, signal and, when present, sigma.
void write_decay_csv(std::ostream& out, const DecayCurve& curve, const std::string& provenance = {});
DecayCurve decay_from_table(const CsvTable& table);

}  // namespace sivrelax
