#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

namespace khaos {

/// A parsed CSV table: header names plus string cells. Lines starting with
/// '#' before the header are treated as metadata and skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int ncol() const { return static_cast<int>(header.size()); }
  int nrow() const { return static_cast<int>(rows.size()); }
  int column_index(const std::string& name) const;  // -1 when absent
};

/// RFC 4180 reader: quoted fields, doubled quotes, CR/LF or LF endings.
/// Throws std::invalid_argument (with row numbers) on malformed input.
CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

/// Numeric view of selected columns. Throws with row/column coordinates on
/// non-numeric cells.
Eigen::MatrixXd numeric_columns(const CsvTable& table,
                                const std::vector<int>& columns);

/// One RFC 4180 row (fields quoted when they contain comma/quote/newline).
void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);

/// Shortest round-trip representation of a double.
std::string format_double(double v);

}  // namespace khaos
