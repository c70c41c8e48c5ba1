#include "khaos/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace khaos {

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

// Split one logical CSV record starting at stream position; handles quoted
// fields spanning newlines.
bool read_record(std::istream& is, std::vector<std::string>& fields,
                 int& line_no) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int c;
  while ((c = is.get()) != EOF) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (is.peek() == '"') {
          field.push_back('"');
          is.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(static_cast<char>(c));
      }
    } else if (c == '"') {
      if (!field.empty())
        throw std::invalid_argument("CSV: stray quote at line " +
                                    std::to_string(line_no));
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      if (is.peek() == '\n') is.get();
      ++line_no;
      fields.push_back(std::move(field));
      return true;
    } else if (c == '\n') {
      ++line_no;
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(static_cast<char>(c));
    }
  }
  if (in_quotes)
    throw std::invalid_argument("CSV: unterminated quote at end of input");
  if (any) fields.push_back(std::move(field));
  return any;
}

}  // namespace

CsvTable read_csv(std::istream& is) {
  CsvTable table;
  std::vector<std::string> fields;
  int line_no = 1;

  // Header (after any leading '#' metadata lines).
  for (;;) {
    if (!read_record(is, fields, line_no))
      throw std::invalid_argument("CSV: empty input");
    if (!fields.empty() && !fields[0].empty() && fields[0][0] == '#') continue;
    table.header = fields;
    break;
  }
  if (table.header.empty())
    throw std::invalid_argument("CSV: missing header row");

  while (read_record(is, fields, line_no)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (!fields.empty() && !fields[0].empty() && fields[0][0] == '#') continue;
    if (fields.size() != table.header.size())
      throw std::invalid_argument(
          "CSV: row " + std::to_string(table.rows.size() + 1) + " has " +
          std::to_string(fields.size()) + " fields, expected " +
          std::to_string(table.header.size()));
    table.rows.push_back(fields);
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  return read_csv(in);
}

Eigen::MatrixXd numeric_columns(const CsvTable& table,
                                const std::vector<int>& columns) {
  Eigen::MatrixXd out(table.nrow(), static_cast<Eigen::Index>(columns.size()));
  for (int i = 0; i < table.nrow(); ++i) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const int j = columns[k];
      const std::string& cell = table.rows[static_cast<std::size_t>(i)]
                                          [static_cast<std::size_t>(j)];
      double v = 0.0;
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      auto [ptr, ec] = std::from_chars(begin, end, v);
      if (ec != std::errc() || ptr != end)
        throw std::invalid_argument(
            "non-numeric cell at row " + std::to_string(i + 1) + ", column '" +
            table.header[static_cast<std::size_t>(j)] + "': '" + cell + "'");
      out(i, static_cast<Eigen::Index>(k)) = v;
    }
  }
  return out;
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) os << ',';
    const std::string& f = fields[i];
    const bool needs_quotes =
        f.find_first_of(",\"\r\n") != std::string::npos;
    if (needs_quotes) {
      os << '"';
      for (char c : f) {
        if (c == '"') os << "\"\"";
        else os << c;
      }
      os << '"';
    } else {
      os << f;
    }
  }
  os << '\n';
}

std::string format_double(double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(shorter, "%lf", &back);
    if (back == v) return shorter;
  }
  return std::string(buf, static_cast<std::size_t>(len));
}

}  // namespace khaos
