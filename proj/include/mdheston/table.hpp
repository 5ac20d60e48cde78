#ifndef MDHESTON_TABLE_HPP
#define MDHESTON_TABLE_HPP

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mdheston {

/// Plain table of text cells; numbers are written with 17 significant digits
/// so that they parse back to the same double.
struct Table {
  std::vector<std::pair<std::string, std::string>> header;  // key/value metadata
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  bool operator==(const Table&) const = default;
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Inverse of format_number; throws on text that is not a number.
inline double parse_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

namespace detail {

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw std::invalid_argument("csv: unterminated quote");
  cells.push_back(std::move(cur));
  return cells;
}

}  // namespace detail

/// Header lines "# key: value", then the column line, then one line per row.
inline void write_csv(std::ostream& os, const Table& t) {
  for (const auto& [k, v] : t.header) os << "# " << k << ": " << v << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << detail::csv_cell(t.columns[i]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << detail::csv_cell(row[i]);
    os << '\n';
  }
}

inline Table read_csv(std::istream& is) {
  Table t;
  std::string line;
  bool have_columns = false;
  while (std::getline(is, line)) {
    if (!have_columns && line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ", 2);
      if (colon == std::string::npos) throw std::invalid_argument("csv: malformed header line");
      t.header.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
      continue;
    }
    if (!have_columns) {
      t.columns = detail::split_csv_line(line);
      have_columns = true;
      continue;
    }
    auto cells = detail::split_csv_line(line);
    if (cells.size() != t.columns.size()) throw std::invalid_argument("csv: row width differs from the header");
    t.rows.push_back(std::move(cells));
  }
  if (!have_columns) throw std::invalid_argument("csv: missing column line");
  return t;
}

inline std::string to_csv(const Table& t) {
  std::ostringstream s;
  write_csv(s, t);
  return s.str();
}

inline Table from_csv(const std::string& text) {
  std::istringstream s(text);
  return read_csv(s);
}

}  // namespace mdheston

#endif  // MDHESTON_TABLE_HPP
