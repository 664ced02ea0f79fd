#include "colcomplete/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "colcomplete/errors.hpp"

namespace colcomplete {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v))
    throw ParseError("cannot read number '" + std::string(field) + "'", line);
  return v;
}

std::size_t parse_count(std::string_view field, std::size_t line) {
  field = trim(field);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError("bad header field '" + std::string(field) + "'", line);
  return v;
}

}  // namespace

DenseMatrix parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::size_t want_rows = 0, want_cols = 0, header_line = 0;
  bool header = false;
  std::size_t cols = 0;
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (header || rows > 0) throw ParseError("unexpected comment line", line_no);
      std::istringstream hs{std::string(line.substr(1))};
      std::string a, b, extra;
      if (!(hs >> a >> b) || (hs >> extra)) throw ParseError("header must be '# rows cols'", line_no);
      want_rows = parse_count(a, line_no);
      want_cols = parse_count(b, line_no);
      header = true;
      header_line = line_no;
      continue;
    }
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      values.push_back(parse_real(line.substr(start, comma - start), line_no));
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError("row has " + std::to_string(count) + " fields, expected " + std::to_string(cols),
                       line_no);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("no data rows", line_no == 0 ? 1 : line_no);
  if (header && (want_rows != rows || want_cols != cols))
    throw ParseError("header declares " + std::to_string(want_rows) + "x" + std::to_string(want_cols) +
                         " but body is " + std::to_string(rows) + "x" + std::to_string(cols),
                     header_line);
  return DenseMatrix(rows, cols, std::move(values));
}

DenseMatrix load_csv(const std::filesystem::path& path) {
  try {
    return parse_csv(read_text(path));
  } catch (Error& e) {
    e.add_context(path.string());
    throw;
  }
}

std::string format_real(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format_csv(const DenseMatrix& mtx) {
  std::string out = "# " + std::to_string(mtx.rows()) + " " + std::to_string(mtx.cols()) + "\n";
  char buf[40];
  for (std::size_t i = 0; i < mtx.rows(); ++i) {
    for (std::size_t j = 0; j < mtx.cols(); ++j) {
      if (j) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", mtx(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void save_csv(const DenseMatrix& mtx, const std::filesystem::path& path) {
  write_text(path, format_csv(mtx));
}

std::vector<double> load_grid(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string raw;
  std::vector<double> grid;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    grid.push_back(parse_real(line, line_no));
  }
  if (grid.empty()) throw ParseError("grid file has no values", line_no == 0 ? 1 : line_no);
  return grid;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArgumentError("cannot write " + path.string());
  out << text;
  if (!out) throw ArgumentError("write failed for " + path.string());
}

}  // namespace colcomplete
