#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "colcomplete/matrix.hpp"

namespace colcomplete {

// Comma-separated rows, optionally preceded by a "# rows cols" line. Blank
// lines are skipped. Throws ParseError (with the 1-based line) on a ragged
// row, an unreadable number or a header/body mismatch.
DenseMatrix parse_csv(const std::string& text);
DenseMatrix load_csv(const std::filesystem::path& path);

// Writes the "# rows cols" header and every value with 17 significant digits.
std::string format_csv(const DenseMatrix& mtx);
void save_csv(const DenseMatrix& mtx, const std::filesystem::path& path);

// One real per line.
std::vector<double> load_grid(const std::filesystem::path& path);

// Shortest text that parses back to exactly x.
std::string format_real(double x);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace colcomplete
