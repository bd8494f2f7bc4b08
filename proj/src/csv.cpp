#include "gvh/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "gvh/errors.hpp"

namespace gvh {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

void CsvTable::comment(std::string_view line) {
  text_ += "# ";
  text_ += line;
  text_ += '\n';
}

void CsvTable::header(std::initializer_list<std::string_view> columns) {
  bool first = true;
  for (auto c : columns) {
    if (!first) text_ += ',';
    text_ += c;
    first = false;
  }
  text_ += '\n';
}

CsvTable& CsvTable::cell(double x) { return cell(std::string_view(format_double(x))); }

CsvTable& CsvTable::cell(long long x) { return cell(std::string_view(std::to_string(x))); }

CsvTable& CsvTable::cell(std::string_view text) {
  if (row_open_) text_ += ',';
  text_ += text;
  row_open_ = true;
  return *this;
}

void CsvTable::end_row() {
  text_ += '\n';
  row_open_ = false;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text_;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace gvh
