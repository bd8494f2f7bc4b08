#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace gvh {

/// Shortest round-trip decimal form of x ('.' separator, no locale).
std::string format_double(double x);

/// Accumulates CSV text in memory; written by a single writer once compute
/// is complete so that output bytes never depend on scheduling.
class CsvTable {
public:
  /// Comment lines are emitted first, each prefixed with "# ".
  void comment(std::string_view line);
  void header(std::initializer_list<std::string_view> columns);
  CsvTable& cell(double x);
  CsvTable& cell(long long x);
  CsvTable& cell(std::size_t x) { return cell(static_cast<long long>(x)); }
  CsvTable& cell(int x) { return cell(static_cast<long long>(x)); }
  CsvTable& cell(std::string_view text);
  void end_row();

  const std::string& text() const noexcept { return text_; }
  void write(const std::filesystem::path& path) const;

private:
  std::string text_;
  bool row_open_ = false;
};

}  // namespace gvh
