#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wbrom {

/// Shortest decimal form that parses back to the same double; "inf"/"nan"
/// for non-finite values.
std::string format_number(double v);
double parse_number(std::string_view text);

class CsvWriter {
 public:
  void row(const std::vector<std::string>& cells);
  void row(std::string_view label, const std::vector<double>& values);
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // throws Error(Io) if missing
};

/// Comma separated, first line is the header. No quoting support.
CsvTable parse_csv(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace wbrom
