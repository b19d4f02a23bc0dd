#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pcrlb {

// Shortest round-trip decimal form; NaN is written as an empty cell.
std::string format_number(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& cell(double v);
  CsvWriter& cell(std::int64_t v);
  CsvWriter& cell(const std::string& v);
  CsvWriter& empty();
  // Closes the current row; throws IoError if its width differs from the header.
  void end_row();

  std::string str() const { return buffer_; }
  // Writes to a temporary sibling and renames it into place.
  void write(const std::filesystem::path& path) const;

 private:
  std::size_t width_;
  std::size_t pending_ = 0;
  std::string buffer_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws IoError naming the missing column.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  // Empty cells read as NaN.
  double number(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& origin = "<memory>");

// Atomic whole-file write.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace pcrlb
