#include "pcrlb/csv.hpp"

#include "pcrlb/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace pcrlb {

std::string format_number(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += header[i];
  }
  buffer_ += '\n';
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_number(v)); }

CsvWriter& CsvWriter::cell(std::int64_t v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (pending_++) buffer_ += ',';
  buffer_ += v;
  return *this;
}

CsvWriter& CsvWriter::empty() { return cell(std::string()); }

void CsvWriter::end_row() {
  if (pending_ != width_)
    throw IoError("csv row has " + std::to_string(pending_) + " cells, header has " + std::to_string(width_));
  buffer_ += '\n';
  pending_ = 0;
}

void CsvWriter::write(const std::filesystem::path& path) const { write_text_file(path, buffer_); }

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw IoError("csv column '" + name + "' not found");
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header)
    if (h == name) return true;
  return false;
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& s = rows.at(row).at(col);
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("csv cell '" + s + "' in column " + header.at(col) + " is not a number");
  return v;
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : l) {
      if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    cells.push_back(cur);
    return cells;
  };
  if (!std::getline(in, line)) throw IoError(origin + ": empty csv");
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.header.size())
      throw IoError(origin + ": row " + std::to_string(table.rows.size() + 1) + " has wrong width");
    table.rows.push_back(std::move(cells));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text_file(path), path.string()); }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pcrlb
