#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace surmr::io {

struct CsvRow {
  std::size_t line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

// Comma-separated text with a mandatory header row. Fields may be
// double-quoted; CRLF line endings are accepted on input.
class CsvTable {
 public:
  static CsvTable read(const std::filesystem::path& path, const std::vector<std::string>& required);
  static CsvTable parse(std::istream& in, const std::string& source,
                        const std::vector<std::string>& required);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<CsvRow>& rows() const { return rows_; }
  bool has_column(std::string_view name) const;
  std::size_t column(std::string_view name) const;
  const std::string& source() const { return source_; }

  // "<source>:<line>: <message>"
  [[noreturn]] void fail(const CsvRow& row, const std::string& message) const;

  const std::string& field(const CsvRow& row, std::string_view name) const;
  double number(const CsvRow& row, std::string_view name) const;
  long long integer(const CsvRow& row, std::string_view name) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<CsvRow> rows_;
};

// Writes LF-terminated rows, quoting fields only when needed.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

// Round-trip decimal representation (17 significant digits).
std::string format_real(double v);

// Write `content` to `path` atomically enough for batch use (temp + rename).
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace surmr::io
