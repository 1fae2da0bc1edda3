#pragma once

// Minimal CSV support: UTF-8, header row, comma separated, no quoting.
// All project formats are numeric columns plus plain identifiers.

#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace arrival {

class CsvReader {
 public:
  explicit CsvReader(const std::string& path);

  // Index of a required column; throws ValidationError naming file and column.
  int column(const std::string& name) const;
  std::optional<int> find_column(const std::string& name) const;

  // Advances to the next data row; false at end of file. Blank lines skip.
  bool next_row();

  int line_number() const { return line_; }
  const std::string& path() const { return path_; }

  const std::string& field(int col) const;
  bool empty_field(int col) const;
  double number(int col) const;
  long long integer(int col) const;

  // "file:line: message"
  [[noreturn]] void fail(const std::string& message) const;

 private:
  std::string path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  std::vector<std::string> fields_;
  std::unordered_map<std::string, int> index_;
  int line_ = 0;
};

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  // One formatted field per column; empty string writes an empty cell.
  void row(const std::vector<std::string>& fields);

  // Shortest representation that round-trips through a double.
  static std::string num(double v);
  static std::string num(long long v);
  static std::string num(int v) { return num(static_cast<long long>(v)); }

 private:
  std::string path_;
  std::ofstream out_;
  size_t width_;
};

}  // namespace arrival
