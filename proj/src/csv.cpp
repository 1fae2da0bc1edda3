#include "arrival/csv.hpp"

#include <charconv>
#include <cstdlib>
#include <iostream>

#include "arrival/common.hpp"

namespace arrival {

void warn(const std::string& message) {
  std::cerr << "warning: " << message << "\n";
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    std::string field = (comma == std::string::npos)
                            ? line.substr(start)
                            : line.substr(start, comma - start);
    // trim spaces and a trailing CR from Windows line endings
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    out.push_back(std::move(field));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvReader::CsvReader(const std::string& path) : path_(path), in_(path) {
  if (!in_) throw ValidationError(cat(path, ": cannot open file"));
  std::string line;
  if (!std::getline(in_, line)) throw ValidationError(cat(path, ": empty file, missing header"));
  line_ = 1;
  header_ = split_line(line);
  for (size_t i = 0; i < header_.size(); ++i) index_[header_[i]] = static_cast<int>(i);
}

int CsvReader::column(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw ValidationError(cat(path_, ": missing required column '", name, "'"));
  return it->second;
}

std::optional<int> CsvReader::find_column(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool CsvReader::next_row() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.empty() || line == "\r") continue;
    fields_ = split_line(line);
    if (fields_.size() != header_.size())
      fail(cat("expected ", header_.size(), " fields, found ", fields_.size()));
    return true;
  }
  return false;
}

const std::string& CsvReader::field(int col) const { return fields_.at(col); }

bool CsvReader::empty_field(int col) const { return fields_.at(col).empty(); }

double CsvReader::number(int col) const {
  const std::string& f = fields_.at(col);
  char* end = nullptr;
  double v = std::strtod(f.c_str(), &end);
  if (f.empty() || end != f.c_str() + f.size())
    fail(cat("non-numeric value '", f, "' in column '", header_[col], "'"));
  return v;
}

long long CsvReader::integer(int col) const {
  const std::string& f = fields_.at(col);
  long long v = 0;
  auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || p != f.data() + f.size())
    fail(cat("non-integer value '", f, "' in column '", header_[col], "'"));
  return v;
}

void CsvReader::fail(const std::string& message) const {
  throw ValidationError(cat(path_, ":", line_, ": ", message));
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), out_(path), width_(header.size()) {
  if (!out_) throw ValidationError(cat(path, ": cannot open file for writing"));
  for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_)
    throw ValidationError(cat(path_, ": row has ", fields.size(), " fields, header has ", width_));
  for (size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
  out_ << "\n";
  if (!out_) throw ValidationError(cat(path_, ": write failed"));
}

std::string CsvWriter::num(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

std::string CsvWriter::num(long long v) {
  char buf[24];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace arrival
