#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace ballwave {

// Shortest text for a double that reads back bit-identically (%.17g).
std::string fmt_g17(double);

// RFC-4180-style writer: comma separators, '\n' line ends, UTF-8, quoting
// only where required. Every row must match the header's column count.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path&);
  ~CsvWriter();

  void header(const std::vector<std::string>& names);
  CsvWriter& field(const std::string&);
  CsvWriter& field(double);
  CsvWriter& field(int);
  CsvWriter& field(std::int64_t);
  CsvWriter& field(std::uint64_t);
  void end_row();
  void close();

 private:
  void put(const std::string&);

  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t n_cols_ = 0;
  std::size_t row_cols_ = 0;
};

}  // namespace ballwave
