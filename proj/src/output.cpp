#include "ballwave/output.hpp"

#include <cstdio>
#include <stdexcept>

namespace ballwave {

std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path)
    : out_(path), path_(path) {
  if (!out_) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
}

CsvWriter::~CsvWriter() {
  try {
    close();
  } catch (...) {
    // A failed flush in a destructor cannot be reported; explicit close()
    // is the path that surfaces write errors.
  }
}

void CsvWriter::header(const std::vector<std::string>& names) {
  if (n_cols_ != 0) {
    throw std::logic_error("CsvWriter: header already written");
  }
  if (names.empty()) {
    throw std::logic_error("CsvWriter: empty header");
  }
  n_cols_ = names.size();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << names[i];
  }
  out_ << '\n';
}

void CsvWriter::put(const std::string& cell) {
  if (n_cols_ == 0) {
    throw std::logic_error("CsvWriter: field before header");
  }
  if (row_cols_ == n_cols_) {
    throw std::logic_error("CsvWriter: row has too many fields");
  }
  if (row_cols_ > 0) out_ << ',';
  bool needs_quote = false;
  for (const char ch : cell) {
    if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') {
      needs_quote = true;
      break;
    }
  }
  if (needs_quote) {
    out_ << '"';
    for (const char ch : cell) {
      if (ch == '"') out_ << '"';
      out_ << ch;
    }
    out_ << '"';
  } else {
    out_ << cell;
  }
  ++row_cols_;
}

CsvWriter& CsvWriter::field(const std::string& value) {
  put(value);
  return *this;
}
CsvWriter& CsvWriter::field(double value) {
  put(fmt_g17(value));
  return *this;
}
CsvWriter& CsvWriter::field(int value) {
  put(std::to_string(value));
  return *this;
}
CsvWriter& CsvWriter::field(std::int64_t value) {
  put(std::to_string(value));
  return *this;
}
CsvWriter& CsvWriter::field(std::uint64_t value) {
  put(std::to_string(value));
  return *this;
}

void CsvWriter::end_row() {
  if (row_cols_ != n_cols_) {
    throw std::logic_error("CsvWriter: row ended with missing fields");
  }
  out_ << '\n';
  row_cols_ = 0;
}

void CsvWriter::close() {
  if (out_.is_open()) {
    out_.flush();
    if (!out_) {
      throw std::runtime_error("write failure on '" + path_.string() + "'");
    }
    out_.close();
  }
}

}  // namespace ballwave
