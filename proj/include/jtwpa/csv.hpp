#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace jtwpa {

// Deterministic CSV emitter: fixed %.12g formatting, one header comment line
// referencing the manifest of the producing run.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& manifest_ref,
            const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot open '" + path + "' for writing");
    out_ << "# manifest: " << manifest_ref << "\n";
    for (size_t j = 0; j < columns.size(); ++j)
      out_ << (j ? "," : "") << columns[j];
    out_ << "\n";
  }

  void row(const std::vector<double>& values) {
    char buf[64];
    for (size_t j = 0; j < values.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.12g", values[j]);
      out_ << (j ? "," : "") << buf;
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

}  // namespace jtwpa
