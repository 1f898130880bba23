#pragma once

// CSV emission with full-precision floats plus JSON metadata sidecars.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pwlab/common.hpp"

namespace pwlab {

using json = nlohmann::json;

inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
      : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path);
    if (!out_) throw error("cannot open output file: " + path.string());
    write_line(columns);
  }

  void row(const std::vector<std::string>& cells) { write_line(cells); }

  CsvWriter& cell(const std::string& s) {
    pending_.push_back(s);
    return *this;
  }
  CsvWriter& cell(double v) { return cell(format_full(v)); }
  CsvWriter& cell(int v) { return cell(std::to_string(v)); }
  CsvWriter& cell(std::size_t v) { return cell(std::to_string(v)); }
  void end_row() {
    write_line(pending_);
    pending_.clear();
  }

  const std::filesystem::path& path() const { return path_; }

  void finish() {
    out_.flush();
    if (!out_) throw error("write failure: " + path_.string());
  }

 private:
  void write_line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::filesystem::path path_;
  std::ofstream out_;
  std::vector<std::string> pending_;
};

inline void write_sidecar(const std::filesystem::path& csv_path, const json& meta) {
  std::filesystem::path p = csv_path;
  p += ".meta.json";
  std::ofstream out(p);
  if (!out) throw error("cannot open output file: " + p.string());
  out << meta.dump(2) << '\n';
  if (!out) throw error("write failure: " + p.string());
}

inline json read_sidecar(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p += ".meta.json";
  std::ifstream in(p);
  if (!in) throw error("cannot open metadata file: " + p.string());
  json j;
  in >> j;
  return j;
}

}  // namespace pwlab
