#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "localma/model.hpp"

namespace localma {

// Declared layout of a prediction CSV.
//   regression:     x1..xp, y, f1..fM
//   classification: x1..xp, label, f1_c1..f1_cK, ..., fM_c1..fM_cK
struct CsvLayout {
  Task task = Task::Regression;
  int p = 1;
  int M = 1;
  int K = 1;

  std::vector<std::string> header() const;
  void validate() const;
};

/// Formats a double with 17 significant digits (exact round trip).
std::string format_double(double value);

/// Parses a prediction CSV. Throws ParseError naming the 1-based line for
/// malformed cells, LayoutMismatch for a wrong header or column count, and the
/// validate() error for data that violates the dataset invariants.
Dataset read_csv(std::istream& in, const CsvLayout& layout);
Dataset load_csv(const std::filesystem::path& path, const CsvLayout& layout);

/// Writes the dataset in the layout implied by its shape.
void write_csv(std::ostream& out, const Dataset& dataset);
void save_csv(const std::filesystem::path& path, const Dataset& dataset);

/// Generic numeric table: header row then one row per matrix row.
void write_table(std::ostream& out, const std::vector<std::string>& header,
                 const Eigen::MatrixXd& values);
void save_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                const Eigen::MatrixXd& values);
/// Reads a numeric table whose header must equal `expected_header`.
Eigen::MatrixXd load_table(const std::filesystem::path& path,
                           const std::vector<std::string>& expected_header);

/// Headers w1..wM used for weight-matrix files.
std::vector<std::string> weight_header(int M);

}  // namespace localma
