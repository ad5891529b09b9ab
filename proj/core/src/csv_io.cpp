#include "localma/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "localma/errors.hpp"

namespace localma {

std::vector<std::string> CsvLayout::header() const {
  std::vector<std::string> cols;
  for (int j = 1; j <= p; ++j) cols.push_back("x" + std::to_string(j));
  if (task == Task::Regression) {
    cols.emplace_back("y");
    for (int m = 1; m <= M; ++m) cols.push_back("f" + std::to_string(m));
  } else {
    cols.emplace_back("label");
    for (int m = 1; m <= M; ++m) {
      for (int k = 1; k <= K; ++k) cols.push_back("f" + std::to_string(m) + "_c" + std::to_string(k));
    }
  }
  return cols;
}

void CsvLayout::validate() const {
  if (p < 1 || M < 1 || K < 1) throw Error(ErrorCode::InvalidConfig, "p, M and K must be >= 1");
  if (task == Task::Regression && K != 1) {
    throw Error(ErrorCode::InvalidConfig, "regression layout requires K = 1");
  }
  if (task == Task::Classification && K < 2) {
    throw Error(ErrorCode::InvalidConfig, "classification layout requires K >= 2");
  }
}

std::string format_double(double value) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

double parse_cell(std::string_view cell, std::size_t line_no, std::size_t column) {
  while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
  while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column " +
                                           std::to_string(column + 1) + ": cannot parse '" +
                                           std::string(cell) + "' as a number");
  }
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

// Reads header + rows, checking the header against `expected`.
std::vector<std::vector<double>> read_rows(std::istream& in,
                                           const std::vector<std::string>& expected) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "line 1: missing header");
  const auto header = split_line(line);
  bool header_ok = header.size() == expected.size();
  for (std::size_t c = 0; header_ok && c < header.size(); ++c) header_ok = header[c] == expected[c];
  if (!header_ok) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw Error(ErrorCode::LayoutMismatch, "line 1: header does not match expected '" + want + "'");
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (cells.size() != expected.size()) {
      throw Error(ErrorCode::LayoutMismatch, "line " + std::to_string(line_no) + ": expected " +
                                                 std::to_string(expected.size()) +
                                                 " columns, found " + std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_cell(cells[c], line_no, c);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Dataset read_csv(std::istream& in, const CsvLayout& layout) {
  layout.validate();
  const auto rows = read_rows(in, layout.header());
  const auto n = static_cast<Eigen::Index>(rows.size());
  Dataset d;
  d.task = layout.task;
  d.num_models = layout.M;
  d.covariates.resize(n, layout.p);
  d.responses = Eigen::MatrixXd::Zero(n, layout.K);
  d.predictions.resize(n, layout.M * layout.K);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (int j = 0; j < layout.p; ++j) d.covariates(i, j) = row[static_cast<std::size_t>(j)];
    const double response = row[static_cast<std::size_t>(layout.p)];
    if (layout.task == Task::Regression) {
      d.responses(i, 0) = response;
    } else {
      const double rounded = std::nearbyint(response);
      if (rounded != response || rounded < 0 || rounded >= layout.K) {
        throw Error(ErrorCode::LabelOutOfRange, "line " + std::to_string(i + 2) + ": label " +
                                                    format_double(response) + " is not in [0, " +
                                                    std::to_string(layout.K) + ")");
      }
      d.responses(i, static_cast<Eigen::Index>(rounded)) = 1.0;
    }
    for (int c = 0; c < layout.M * layout.K; ++c) {
      d.predictions(i, c) = row[static_cast<std::size_t>(layout.p + 1 + c)];
    }
  }
  require_valid(d);
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const CsvLayout& layout) {
  auto in = open_input(path);
  return read_csv(in, layout);
}

void write_csv(std::ostream& out, const Dataset& d) {
  const CsvLayout layout{d.task, static_cast<int>(d.p()), static_cast<int>(d.M()),
                         static_cast<int>(d.K())};
  const auto header = layout.header();
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    for (Eigen::Index j = 0; j < d.p(); ++j) out << format_double(d.covariates(i, j)) << ',';
    if (d.task == Task::Regression) {
      out << format_double(d.responses(i, 0));
    } else {
      Eigen::Index label = 0;
      d.responses.row(i).maxCoeff(&label);
      out << label;
    }
    for (Eigen::Index c = 0; c < d.predictions.cols(); ++c) {
      out << ',' << format_double(d.predictions(i, c));
    }
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const Dataset& dataset) {
  auto out = open_output(path);
  write_csv(out, dataset);
}

void write_table(std::ostream& out, const std::vector<std::string>& header,
                 const Eigen::MatrixXd& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "header and table widths differ");
  }
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      out << (c ? "," : "") << format_double(values(i, c));
    }
    out << '\n';
  }
}

void save_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                const Eigen::MatrixXd& values) {
  auto out = open_output(path);
  write_table(out, header, values);
}

Eigen::MatrixXd load_table(const std::filesystem::path& path,
                           const std::vector<std::string>& expected_header) {
  auto in = open_input(path);
  const auto rows = read_rows(in, expected_header);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(expected_header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  return out;
}

std::vector<std::string> weight_header(int M) {
  std::vector<std::string> cols;
  for (int m = 1; m <= M; ++m) cols.push_back("w" + std::to_string(m));
  return cols;
}

}  // namespace localma
