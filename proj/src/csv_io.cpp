#include "ddc/csv_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ddc {

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, size_t line_no) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() && s.find_first_not_of(" \t\r", used) != std::string::npos) throw 0;
    return v;
  } catch (...) {
    throw InvalidArgument("CSV line " + std::to_string(line_no) + ": not a number: '" + s + "'");
  }
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(std::make_unique<std::ofstream>(path)), columns_(header.size()) {
  if (!*out_) throw Error("cannot open " + path.string() + " for writing");
  for (size_t i = 0; i < header.size(); ++i) *out_ << (i ? "," : "") << header[i];
  *out_ << '\n';
}

void CsvWriter::separator() {
  if (in_row_ >= columns_) throw Error(path_.string() + ": too many columns in row");
  if (in_row_ > 0) *out_ << ',';
  ++in_row_;
}

CsvWriter& CsvWriter::operator<<(double value) {
  separator();
  *out_ << format_double(value);
  return *this;
}

CsvWriter& CsvWriter::operator<<(long long value) {
  separator();
  *out_ << value;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& value) {
  separator();
  *out_ << value;
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw Error(path_.string() + ": short row");
  *out_ << '\n';
  in_row_ = 0;
  if (!*out_) throw Error("write failed: " + path_.string());
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw InvalidArgument("CSV line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " fields, got " +
                            std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c, line_no));
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw InvalidArgument("CSV: missing header");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_csv(in);
}

void write_grid_csv(const std::filesystem::path& path, const StateGrid& grid) {
  std::vector<std::string> header{"index"};
  for (Index d = 0; d < grid.dim(); ++d) header.push_back("x" + std::to_string(d + 1));
  CsvWriter w(path, header);
  for (Index i = 0; i < grid.count(); ++i) {
    w << static_cast<long long>(i);
    for (Index d = 0; d < grid.dim(); ++d) w << grid.points()(i, d);
    w.end_row();
  }
}

StateGrid read_grid_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.size() < 2 || t.header.front() != "index") {
    throw InvalidArgument(path.string() + ": grid CSV must start with 'index,x1..'");
  }
  const Index dim = static_cast<Index>(t.header.size()) - 1;
  RowMatrix pts(static_cast<Index>(t.rows.size()), dim);
  std::vector<bool> seen(t.rows.size(), false);
  for (const auto& row : t.rows) {
    const auto idx = static_cast<long long>(row[0]);
    if (idx < 0 || idx >= static_cast<long long>(t.rows.size()) || seen[static_cast<size_t>(idx)]) {
      throw InvalidArgument(path.string() + ": bad or repeated index " + std::to_string(idx));
    }
    seen[static_cast<size_t>(idx)] = true;
    for (Index d = 0; d < dim; ++d) pts(idx, d) = row[static_cast<size_t>(d) + 1];
  }
  return StateGrid(std::move(pts));
}

void write_kernel_csv(const std::filesystem::path& path, const TransitionKernel& kernel) {
  CsvWriter w(path, {"row", "col", "value"});
  const Matrix& m = kernel.matrix();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) {
        w << static_cast<long long>(i) << static_cast<long long>(j) << m(i, j);
        w.end_row();
      }
    }
  }
}

TransitionKernel read_kernel_csv(const std::filesystem::path& path, Index size) {
  const CsvTable t = read_csv(path);
  if (t.header != std::vector<std::string>{"row", "col", "value"}) {
    throw InvalidArgument(path.string() + ": kernel CSV header must be 'row,col,value'");
  }
  Index m = size;
  if (m == 0) {
    for (const auto& r : t.rows) m = std::max({m, static_cast<Index>(r[0]) + 1, static_cast<Index>(r[1]) + 1});
  }
  Matrix dense = Matrix::Zero(m, m);
  for (const auto& r : t.rows) {
    const auto i = static_cast<Index>(r[0]);
    const auto j = static_cast<Index>(r[1]);
    if (i < 0 || j < 0 || i >= m || j >= m) {
      throw InvalidArgument(path.string() + ": entry (" + std::to_string(i) + "," + std::to_string(j) +
                            ") outside a " + std::to_string(m) + "-state kernel");
    }
    dense(i, j) += r[2];
  }
  return TransitionKernel(std::move(dense));
}

}  // namespace ddc
