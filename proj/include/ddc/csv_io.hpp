#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "ddc/state_grid.hpp"
#include "ddc/transition_kernel.hpp"

namespace ddc {

/// Minimal CSV writer: fixed header, numbers at round-trip precision.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& operator<<(double value);
  CsvWriter& operator<<(long long value);
  CsvWriter& operator<<(int value) { return *this << static_cast<long long>(value); }
  CsvWriter& operator<<(long value) { return *this << static_cast<long long>(value); }
  CsvWriter& operator<<(const std::string& value);
  void end_row();

 private:
  void separator();

  std::filesystem::path path_;
  std::unique_ptr<std::ofstream> out_;
  size_t columns_;
  size_t in_row_ = 0;
};

/// Rows of a numeric CSV after its header line.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable read_csv(std::istream& in);

/// `index,x1..xd`
void write_grid_csv(const std::filesystem::path& path, const StateGrid& grid);
StateGrid read_grid_csv(const std::filesystem::path& path);

/// `row,col,value` triplets for nonzero entries.
void write_kernel_csv(const std::filesystem::path& path, const TransitionKernel& kernel);
/// `size` fixes M; pass 0 to infer it from the largest index.
TransitionKernel read_kernel_csv(const std::filesystem::path& path, Index size = 0);

}  // namespace ddc
