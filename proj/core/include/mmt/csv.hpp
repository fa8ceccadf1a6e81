#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mmt/grid.hpp"

namespace mmt {

/// CSV writer with a header row and fixed 17-significant-digit formatting
/// (lossless for doubles, diff-able). write() lands atomically: the payload
/// goes to a temporary file in the target directory which is then renamed.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(const std::vector<double>& values);
  void add_row_raw(const std::vector<std::string>& cells);

  std::string str() const;
  void write(const std::filesystem::path& path) const;

  static std::string format(double v);

 private:
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

void atomic_write_text(const std::filesystem::path& path, const std::string& payload);

/// Reads a density from CSV columns x, mu_1..mu_n; the x column must form a
/// uniform grid of cell centers.
GridDensity read_density_csv(const std::filesystem::path& path);

void write_density_csv(const std::filesystem::path& path, const GridDensity& mu);

}  // namespace mmt
