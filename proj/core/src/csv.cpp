#include "mmt/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mmt/errors.hpp"

namespace mmt {

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

std::string CsvWriter::format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvWriter::add_row(const std::vector<double>& values) {
  if (values.size() != header_.size())
    throw InputError("csv: row width does not match header");
  std::string line;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format(values[i]);
  }
  rows_.push_back(std::move(line));
}

void CsvWriter::add_row_raw(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size())
    throw InputError("csv: row width does not match header");
  std::string line;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  rows_.push_back(std::move(line));
}

std::string CsvWriter::str() const {
  std::string out;
  for (size_t i = 0; i < header_.size(); ++i) {
    if (i) out += ',';
    out += header_[i];
  }
  out += '\n';
  for (const auto& r : rows_) {
    out += r;
    out += '\n';
  }
  return out;
}

void CsvWriter::write(const std::filesystem::path& path) const {
  atomic_write_text(path, str());
}

void atomic_write_text(const std::filesystem::path& path, const std::string& payload) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os << payload;
    if (!os) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

GridDensity read_density_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open density csv " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw InputError("density csv: empty file");
  // header: x, mu_1..mu_n
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
  }
  if (cols.size() < 2 || cols[0] != "x")
    throw InputError("density csv: expected header x,mu_1,...");
  const int n = static_cast<int>(cols.size()) - 1;
  std::vector<double> xs;
  std::vector<std::vector<double>> vals(n);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      const double v = std::stod(cell);
      if (c == 0)
        xs.push_back(v);
      else if (c <= n)
        vals[c - 1].push_back(v);
      ++c;
    }
    if (c != n + 1) throw InputError("density csv: ragged row");
  }
  const int N = static_cast<int>(xs.size());
  if (N < 2) throw InputError("density csv: needs at least two cells");
  const double dx = xs[1] - xs[0];
  for (int i = 1; i < N; ++i)
    if (std::abs(xs[i] - xs[i - 1] - dx) > 1e-9 * std::abs(dx))
      throw InputError("density csv: x column is not a uniform grid");
  GridDensity mu;
  mu.grid = Grid1D{xs.front() - 0.5 * dx, xs.back() + 0.5 * dx, N};
  mu.values.resize(N, n);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < n; ++j) mu.values(i, j) = vals[j][i];
  return mu;
}

void write_density_csv(const std::filesystem::path& path, const GridDensity& mu) {
  std::vector<std::string> header{"x"};
  for (int j = 0; j < mu.components(); ++j)
    header.push_back("mu_" + std::to_string(j + 1));
  CsvWriter csv(std::move(header));
  for (int i = 0; i < mu.cells(); ++i) {
    std::vector<double> row{mu.grid.cell_x(i)};
    for (int j = 0; j < mu.components(); ++j) row.push_back(mu.values(i, j));
    csv.add_row(row);
  }
  csv.write(path);
}

}  // namespace mmt
