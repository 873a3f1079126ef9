#include "ppfa/app/csv.hpp"

#include "ppfa/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ppfa::app {

namespace {

std::vector<std::string> split(const std::string& line)
{
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    cells.emplace_back();
  }
  return cells;
}

std::string trim(std::string s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Error io_error(const std::string& what)
{
  return Error(ErrorCategory::io, what);
}

} // namespace

Table read_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw io_error("cannot open '" + path.string() + "'");
  }
  Table table;
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw io_error("'" + path.string() + "' is empty (expected a header row)");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  for (const std::string& name : split(line)) {
    table.header.push_back(trim(name));
  }
  const std::size_t m = table.header.size();

  std::vector<double> flat;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    const std::vector<std::string> cells = split(line);
    if (cells.size() != m) {
      throw io_error("line " + std::to_string(line_no) + ": expected " + std::to_string(m) +
                     " columns, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < m; ++c) {
      const std::string cell = trim(cells[c]);
      double v = 0.0;
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      if (!cell.empty() && *begin == '+') {
        ++begin;
      }
      const auto [ptr, ec] = std::from_chars(begin, end, v);
      if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw io_error("line " + std::to_string(line_no) + ", column " +
                       std::to_string(c + 1) + " ('" + table.header[c] +
                       "'): not a finite number: '" + cell + "'");
      }
      flat.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) {
    throw io_error("'" + path.string() + "' has no data rows");
  }
  table.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
    flat.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(m));
  return table;
}

std::string format_double(double v)
{
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw io_error("cannot open '" + path.string() + "' for writing");
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    out << (c ? "," : "") << header[c];
  }
  out << '\n';
  for (Eigen::Index k = 0; k < values.rows(); ++k) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      out << (c ? "," : "") << format_double(values(k, c));
    }
    out << '\n';
  }
  if (!out) {
    throw io_error("failed writing '" + path.string() + "'");
  }
}

} // namespace ppfa::app
