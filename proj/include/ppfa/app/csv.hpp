#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace ppfa::app {

/// Header row of names followed by one comma-separated numeric row per
/// time step. Missing or non-numeric cells are io errors naming row/column.
struct Table
{
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

Table read_csv(const std::filesystem::path& path);

/// Writes `values` with `header`, numbers in shortest round-trip form.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

} // namespace ppfa::app
