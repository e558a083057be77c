#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "oscq/reference_integrator.hpp"

namespace oscq {

// Shortest text that survives a round trip: 17 significant digits, "nan"/"inf" spelled out.
std::string format_number(double v);

// PositionVelocity: t,x1..xn,v1..vn. ComplexState: t,re1..ren,im1..imn.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
void write_error_csv(const std::filesystem::path& path, const std::vector<double>& times,
                     const std::vector<double>& errors);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace oscq
