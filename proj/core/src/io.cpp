#include "oscq/io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "oscq/errors.hpp"

namespace oscq {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::ConfigInvalid, "cannot open '" + path.string() + "' for writing");
  out << contents;
  if (!out) raise(ErrorCode::ConfigInvalid, "failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::ConfigInvalid, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string join_line(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) raise(ErrorCode::DimensionMismatch, "CSV row width differs from header");
  rows_.push_back(std::move(cells));
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::string text = join_line(header_);
  for (const auto& row : rows_) text += join_line(row);
  write_text_file(path, text);
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::vector<std::string> header{"t"};
  const bool complex = traj.kind == TrajectoryKind::ComplexState;
  for (std::size_t i = 1; i <= traj.dim; ++i) header.push_back(std::string(complex ? "re" : "x") + std::to_string(i));
  for (std::size_t i = 1; i <= traj.dim; ++i) header.push_back(std::string(complex ? "im" : "v") + std::to_string(i));
  CsvTable table(header);
  for (std::size_t r = 0; r < traj.size(); ++r) {
    std::vector<std::string> row{format_number(traj.times[r])};
    if (complex) {
      const CVec psi = traj.psi(r);
      for (Eigen::Index i = 0; i < psi.size(); ++i) row.push_back(format_number(psi(i).real()));
      for (Eigen::Index i = 0; i < psi.size(); ++i) row.push_back(format_number(psi(i).imag()));
    } else {
      const auto states = traj.real_states.row(static_cast<Eigen::Index>(r));
      for (Eigen::Index i = 0; i < states.size(); ++i) row.push_back(format_number(states(i)));
    }
    table.add_row(std::move(row));
  }
  table.write(path);
}

void write_error_csv(const std::filesystem::path& path, const std::vector<double>& times,
                     const std::vector<double>& errors) {
  if (times.size() != errors.size()) raise(ErrorCode::DimensionMismatch, "error series length differs");
  CsvTable table({"t", "err"});
  for (std::size_t r = 0; r < times.size(); ++r) table.add_row({format_number(times[r]), format_number(errors[r])});
  table.write(path);
}

}  // namespace oscq
