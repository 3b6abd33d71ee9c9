#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace flea::cli {

// Shortest decimal that round-trips the double.
std::string format_real(double v);

using Cell = std::variant<double, long long, std::string>;

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<Cell> row);
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);
std::string read_bytes(const std::filesystem::path& path);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  bool log_x = false;
  bool log_y = false;
  bool markers = false;
};

// Panels laid out in `columns` columns.
void write_line_svg(const std::filesystem::path& path, const std::vector<Panel>& panels, std::size_t columns = 1);

// values[i * ny + j] at (x_i, y_j) cell centers.
void write_heatmap_svg(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                       const std::string& y_label, double x0, double x1, double y0, double y1, std::size_t nx,
                       std::size_t ny, const std::vector<double>& values);

}  // namespace flea::cli
