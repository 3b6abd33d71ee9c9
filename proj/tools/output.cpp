#include "output.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "flea/errors.hpp"

namespace flea::cli {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void CsvTable::add(std::vector<Cell> row) {
  if (row.size() != header_.size()) throw DomainError("CSV row width differs from header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (const auto* d = std::get_if<double>(&row[i])) {
        out += format_real(*d);
      } else if (const auto* n = std::get_if<long long>(&row[i])) {
        out += std::to_string(*n);
      } else {
        out += std::get<std::string>(row[i]);
      }
    }
    out += '\n';
  }
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return {};
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

namespace {

constexpr double kPanelW = 420, kPanelH = 300;
constexpr double kLeft = 62, kRight = 14, kTop = 30, kBottom = 44;
const std::array<const char*, 8> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                             "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

void draw_panel(std::ostringstream& os, const Panel& p, double ox, double oy) {
  auto tx = [&](double v) { return p.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return p.log_y ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : p.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double a = tx(s.x[i]), b = ty(s.y[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      x0 = std::min(x0, a), x1 = std::max(x1, a), y0 = std::min(y0, b), y1 = std::max(y1, b);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad, y1 += pad;
  const double w = kPanelW - kLeft - kRight, h = kPanelH - kTop - kBottom;
  auto sx = [&](double a) { return ox + kLeft + (a - x0) / (x1 - x0) * w; };
  auto sy = [&](double b) { return oy + kTop + (1 - (b - y0) / (y1 - y0)) * h; };

  os << "<rect x='" << ox + kLeft << "' y='" << oy + kTop << "' width='" << w << "' height='" << h
     << "' fill='none' stroke='#444'/>\n";
  os << "<text x='" << ox + kPanelW / 2 << "' y='" << oy + 18 << "' text-anchor='middle' font-size='13'>"
     << escape(p.title) << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double a = x0 + (x1 - x0) * k / 4, b = y0 + (y1 - y0) * k / 4;
    const std::string xl = p.log_x ? "1e" + num(a) : num(a);
    const std::string yl = p.log_y ? "1e" + num(b) : num(b);
    os << "<text x='" << sx(a) << "' y='" << oy + kTop + h + 14 << "' text-anchor='middle' font-size='10'>" << xl
       << "</text>\n";
    os << "<text x='" << ox + kLeft - 4 << "' y='" << sy(b) + 3 << "' text-anchor='end' font-size='10'>" << yl
       << "</text>\n";
  }
  os << "<text x='" << ox + kLeft + w / 2 << "' y='" << oy + kPanelH - 8 << "' text-anchor='middle' font-size='11'>"
     << escape(p.x_label) << "</text>\n";
  os << "<text transform='translate(" << ox + 14 << "," << oy + kTop + h / 2
     << ") rotate(-90)' text-anchor='middle' font-size='11'>" << escape(p.y_label) << "</text>\n";

  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const auto& s = p.series[k];
    const char* color = kColors[k % kColors.size()];
    os << "<polyline fill='none' stroke='" << color << "' stroke-width='1.4' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double a = tx(s.x[i]), b = ty(s.y[i]);
      if (std::isfinite(a) && std::isfinite(b)) os << sx(a) << ',' << sy(b) << ' ';
    }
    os << "'/>\n";
    if (p.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double a = tx(s.x[i]), b = ty(s.y[i]);
        if (std::isfinite(a) && std::isfinite(b)) {
          os << "<circle cx='" << sx(a) << "' cy='" << sy(b) << "' r='2.5' fill='" << color << "'/>\n";
        }
      }
    }
    if (!s.label.empty()) {
      os << "<text x='" << ox + kLeft + w - 6 << "' y='" << oy + kTop + 14 + 13 * k
         << "' text-anchor='end' font-size='10' fill='" << color << "'>" << escape(s.label) << "</text>\n";
    }
  }
}

void write_text(const std::filesystem::path& path, const std::string& s) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << s;
}

}  // namespace

void write_line_svg(const std::filesystem::path& path, const std::vector<Panel>& panels, std::size_t columns) {
  columns = std::max<std::size_t>(1, std::min(columns, panels.size()));
  const std::size_t rows = (panels.size() + columns - 1) / columns;
  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << columns * kPanelW << "' height='" << rows * kPanelH
     << "' font-family='sans-serif'>\n<rect width='100%' height='100%' fill='white'/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    draw_panel(os, panels[i], static_cast<double>(i % columns) * kPanelW, static_cast<double>(i / columns) * kPanelH);
  }
  os << "</svg>\n";
  write_text(path, os.str());
}

void write_heatmap_svg(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                       const std::string& y_label, double x0, double x1, double y0, double y1, std::size_t nx,
                       std::size_t ny, const std::vector<double>& values) {
  const double W = 520, H = 480, w = W - kLeft - kRight, h = H - kTop - kBottom;
  const double vmax = values.empty() ? 1.0 : std::max(*std::max_element(values.begin(), values.end()), 1e-300);
  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
     << "' font-family='sans-serif'>\n<rect width='100%' height='100%' fill='white'/>\n";
  const double cw = w / static_cast<double>(nx), ch = h / static_cast<double>(ny);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double t = std::clamp(values[i * ny + j] / vmax, 0.0, 1.0);
      const int r = static_cast<int>(255 * std::min(1.0, 2 * t));
      const int g = static_cast<int>(255 * std::max(0.0, 2 * t - 1));
      const int b = static_cast<int>(255 * (1 - t) * 0.35);
      os << "<rect x='" << kLeft + i * cw << "' y='" << kTop + (ny - 1 - j) * ch << "' width='" << cw + 0.3
         << "' height='" << ch + 0.3 << "' fill='rgb(" << r << ',' << g << ',' << b << ")'/>\n";
    }
  }
  os << "<text x='" << W / 2 << "' y='18' text-anchor='middle' font-size='13'>" << escape(title) << "</text>\n";
  os << "<text x='" << kLeft << "' y='" << kTop + h + 14 << "' font-size='10'>" << num(x0) << "</text>\n";
  os << "<text x='" << kLeft + w << "' y='" << kTop + h + 14 << "' text-anchor='end' font-size='10'>" << num(x1)
     << "</text>\n";
  os << "<text x='" << kLeft - 4 << "' y='" << kTop + h << "' text-anchor='end' font-size='10'>" << num(y0)
     << "</text>\n";
  os << "<text x='" << kLeft - 4 << "' y='" << kTop + 8 << "' text-anchor='end' font-size='10'>" << num(y1)
     << "</text>\n";
  os << "<text x='" << kLeft + w / 2 << "' y='" << H - 8 << "' text-anchor='middle' font-size='11'>"
     << escape(x_label) << "</text>\n";
  os << "<text transform='translate(14," << kTop + h / 2 << ") rotate(-90)' text-anchor='middle' font-size='11'>"
     << escape(y_label) << "</text>\n</svg>\n";
  write_text(path, os.str());
}

}  // namespace flea::cli
