#pragma once

// Output plumbing: number formatting, atomic file writes, CSV and SVG
// emission, run manifests.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <boost/version.hpp>
#include <mpfr.h>

#include "numerics.hpp"

namespace fibolab {

inline constexpr const char* version = "0.1.0";

/// Shortest round-trip decimal form of a double.
inline std::string fmt(double x) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

/// Fixed number of significant digits (SVG coordinates).
inline std::string fmt_sig(double x, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

inline std::string fmt(const Real& x) { return to_string_full(x); }

template <class T>
std::string fmt_opt(const std::optional<T>& x) {
  return x ? fmt(*x) : std::string();
}

/// Writes through a temporary file in the same directory and renames it
/// over the target.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::io, "cannot rename into " + path.string());
  }
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) { row(header); }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

// ---------------------------------------------------------------------------
// SVG

/// Square canvas with y pointing up in user coordinates. Every coordinate is
/// printed with 9 significant digits, so identical inputs give identical files.
class SvgCanvas {
 public:
  SvgCanvas(double xmin, double xmax, double ymin, double ymax, int pixels = 800)
      : x0_(xmin), x1_(xmax), y0_(ymin), y1_(ymax), px_(pixels) {}

  void polygon(const std::vector<Point>& pts, const std::string& stroke, double width, const std::string& fill = "none") {
    if (pts.empty()) return;
    std::ostringstream d;
    for (std::size_t i = 0; i < pts.size(); ++i) d << (i ? " L" : "M") << coord(pts[i]);
    d << " Z";
    body_ << "<path d=\"" << d.str() << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\""
          << fmt_sig(width, 9) << "\"/>\n";
  }

  /// Point cloud drawn as zero-length segments with round caps.
  void points(const std::vector<Point>& pts, const std::string& color, double size) {
    std::ostringstream d;
    for (const auto& p : pts) d << 'M' << coord(p) << "h0";
    body_ << "<path d=\"" << d.str() << "\" stroke=\"" << color << "\" stroke-width=\"" << fmt_sig(size, 9)
          << "\" stroke-linecap=\"round\" fill=\"none\"/>\n";
  }

  void text(Point at, const std::string& s, double size = 0.08) {
    body_ << "<text x=\"" << fmt_sig(at.real(), 9) << "\" y=\"" << fmt_sig(-at.imag(), 9) << "\" font-size=\""
          << fmt_sig(size, 9) << "\" font-family=\"sans-serif\">" << s << "</text>\n";
  }

  std::string str() const {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px_ << "\" height=\"" << px_ << "\" viewBox=\""
        << fmt_sig(x0_, 9) << ' ' << fmt_sig(-y1_, 9) << ' ' << fmt_sig(x1_ - x0_, 9) << ' ' << fmt_sig(y1_ - y0_, 9)
        << "\">\n"
        << "<rect x=\"" << fmt_sig(x0_, 9) << "\" y=\"" << fmt_sig(-y1_, 9) << "\" width=\"" << fmt_sig(x1_ - x0_, 9)
        << "\" height=\"" << fmt_sig(y1_ - y0_, 9) << "\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  static std::string coord(Point p) { return fmt_sig(p.real(), 9) + " " + fmt_sig(-p.imag(), 9); }

  double x0_, x1_, y0_, y1_;
  int px_;
  std::ostringstream body_;
};

// ---------------------------------------------------------------------------
// Manifest

inline std::string library_versions() {
  std::ostringstream s;
  s << "fibolab " << version << "; boost " << BOOST_VERSION / 100000 << '.' << BOOST_VERSION / 100 % 1000 << '.'
    << BOOST_VERSION % 100 << "; mpfr " << MPFR_VERSION_STRING << "; compiler " << __VERSION__;
  return s.str();
}

}  // namespace fibolab
