// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#include "carray/io.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace carray::io {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  static std::atomic<unsigned long> serial{0};
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(serial++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw FormatError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string fmt(double v, int digits) {
  if (!std::isfinite(v)) throw FormatError("refusing to write a non-finite value");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos) s = s.substr(s[0] == '-' ? 1 : 0);
  return s;
}

std::string fmt_sci(double v) {
  if (!std::isfinite(v)) throw FormatError("refusing to write a non-finite value");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

double to_double(std::string_view s) {
  std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size() || !std::isfinite(v))
    throw FormatError("not a number: '" + str + "'");
  return v;
}

double to_db(double magnitude) { return 20.0 * std::log10(std::max(magnitude, 1e-15)); }

// ---------------------------------------------------------------- Touchstone

std::string format_touchstone(const em::SParamTable& table, double z0,
                              const std::vector<std::string>& comments) {
  std::string out;
  out += "# GHz S RI R " + fmt(z0, 0) + "\n";
  for (const auto& c : comments) out += "!" + c + "\n";
  for (const auto& row : table.rows) {
    for (int i = 0; i < 4; ++i) {
      out += i == 0 ? fmt_sci(row.frequency_ghz) : std::string(19, ' ');
      for (int j = 0; j < 4; ++j) {
        out += "  " + fmt_sci(row.s(i, j).real());
        out += " " + fmt_sci(row.s(i, j).imag());
      }
      out += "\n";
    }
  }
  return out;
}

namespace {

std::string upper(std::string s) {
  for (char& c : s) c = char(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream ss{std::string(line)};
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace

Touchstone parse_touchstone(std::string_view text, int ports) {
  if (ports < 1) throw FormatError("port count must be positive");
  Touchstone ts;
  ts.ports = ports;
  double unit = 1.0;  // to GHz; GHz is also the format default
  std::string format = "MA";
  bool have_options = false;
  std::vector<double> nums;

  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const std::size_t bang = line.find('!');
    if (bang != std::string_view::npos) {
      if (line.find_first_not_of(" \t") == bang) ts.comments.emplace_back(line.substr(bang + 1));
      line = line.substr(0, bang);
    }
    auto toks = split_ws(line);
    if (toks.empty()) continue;

    if (toks[0][0] == '#') {
      if (have_options) continue;  // only the first option line counts
      have_options = true;
      toks[0].erase(0, 1);
      if (toks[0].empty()) toks.erase(toks.begin());
      for (std::size_t i = 0; i < toks.size(); ++i) {
        const std::string t = upper(toks[i]);
        if (t == "HZ") unit = 1e-9;
        else if (t == "KHZ") unit = 1e-6;
        else if (t == "MHZ") unit = 1e-3;
        else if (t == "GHZ") unit = 1.0;
        else if (t == "MA" || t == "DB" || t == "RI") format = t;
        else if (t == "S") continue;
        else if (t == "Y" || t == "Z" || t == "G" || t == "H")
          throw FormatError("only S parameters are supported, got " + t);
        else if (t == "R") {
          if (i + 1 >= toks.size()) throw FormatError("option line: R without a value");
          ts.z0 = to_double(toks[++i]);
        } else {
          throw FormatError("option line: unknown token '" + toks[i] + "'");
        }
      }
      continue;
    }
    for (const auto& t : toks) {
      try {
        nums.push_back(to_double(t));
      } catch (const FormatError& e) {
        throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  const std::size_t per = 1 + 2 * std::size_t(ports) * std::size_t(ports);
  if (nums.size() % per != 0)
    throw FormatError("data holds " + std::to_string(nums.size()) +
                      " numbers, not a multiple of " + std::to_string(per));
  if (ports != 4 && ports != 2 && ports != 1 && ports != 3)
    throw FormatError("only 1 to 4 port files are supported");

  for (std::size_t r = 0; r < nums.size() / per; ++r) {
    const double* d = nums.data() + r * per;
    em::SParamRow row;
    row.frequency_ghz = d[0] * unit;
    row.s = em::Matrix4c::Zero();
    for (int k = 0; k < ports * ports; ++k) {
      const double a = d[1 + 2 * k], b = d[2 + 2 * k];
      std::complex<double> v;
      if (format == "RI") {
        v = {a, b};
      } else {
        const double mag = format == "DB" ? std::pow(10.0, a / 20.0) : a;
        v = std::polar(mag, b * constants::pi / 180.0);
      }
      int i = k / ports, j = k % ports;
      if (ports == 2) std::swap(i, j);  // two-port files are column ordered
      row.s(i, j) = v;
    }
    if (!ts.table.rows.empty() && !(row.frequency_ghz > ts.table.rows.back().frequency_ghz))
      throw FormatError("frequencies must be strictly increasing");
    ts.table.rows.push_back(row);
  }
  return ts;
}

// ---------------------------------------------------------------------- CSV

std::string format_sparam_csv(const em::SParamTable& table) {
  CsvTable t;
  t.header.push_back("freq_GHz");
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j) {
      const std::string n = "S" + std::to_string(i) + std::to_string(j);
      t.header.push_back(n + "_dB");
      t.header.push_back(n + "_deg");
    }
  for (const auto& row : table.rows) {
    std::vector<std::string> r{fmt(row.frequency_ghz, 6)};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        r.push_back(fmt(to_db(std::abs(row.s(i, j))), 6));
        r.push_back(fmt(std::arg(row.s(i, j)) * 180.0 / constants::pi, 4));
      }
    t.rows.push_back(std::move(r));
  }
  return format_csv(t);
}

int CsvTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return int(i);
  return -1;
}

std::vector<double> CsvTable::numbers(std::string_view name) const {
  const int c = column_index(name);
  if (c < 0) throw FormatError("missing CSV column " + std::string(name));
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(to_double(r[c]));
  return out;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.find('"') != std::string_view::npos) throw FormatError("quoted CSV is not supported");
    std::vector<std::string> cells;
    std::size_t s = 0;
    while (true) {
      const std::size_t c = line.find(',', s);
      cells.emplace_back(line.substr(s, c == std::string_view::npos ? line.size() - s : c - s));
      if (c == std::string_view::npos) break;
      s = c + 1;
    }
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size())
        throw FormatError("CSV row " + std::to_string(t.rows.size() + 1) + " has " +
                          std::to_string(cells.size()) + " cells, header has " +
                          std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw FormatError("empty CSV");
  return t;
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

// ---------------------------------------------------------------------- SVG

namespace {

constexpr std::array<const char*, 8> kColours = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                 "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

std::string esc(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double n = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return n * mag;
}

struct Range {
  double lo, hi, step;
};

Range axis_range(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::max(1.0, std::abs(lo) * 0.1);
    lo -= pad;
    hi += pad;
  }
  const double step = nice_step(hi - lo, 5);
  return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

std::string tick_label(double v, double step) {
  const int digits = std::max(0, int(-std::floor(std::log10(step) + 1e-9)));
  return fmt(v, digits);
}

}  // namespace

std::string render_svg(const std::vector<Panel>& panels, int columns) {
  constexpr double pw = 520, ph = 340, ml = 64, mr = 150, mt = 34, mb = 48;
  columns = std::max(1, std::min(columns, int(std::max<std::size_t>(1, panels.size()))));
  const int rows = int((panels.size() + columns - 1) / columns);
  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(pw * columns, 0) +
       "\" height=\"" + fmt(ph * std::max(rows, 1), 0) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& pan = panels[p];
    const double ox = pw * double(p % columns), oy = ph * double(p / columns);
    const double x0 = ox + ml, x1 = ox + pw - mr, y0 = oy + mt, y1 = oy + ph - mb;

    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const auto& s : pan.series) {
      for (double v : s.x) xlo = std::min(xlo, v), xhi = std::max(xhi, v);
      for (double v : s.y) ylo = std::min(ylo, v), yhi = std::max(yhi, v);
    }
    if (xlo > xhi) xlo = 0, xhi = 1, ylo = 0, yhi = 1;
    const Range xr = axis_range(xlo, xhi), yr = axis_range(ylo, yhi);
    auto X = [&](double v) { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
    auto Y = [&](double v) { return y1 - (v - yr.lo) / (yr.hi - yr.lo) * (y1 - y0); };

    o += "<g>\n<text x=\"" + fmt((x0 + x1) / 2, 2) + "\" y=\"" + fmt(oy + 20, 2) +
         "\" text-anchor=\"middle\" font-size=\"13\">" + esc(pan.title) + "</text>\n";
    o += "<rect x=\"" + fmt(x0, 2) + "\" y=\"" + fmt(y0, 2) + "\" width=\"" + fmt(x1 - x0, 2) +
         "\" height=\"" + fmt(y1 - y0, 2) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double v = xr.lo; v <= xr.hi + 1e-9 * xr.step; v += xr.step) {
      const double x = X(v);
      o += "<line x1=\"" + fmt(x, 2) + "\" y1=\"" + fmt(y0, 2) + "\" x2=\"" + fmt(x, 2) +
           "\" y2=\"" + fmt(y1, 2) + "\" stroke=\"#ddd\"/>\n";
      o += "<text x=\"" + fmt(x, 2) + "\" y=\"" + fmt(y1 + 14, 2) + "\" text-anchor=\"middle\">" +
           tick_label(v, xr.step) + "</text>\n";
    }
    for (double v = yr.lo; v <= yr.hi + 1e-9 * yr.step; v += yr.step) {
      const double y = Y(v);
      o += "<line x1=\"" + fmt(x0, 2) + "\" y1=\"" + fmt(y, 2) + "\" x2=\"" + fmt(x1, 2) +
           "\" y2=\"" + fmt(y, 2) + "\" stroke=\"#ddd\"/>\n";
      o += "<text x=\"" + fmt(x0 - 5, 2) + "\" y=\"" + fmt(y + 4, 2) + "\" text-anchor=\"end\">" +
           tick_label(v, yr.step) + "</text>\n";
    }
    o += "<text x=\"" + fmt((x0 + x1) / 2, 2) + "\" y=\"" + fmt(y1 + 34, 2) +
         "\" text-anchor=\"middle\">" + esc(pan.xlabel) + "</text>\n";
    o += "<text transform=\"translate(" + fmt(ox + 16, 2) + "," + fmt((y0 + y1) / 2, 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + esc(pan.ylabel) + "</text>\n";

    for (std::size_t s = 0; s < pan.series.size(); ++s) {
      const Series& ser = pan.series[s];
      const char* col = kColours[s % kColours.size()];
      o += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i) {
        if (i) o += ' ';
        o += fmt(X(ser.x[i]), 2) + "," + fmt(Y(ser.y[i]), 2);
      }
      o += "\"/>\n";
      const double ly = y0 + 10 + 16 * double(s);
      o += "<line x1=\"" + fmt(x1 + 10, 2) + "\" y1=\"" + fmt(ly, 2) + "\" x2=\"" + fmt(x1 + 30, 2) +
           "\" y2=\"" + fmt(ly, 2) + "\" stroke=\"" + col + "\" stroke-width=\"2\"/>\n";
      o += "<text x=\"" + fmt(x1 + 35, 2) + "\" y=\"" + fmt(ly + 4, 2) + "\">" + esc(ser.label) +
           "</text>\n";
    }
    o += "</g>\n";
  }
  o += "</svg>\n";
  return o;
}

}  // namespace carray::io
