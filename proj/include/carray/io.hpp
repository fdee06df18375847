// Copyright The carray Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef CARRAY_IO_HPP
#define CARRAY_IO_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "carray/em.hpp"

namespace carray::io {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_text_atomic(const fs::path& path, std::string_view content);

// Touchstone 1.1, 4 ports. The option line `# GHz S RI R <z0>` comes first,
// then `!` comments, then one row of the S matrix per line with the first
// line of each block prefixed by the frequency.
std::string format_touchstone(const em::SParamTable& table, double z0,
                              const std::vector<std::string>& comments = {});

struct Touchstone {
  int ports = 0;
  double z0 = 50.0;
  std::vector<std::string> comments;  // without the leading '!'
  em::SParamTable table;              // always converted to S, GHz, complex
};

// Accepts any Touchstone 1.x option line (Hz/kHz/MHz/GHz, MA/DB/RI, S only),
// comments anywhere, and free line breaks between numbers.
Touchstone parse_touchstone(std::string_view text, int ports = 4);

// freq_GHz, then S<ij>_dB and S<ij>_deg for i, j = 1..4 in row-major order.
std::string format_sparam_csv(const em::SParamTable& table);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column_index(std::string_view name) const;  // -1 when absent
  std::vector<double> numbers(std::string_view name) const;
};

// Plain comma separated values; quoting is not supported.
CsvTable parse_csv(std::string_view text);
std::string format_csv(const CsvTable& table);

// Fixed-format number helpers shared by every writer.
std::string fmt(double v, int digits = 6);
std::string fmt_sci(double v);
double to_double(std::string_view s);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<Series> series;
};

// Grid of line plots with axes, ticks and a legend per panel.
std::string render_svg(const std::vector<Panel>& panels, int columns = 2);

double to_db(double magnitude);

}  // namespace carray::io

#endif  // CARRAY_IO_HPP
