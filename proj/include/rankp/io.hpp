#pragma once

#include "rankp/core.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace rankp {

// One matrix row per line, comma separated, no header. Ragged rows are an
// error (CsvFormatError carries the 1-based offending line).
inline Matrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() && in.eof()) break;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        double v = std::stod(cell, &pos);
        while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
        if (pos != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw CsvFormatError(path + ": bad numeric field '" + cell + "' at line " +
                                 std::to_string(lineno),
                             lineno);
      }
    }
    if (row.empty())
      throw CsvFormatError(path + ": empty row at line " + std::to_string(lineno), lineno);
    if (!rows.empty() && row.size() != rows.front().size())
      throw CsvFormatError(path + ": ragged row at line " + std::to_string(lineno), lineno);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CsvFormatError(path + ": empty file", 0);
  Matrix a(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = rows[i][j];
  require_finite(a, "read_csv_matrix");
  return a;
}

// %.17g round-trips doubles exactly; keeps re-runs byte-identical.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv_matrix(const std::string& path, const Matrix& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) out << ',';
      out << format_double(a(i, j));
    }
    out << '\n';
  }
}

inline void write_csv_mask(const std::string& path, const Mask& mask) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (Index i = 0; i < mask.rows(); ++i) {
    for (Index j = 0; j < mask.cols(); ++j) {
      if (j) out << ',';
      out << (mask(i, j) ? 1 : 0);
    }
    out << '\n';
  }
}

// Binary PGM (P5, maxval 255). Values are mapped linearly from [lo, hi];
// the caller fixes that range so related panels stay comparable.
inline void write_pgm(const std::string& path, const Matrix& a, double lo, double hi) {
  if (!(hi > lo)) throw InvalidSpecError("write_pgm: empty value range");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "P5\n" << a.cols() << ' ' << a.rows() << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(a.cols()));
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      double t = (a(i, j) - lo) / (hi - lo);
      t = t < 0 ? 0 : (t > 1 ? 1 : t);
      row[static_cast<std::size_t>(j)] = static_cast<unsigned char>(t * 255.0 + 0.5);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
}

}  // namespace rankp
