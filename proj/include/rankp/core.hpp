#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace rankp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;
using Index = Eigen::Index;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Error taxonomy. Every failure mode a caller can act on gets its own type;
// everything derives from Error so CLI layers can map to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidMatrixError : Error { using Error::Error; };   // non-finite entries
struct ShapeError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct NoGapError : Error { using Error::Error; };           // delta undefined or <= 0
struct ZeroMatrixError : Error { using Error::Error; };
struct EmptyRankError : Error { using Error::Error; };
struct NotApplicableError : Error { using Error::Error; };   // assumption gate failed
struct InvalidDensityError : Error { using Error::Error; };
struct InvalidSpecError : Error { using Error::Error; };
struct SeriesDivergingError : Error { using Error::Error; };
struct PoleClearanceError : Error { using Error::Error; };

// Non-convergent adaptive quadrature; carries the last two estimates.
struct QuadratureError : Error {
  QuadratureError(const std::string& msg, Complex prev_estimate, Complex last_estimate)
      : Error(msg), prev(prev_estimate), last(last_estimate) {}
  Complex prev{};
  Complex last{};
};

struct LemmaViolationError : Error {
  LemmaViolationError(const std::string& msg, std::string offending_config)
      : Error(msg), config(std::move(offending_config)) {}
  std::string config;
};

struct CsvFormatError : Error {
  CsvFormatError(const std::string& msg, int line_number) : Error(msg), line(line_number) {}
  int line = 0;
};

inline void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) throw InvalidMatrixError(std::string(what) + ": non-finite entries");
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(what) + ": shape mismatch");
}

}  // namespace rankp
