#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace mecassoc {

/// Placeholder fraction written into every unallocated resource entry so that
/// delay expressions never divide by zero.
inline constexpr double kUnallocated = 1e-8;

/// Absolute tolerance on constraint sums (C3-C7) and box domains.
inline constexpr double kFeasibilityTol = 1e-9;

/// Strict-improvement margin for coalition moves.
inline constexpr double kImprovementMargin = 1e-12;

enum class MdClass { hrd, csd };

inline const char* to_string(MdClass c) { return c == MdClass::hrd ? "HRD" : "CSD"; }

/// Raised when a file cannot be read or written; carries the path in what().
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the model has no admissible point (e.g. a degenerate band split
/// with demand on it, or a numerical routine that did not converge).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_mw(double dbm) { return db_to_linear(dbm); }

inline std::string format_double(double v, int significant_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, v);
  return buf;
}

// Dense row-major matrix. Small and value-semantic; all model tensors are tiny.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// Dense [a][b][c] tensor, used for the per-(SBS, HRD, file) fractions.
template <typename T>
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t d0, std::size_t d1, std::size_t d2, T fill = T{})
      : d0_(d0), d1_(d1), d2_(d2), data_(d0 * d1 * d2, fill) {}

  std::size_t dim0() const { return d0_; }
  std::size_t dim1() const { return d1_; }
  std::size_t dim2() const { return d2_; }

  T& operator()(std::size_t a, std::size_t b, std::size_t c) { return data_[(a * d1_ + b) * d2_ + c]; }
  const T& operator()(std::size_t a, std::size_t b, std::size_t c) const {
    return data_[(a * d1_ + b) * d2_ + c];
  }

  const std::vector<T>& data() const { return data_; }

  bool operator==(const Tensor3&) const = default;

 private:
  std::size_t d0_ = 0, d1_ = 0, d2_ = 0;
  std::vector<T> data_;
};

using BinaryMatrix = Matrix<std::uint8_t>;

}  // namespace mecassoc
