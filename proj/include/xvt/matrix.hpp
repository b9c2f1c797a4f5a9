#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "xvt/error.hpp"

namespace xvt {

using Vec = std::vector<double>;

/// Dense row-major real matrix. Constructors reject non-finite entries.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<Vec>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }

  Matrix transposed() const;
  Vec col(std::size_t j) const;
  Vec row(std::size_t i) const;
  void set_col(std::size_t j, const Vec& v);

  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& rhs);
  Matrix& operator-=(const Matrix& rhs);
  Matrix& operator*=(double s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Vec operator*(const Matrix& a, const Vec& x);

// Vector helpers used throughout the toolkit.
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
Vec sub(const Vec& a, const Vec& b);
Vec add(const Vec& a, const Vec& b);
Vec scaled(Vec a, double s);
double distance(const Vec& a, const Vec& b);

/// CSV I/O: one row per line, comma separated, optional '#' header lines.
/// Values are written with 17 significant digits so a round trip is exact.
void write_csv(const Matrix& m, const std::string& path, const std::string& header = "");
Matrix read_csv(const std::string& path);

std::string format_real(double x);  // 17-significant-digit formatting

}  // namespace xvt
