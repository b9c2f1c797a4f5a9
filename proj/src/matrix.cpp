#include "xvt/matrix.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace xvt {

namespace {
void require_finite(const std::vector<double>& data, const char* what) {
  for (double v : data) {
    if (!std::isfinite(v)) throw invalid_input_error(std::string(what) + ": non-finite entry");
  }
}
}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (!std::isfinite(fill)) throw invalid_input_error("Matrix: non-finite fill value");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) throw dimension_error("Matrix: entry count mismatch");
  require_finite(data_, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<Vec>& rows) {
  if (rows.empty()) throw invalid_input_error("Matrix::from_rows: empty");
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_) throw dimension_error("Matrix::from_rows: ragged rows");
    for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
  }
  require_finite(m.data_, "Matrix::from_rows");
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Vec Matrix::col(std::size_t j) const {
  Vec v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

Vec Matrix::row(std::size_t i) const {
  return Vec(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
             data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
}

void Matrix::set_col(std::size_t j, const Vec& v) {
  if (v.size() != rows_) throw dimension_error("set_col: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw dimension_error("Matrix +=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw dimension_error("Matrix -=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw dimension_error("Matrix *: inner dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix operator+(Matrix a, const Matrix& b) { a += b; return a; }
Matrix operator-(Matrix a, const Matrix& b) { a -= b; return a; }
Matrix operator*(Matrix a, double s) { a *= s; return a; }

Vec operator*(const Matrix& a, const Vec& x) {
  if (a.cols() != x.size()) throw dimension_error("Matrix * Vec: dimension mismatch");
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw dimension_error("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

Vec sub(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw dimension_error("sub: length mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec add(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw dimension_error("add: length mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec scaled(Vec a, double s) {
  for (double& v : a) v *= s;
  return a;
}

double distance(const Vec& a, const Vec& b) { return norm2(sub(a, b)); }

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

void write_csv(const Matrix& m, const std::string& path, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw io_error("write_csv: cannot open " + path);
  if (!header.empty()) out << "# " << header << "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << format_real(m(i, j));
    }
    out << "\n";
  }
  if (!out) throw io_error("write_csv: write failure on " + path);
}

Matrix read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("read_csv: cannot open " + path);
  std::vector<Vec> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    Vec row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw io_error("read_csv: no data rows in " + path);
  return Matrix::from_rows(rows);
}

}  // namespace xvt
