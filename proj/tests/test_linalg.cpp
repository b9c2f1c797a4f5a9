#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "xvt/linalg.hpp"

using namespace xvt;

namespace {

Matrix random_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = g(rng);
  return a;
}

double orthonormality_defect(const Matrix& u) {
  Matrix g = u.transposed() * u;
  g -= Matrix::identity(u.cols());
  return g.max_abs();
}

double reconstruction_error(const Matrix& a, const linalg::SvdResult& svd) {
  Matrix us = svd.u;
  for (std::size_t j = 0; j < svd.sigma.size(); ++j)
    for (std::size_t i = 0; i < us.rows(); ++i) us(i, j) *= svd.sigma[j];
  Matrix rec = us * svd.v.transposed();
  return (a - rec).frobenius_norm() / std::max(a.frobenius_norm(), 1e-30);
}

}  // namespace

TEST_CASE("thin svd: diagonal matrix") {
  Matrix a(3, 3);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  a(2, 2) = 2.0;
  auto svd = linalg::thin_svd(a);
  CHECK(svd.sigma[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(svd.sigma[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(svd.sigma[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("thin svd: random shapes satisfy the factorization invariants") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t m = 2 + seed % 9;
    const std::size_t n = 2 + (seed * 7) % 9;
    Matrix a = random_matrix(m, n, seed);
    auto svd = linalg::thin_svd(a);
    CHECK(orthonormality_defect(svd.u) < 1e-10);
    CHECK(orthonormality_defect(svd.v) < 1e-10);
    CHECK(reconstruction_error(a, svd) < 1e-9);
    for (std::size_t i = 0; i + 1 < svd.sigma.size(); ++i) CHECK(svd.sigma[i] >= svd.sigma[i + 1]);
  }
}

TEST_CASE("thin svd: sign convention puts the largest left entry positive") {
  for (std::uint64_t seed = 30; seed < 40; ++seed) {
    Matrix a = random_matrix(6, 4, seed);
    auto svd = linalg::thin_svd(a);
    for (std::size_t j = 0; j < svd.u.cols(); ++j) {
      double big = 0.0;
      for (std::size_t i = 0; i < svd.u.rows(); ++i)
        if (std::fabs(svd.u(i, j)) > std::fabs(big)) big = svd.u(i, j);
      CHECK(big > 0.0);
    }
  }
}

TEST_CASE("thin svd: rank-deficient input keeps orthonormal factors") {
  Matrix a = random_matrix(8, 3, 5);
  Matrix wide(8, 5);
  // columns 3 and 4 are copies -> rank 3
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 3; ++j) wide(i, j) = a(i, j);
    wide(i, 3) = a(i, 0);
    wide(i, 4) = a(i, 1);
  }
  auto svd = linalg::thin_svd(wide);
  CHECK(orthonormality_defect(svd.u) < 1e-10);
  CHECK(orthonormality_defect(svd.v) < 1e-10);
  CHECK(reconstruction_error(wide, svd) < 1e-9);
  CHECK(linalg::numerical_rank(svd.sigma) == 3);
}

TEST_CASE("orthonormal complement") {
  for (std::uint64_t seed = 50; seed < 56; ++seed) {
    Matrix a = random_matrix(9, 3, seed);
    auto svd = linalg::thin_svd(a);
    Matrix p = svd.u;  // orthonormal 9x3
    Matrix r = linalg::orthonormal_complement(p);
    REQUIRE(r.rows() == 9);
    REQUIRE(r.cols() == 6);
    CHECK(orthonormality_defect(r) < 1e-10);
    CHECK((r.transposed() * p).max_abs() < 1e-10);
  }
  CHECK_THROWS_AS(linalg::orthonormal_complement(random_matrix(4, 2, 1)), invalid_input_error);
  CHECK_THROWS_AS(linalg::orthonormal_complement(Matrix::identity(3)), dimension_error);
}

TEST_CASE("symmetric eigendecomposition") {
  for (std::uint64_t seed = 60; seed < 66; ++seed) {
    Matrix b = random_matrix(6, 6, seed);
    Matrix a = b + b.transposed();
    auto eig = linalg::sym_eig(a);
    CHECK(orthonormality_defect(eig.vectors) < 1e-9);
    for (std::size_t i = 0; i + 1 < eig.values.size(); ++i) CHECK(eig.values[i] >= eig.values[i + 1]);
    // A v = lambda v
    for (std::size_t j = 0; j < 6; ++j) {
      Vec v = eig.vectors.col(j);
      Vec av = a * v;
      for (std::size_t i = 0; i < 6; ++i)
        CHECK(av[i] == doctest::Approx(eig.values[j] * v[i]).epsilon(1e-8).scale(1.0 + std::fabs(eig.values[j])));
    }
  }
}

TEST_CASE("psd square root squares back") {
  for (std::uint64_t seed = 70; seed < 76; ++seed) {
    Matrix b = random_matrix(5, 5, seed);
    Matrix a = b * b.transposed();  // PSD
    Matrix s = linalg::psd_sqrt(a);
    CHECK(((s * s) - a).max_abs() < 1e-8 * std::max(1.0, a.max_abs()));
    CHECK((s - s.transposed()).max_abs() < 1e-12);
  }
}

TEST_CASE("psd square root floors tiny negative eigenvalues") {
  Matrix a(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = -1e-14;  // numerically zero
  Matrix s = linalg::psd_sqrt(a);
  CHECK(s(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(s(1, 1)) < 1e-7);
}

TEST_CASE("numerical rank thresholds relative to the top singular value") {
  CHECK(linalg::numerical_rank({1.0, 1e-3, 1e-20}) == 2);
  CHECK(linalg::numerical_rank({5.0, 4.0, 3.0}) == 3);
}
