#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "xvt/grassmann.hpp"
#include "xvt/synthdata.hpp"

using namespace xvt;

namespace {

constexpr double kPi = 3.14159265358979323846;

grassmann::GeodesicKernel planar_orthogonal_kernel() {
  Matrix ps(2, 1);
  ps(0, 0) = 1.0;
  Matrix pt(2, 1);
  pt(1, 0) = 1.0;
  return grassmann::gfk_between(grassmann::make_subspace(ps), grassmann::make_subspace(pt));
}

}  // namespace

TEST_CASE("make_subspace validates the basis") {
  Matrix ok(3, 1);
  ok(0, 0) = 1.0;
  CHECK_NOTHROW(grassmann::make_subspace(ok));
  Matrix bad(3, 1);
  bad(0, 0) = 2.0;
  CHECK_THROWS_AS(grassmann::make_subspace(bad), invalid_input_error);
  CHECK_THROWS_AS(grassmann::make_subspace(Matrix::identity(3)), dimension_error);
}

TEST_CASE("lambda coefficients at omega = 0.5") {
  auto lc = grassmann::lambda_coefficients({0.5});
  CHECK(lc.lambda1[0] == doctest::Approx(1.0 + std::sin(1.0)).epsilon(1e-15));
  CHECK(lc.lambda2[0] == doctest::Approx((std::cos(1.0) - 1.0) / 1.0).epsilon(1e-15));
  CHECK(lc.lambda3[0] == doctest::Approx(1.0 - std::sin(1.0)).epsilon(1e-15));
}

TEST_CASE("lambda coefficients: Taylor branch joins the direct formula") {
  // straddle the 2*omega = 1e-4 switch
  for (double w : {4.9e-5, 5.1e-5}) {
    auto lc = grassmann::lambda_coefficients({w});
    const double x = 2.0 * w;
    CHECK(lc.lambda1[0] == doctest::Approx(1.0 + std::sin(x) / x).epsilon(1e-13));
    CHECK(lc.lambda2[0] == doctest::Approx((std::cos(x) - 1.0) / x).epsilon(1e-10));
    CHECK(lc.lambda3[0] == doctest::Approx(1.0 - std::sin(x) / x).epsilon(1e-10));
  }
  CHECK_THROWS_AS(grassmann::lambda_coefficients({2.0}), invalid_input_error);
}

TEST_CASE("planar orthogonal kernel matches the hand-computed Q") {
  auto kernel = planar_orthogonal_kernel();
  CHECK(std::fabs(kernel.q(0, 0) - 1.0) < 1e-12);
  CHECK(std::fabs(kernel.q(1, 1) - 1.0) < 1e-12);
  CHECK(std::fabs(kernel.q(0, 1) - 2.0 / kPi) < 1e-12);
  CHECK(std::fabs(kernel.q(1, 0) - 2.0 / kPi) < 1e-12);
}

TEST_CASE("closed form equals exactly twice the quadrature integral") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ang(0.05, 1.5);
    const std::size_t d = 6 + seed % 10;
    const std::size_t n = 1 + seed % std::min<std::size_t>(3, d / 2);
    Vec angles(n);
    for (double& a : angles) a = ang(rng);
    std::sort(angles.begin(), angles.end());
    auto [src, tgt] = synthdata::rotated_subspace_pair(d, n, angles, seed);
    auto kernel = grassmann::gfk_between(src, tgt);
    Matrix quad = grassmann::gfk_quadrature(kernel.system, src, 64);
    quad *= 2.0;
    CHECK((kernel.q - quad).frobenius_norm() / kernel.q.frobenius_norm() < 1e-8);
  }
}

TEST_CASE("geodesic endpoints span the source and target") {
  auto [src, tgt] = synthdata::rotated_subspace_pair(12, 3, {0.2, 0.5, 1.1}, 42);
  auto sys = grassmann::principal_system(src, tgt);
  Matrix p0 = grassmann::geodesic_point(sys, src, 0.0);
  Matrix p1 = grassmann::geodesic_point(sys, src, 1.0);
  CHECK(grassmann::projector_distance(p0, src.basis) < 1e-9);
  CHECK(grassmann::projector_distance(p1, tgt.basis) < 1e-9);
  CHECK_THROWS_AS(grassmann::geodesic_point(sys, src, 1.5), invalid_input_error);
  CHECK_THROWS_AS(grassmann::geodesic_point(sys, src, -0.1), invalid_input_error);
}

TEST_CASE("principal angles recover the prescribed rotation angles") {
  const Vec angles = {0.1, 0.2, 0.3, 0.4};
  auto [src, tgt] = synthdata::rotated_subspace_pair(16, 4, angles, 7);
  auto sys = grassmann::principal_system(src, tgt);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::fabs(sys.omega[i] - angles[i]) < 1e-9);
}

TEST_CASE("identical subspaces give zero angles and Q acting as twice the projector") {
  auto [src, tgt] = synthdata::rotated_subspace_pair(8, 2, {0.0, 0.0}, 3);
  auto sys = grassmann::principal_system(src, tgt);
  CHECK(std::fabs(sys.omega[0]) < 1e-7);
  CHECK(std::fabs(sys.omega[1]) < 1e-7);
  auto kernel = grassmann::gfk_closed_form(sys, src, src);
  // integral of the constant projector: Q = 2 * P P^T
  Matrix proj = src.basis * src.basis.transposed();
  proj *= 2.0;
  CHECK((kernel.q - proj).max_abs() < 1e-9);
}

TEST_CASE("subspace_from_data centers and recovers a planted basis") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  auto [planted, unused] = synthdata::rotated_subspace_pair(10, 2, {0.3, 0.7}, 11);
  (void)unused;
  Matrix samples(60, 10);
  for (std::size_t i = 0; i < 60; ++i) {
    Vec coeff = {g(rng), g(rng)};
    for (std::size_t j = 0; j < 10; ++j)
      samples(i, j) = planted.basis(j, 0) * coeff[0] + planted.basis(j, 1) * coeff[1] + 0.5;
  }
  auto sub = grassmann::subspace_from_data(samples, 2, true);
  REQUIRE(sub.mean.has_value());
  CHECK(grassmann::projector_distance(sub.basis, planted.basis) < 1e-6);
}

TEST_CASE("subspace_from_data rejects rank-deficient requests") {
  Matrix samples(5, 6);
  for (std::size_t i = 0; i < 5; ++i) samples(i, 0) = static_cast<double>(i + 1);
  CHECK_THROWS_WITH_AS(grassmann::subspace_from_data(samples, 3, false),
                       doctest::Contains("rank 1"), invalid_input_error);
}

TEST_CASE("quadrature node count is validated") {
  auto [src, tgt] = synthdata::rotated_subspace_pair(6, 2, {0.4, 0.9}, 5);
  auto sys = grassmann::principal_system(src, tgt);
  CHECK_THROWS_AS(grassmann::gfk_quadrature(sys, src, 4), invalid_input_error);
}

TEST_CASE("kernel summary json shape") {
  auto kernel = planar_orthogonal_kernel();
  const std::string js = grassmann::kernel_summary_json(kernel, 1e-10);
  CHECK(js.find("\"ambient_dim\":2") != std::string::npos);
  CHECK(js.find("\"sub_dim\":1") != std::string::npos);
  CHECK(js.find("\"omega\":[") != std::string::npos);
}
