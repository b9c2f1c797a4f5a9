#pragma once

#include <optional>

#include "xvt/linalg.hpp"

namespace xvt::grassmann {

/// Orthonormal basis of an N-dimensional subspace of R^D, optionally with the
/// centering offset used when the basis was fit from data.
struct Subspace {
  Matrix basis;  // D x N, orthonormal columns
  std::optional<Vec> mean;
  std::size_t dim_ambient = 0;
  std::size_t dim_sub = 0;
};

Subspace make_subspace(Matrix basis, std::optional<Vec> mean = std::nullopt);

/// Principal-angle system of a subspace pair: the generalized SVD factors
/// U1, U2, V and the angles omega (nondecreasing, in [0, pi/2]).
/// r is the orthonormal complement of the source basis used to build u2;
/// u2 columns with sin(omega) at or below the floor are zero.
struct PrincipalSystem {
  Matrix u1;     // N x N
  Matrix u2;     // (D-N) x N
  Matrix v;      // N x N
  Vec omega;     // N angles, radians
  Matrix r;      // D x (D-N)
};

/// Geodesic flow kernel between two subspaces: the closed-form D x D kernel
/// and its PSD square root.
struct GeodesicKernel {
  Matrix q;
  Matrix q_sqrt;
  PrincipalSystem system;
  Subspace source;
  Subspace target;
};

Subspace subspace_from_data(const Matrix& samples, std::size_t n_sub, bool center = true);

PrincipalSystem principal_system(const Subspace& source, const Subspace& target,
                                 double sin_floor = 1e-8);

/// Diagonal coefficients of the closed-form kernel. Switches to Taylor
/// expansions when 2*omega < 1e-4.
struct LambdaCoefficients {
  Vec lambda1, lambda2, lambda3;
};

LambdaCoefficients lambda_coefficients(const Vec& omega);

GeodesicKernel gfk_closed_form(const PrincipalSystem& system, const Subspace& source,
                               const Subspace& target);

/// Convenience: principal system + closed form in one call.
GeodesicKernel gfk_between(const Subspace& source, const Subspace& target);

/// Gauss-Legendre approximation of the kernel integral; oracle for the
/// closed form (which equals exactly twice this integral).
Matrix gfk_quadrature(const PrincipalSystem& system, const Subspace& source,
                      std::size_t n_nodes);

/// Point on the geodesic between the two subspaces, nu in [0, 1].
Matrix geodesic_point(const PrincipalSystem& system, const Subspace& source, double nu);

/// Frobenius norm of the difference of the orthogonal projectors of two
/// column spans; the subspace distance used by the endpoint checks.
double projector_distance(const Matrix& a, const Matrix& b);

/// JSON summary {ambient_dim, sub_dim, omega[], quad_residual}.
std::string kernel_summary_json(const GeodesicKernel& kernel, double quad_residual);

}  // namespace xvt::grassmann
