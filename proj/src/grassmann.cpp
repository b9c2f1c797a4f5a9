#include "xvt/grassmann.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace xvt::grassmann {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_basis(const Matrix& basis) {
  const std::size_t d = basis.rows();
  const std::size_t n = basis.cols();
  if (n == 0 || n >= d) throw dimension_error("Subspace: need 0 < N < D");
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      double g = 0.0;
      for (std::size_t i = 0; i < d; ++i) g += basis(i, a) * basis(i, b);
      const double want = (a == b) ? 1.0 : 0.0;
      if (std::fabs(g - want) > 1e-8)
        throw invalid_input_error("Subspace: basis columns not orthonormal");
    }
}

// Nodes/weights of n-point Gauss-Legendre on [0, 1], by Newton iteration on
// the Legendre polynomial.
void gauss_legendre_01(std::size_t n, Vec& nodes, Vec& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    // initial guess on [-1, 1]
    double x = std::cos(kPi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    nodes[i] = 0.5 * (1.0 - x);  // map [-1,1] -> [0,1], reversed order harmless
    weights[i] = 1.0 / ((1.0 - x * x) * pp * pp);
  }
}

}  // namespace

Subspace make_subspace(Matrix basis, std::optional<Vec> mean) {
  check_basis(basis);
  Subspace s;
  s.dim_ambient = basis.rows();
  s.dim_sub = basis.cols();
  s.basis = std::move(basis);
  s.mean = std::move(mean);
  return s;
}

Subspace subspace_from_data(const Matrix& samples, std::size_t n_sub, bool center) {
  const std::size_t m = samples.rows();
  const std::size_t d = samples.cols();
  if (n_sub < 1 || n_sub > m || n_sub >= d)
    throw dimension_error("subspace_from_data: need 1 <= n_sub <= M and n_sub < D");
  Matrix data = samples;
  std::optional<Vec> mean;
  if (center) {
    Vec mu(d, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < d; ++j) mu[j] += data(i, j);
    for (double& v : mu) v /= static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < d; ++j) data(i, j) -= mu[j];
    mean = std::move(mu);
  }
  linalg::SvdResult svd = linalg::thin_svd(data);
  const std::size_t rank = linalg::numerical_rank(svd.sigma);
  if (rank < n_sub) {
    std::ostringstream os;
    os << "subspace_from_data: data rank " << rank << " < requested " << n_sub;
    throw invalid_input_error(os.str());
  }
  Matrix basis(d, n_sub);
  for (std::size_t j = 0; j < n_sub; ++j)
    for (std::size_t i = 0; i < d; ++i) basis(i, j) = svd.v(i, j);
  return make_subspace(std::move(basis), std::move(mean));
}

PrincipalSystem principal_system(const Subspace& source, const Subspace& target,
                                 double sin_floor) {
  if (source.dim_ambient != target.dim_ambient || source.dim_sub != target.dim_sub)
    throw dimension_error("principal_system: subspace dimensions mismatch");
  const std::size_t n = source.dim_sub;

  Matrix cross = source.basis.transposed() * target.basis;  // N x N
  linalg::SvdResult svd = linalg::thin_svd(cross);

  PrincipalSystem sys;
  sys.u1 = std::move(svd.u);
  sys.v = std::move(svd.v);
  sys.omega.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::clamp(svd.sigma[i], 0.0, 1.0);
    sys.omega[i] = std::acos(c);
  }

  sys.r = linalg::orthonormal_complement(source.basis);
  Matrix b = sys.r.transposed() * target.basis;  // (D-N) x N
  sys.u2 = Matrix(b.rows(), n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sin(sys.omega[i]);
    if (s <= sin_floor) continue;  // column stays zero; its kernel weight vanishes
    for (std::size_t rrow = 0; rrow < b.rows(); ++rrow) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += b(rrow, k) * sys.v(k, i);
      sys.u2(rrow, i) = -acc / s;
    }
  }
  return sys;
}

LambdaCoefficients lambda_coefficients(const Vec& omega) {
  LambdaCoefficients lc;
  const std::size_t n = omega.size();
  lc.lambda1.resize(n);
  lc.lambda2.resize(n);
  lc.lambda3.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = omega[i];
    if (w < 0.0 || w > kPi / 2.0 + 1e-12)
      throw invalid_input_error("lambda_coefficients: angle outside [0, pi/2]");
    const double x = 2.0 * w;
    double sinc, cosm1_over;
    if (x < 1e-4) {
      const double x2 = x * x;
      sinc = 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
      cosm1_over = -x / 2.0 + x * x2 / 24.0;
    } else {
      sinc = std::sin(x) / x;
      cosm1_over = (std::cos(x) - 1.0) / x;
    }
    lc.lambda1[i] = 1.0 + sinc;
    lc.lambda2[i] = cosm1_over;
    lc.lambda3[i] = 1.0 - sinc;
  }
  return lc;
}

GeodesicKernel gfk_closed_form(const PrincipalSystem& system, const Subspace& source,
                               const Subspace& target) {
  const std::size_t d = source.dim_ambient;
  const std::size_t n = source.dim_sub;
  const LambdaCoefficients lc = lambda_coefficients(system.omega);

  Matrix g1 = source.basis * system.u1;  // D x N
  Matrix g2 = system.r * system.u2;      // D x N

  Matrix q(d, d);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      const double a1 = g1(i, k), a2 = g2(i, k);
      const double c1 = lc.lambda1[k] * a1 + lc.lambda2[k] * a2;
      const double c2 = lc.lambda2[k] * a1 + lc.lambda3[k] * a2;
      if (c1 == 0.0 && c2 == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) q(i, j) += c1 * g1(j, k) + c2 * g2(j, k);
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const double avg = 0.5 * (q(i, j) + q(j, i));
      q(i, j) = q(j, i) = avg;
    }

  GeodesicKernel kernel;
  kernel.q_sqrt = linalg::psd_sqrt(q);
  kernel.q = std::move(q);
  kernel.system = system;
  kernel.source = source;
  kernel.target = target;
  return kernel;
}

GeodesicKernel gfk_between(const Subspace& source, const Subspace& target) {
  return gfk_closed_form(principal_system(source, target), source, target);
}

Matrix geodesic_point(const PrincipalSystem& system, const Subspace& source, double nu) {
  if (nu < 0.0 || nu > 1.0) throw invalid_input_error("geodesic_point: nu outside [0, 1]");
  const std::size_t d = source.dim_ambient;
  const std::size_t n = source.dim_sub;
  Matrix g1 = source.basis * system.u1;
  Matrix g2 = system.r * system.u2;
  Matrix pi(d, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double c = std::cos(nu * system.omega[k]);
    const double s = std::sin(nu * system.omega[k]);
    for (std::size_t i = 0; i < d; ++i) pi(i, k) = g1(i, k) * c - g2(i, k) * s;
  }
  return pi;
}

Matrix gfk_quadrature(const PrincipalSystem& system, const Subspace& source,
                      std::size_t n_nodes) {
  if (n_nodes < 8) throw invalid_input_error("gfk_quadrature: need at least 8 nodes");
  const std::size_t d = source.dim_ambient;
  Vec nodes, weights;
  gauss_legendre_01(n_nodes, nodes, weights);
  Matrix q(d, d);
  for (std::size_t t = 0; t < n_nodes; ++t) {
    Matrix pi = geodesic_point(system, source, nodes[t]);
    for (std::size_t k = 0; k < pi.cols(); ++k)
      for (std::size_t i = 0; i < d; ++i) {
        const double w = weights[t] * pi(i, k);
        if (w == 0.0) continue;
        for (std::size_t j = 0; j < d; ++j) q(i, j) += w * pi(j, k);
      }
  }
  return q;
}

double projector_distance(const Matrix& a, const Matrix& b) {
  Matrix pa = a * a.transposed();
  Matrix pb = b * b.transposed();
  return (pa - pb).frobenius_norm();
}

std::string kernel_summary_json(const GeodesicKernel& kernel, double quad_residual) {
  std::ostringstream os;
  os << "{\"ambient_dim\":" << kernel.source.dim_ambient
     << ",\"omega\":[";
  for (std::size_t i = 0; i < kernel.system.omega.size(); ++i) {
    if (i) os << ",";
    os << format_real(kernel.system.omega[i]);
  }
  os << "],\"quad_residual\":" << format_real(quad_residual)
     << ",\"sub_dim\":" << kernel.source.dim_sub << "}";
  return os.str();
}

}  // namespace xvt::grassmann
