#include "xvt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xvt::linalg {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kJacobiTol = 1e-12;

// One-sided Jacobi on the columns of b (m x n, m >= n). Accumulates the
// right rotations into v. Throws on non-convergence.
void one_sided_jacobi(Matrix& b, Matrix& v) {
  const std::size_t m = b.rows();
  const std::size_t n = b.cols();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          app += b(i, p) * b(i, p);
          aqq += b(i, q) * b(i, q);
          apq += b(i, p) * b(i, q);
        }
        if (std::fabs(apq) <= kJacobiTol * std::sqrt(app * aqq) || apq == 0.0) continue;
        converged = false;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double bp = b(i, p), bq = b(i, q);
          b(i, p) = c * bp - s * bq;
          b(i, q) = s * bp + c * bq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (converged) return;
  }
  throw numerical_failure_error("thin_svd: Jacobi sweeps did not converge");
}

// Extend the leading `filled` orthonormal columns of u to a full orthonormal
// set by Gram-Schmidt against coordinate directions.
void fill_null_columns(Matrix& u, std::size_t filled) {
  const std::size_t m = u.rows();
  const std::size_t k = u.cols();
  std::size_t next = filled;
  for (std::size_t cand = 0; cand < m && next < k; ++cand) {
    Vec w(m, 0.0);
    w[cand] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < next; ++j) {
        double proj = 0.0;
        for (std::size_t i = 0; i < m; ++i) proj += u(i, j) * w[i];
        for (std::size_t i = 0; i < m; ++i) w[i] -= proj * u(i, j);
      }
    }
    const double nrm = norm2(w);
    if (nrm > 1e-8) {
      for (std::size_t i = 0; i < m; ++i) u(i, next) = w[i] / nrm;
      ++next;
    }
  }
  if (next < k) throw numerical_failure_error("thin_svd: could not complete basis");
}

SvdResult thin_svd_tall(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Matrix b = a;
  Matrix v = Matrix::identity(n);
  one_sided_jacobi(b, v);

  Vec sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += b(i, j) * b(i, j);
    sigma[j] = std::sqrt(s);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  Matrix u(m, n);
  Matrix vs(n, n);
  Vec ss(n);
  const double tiny = sigma.empty() ? 0.0 : sigma[order[0]] * 1e-14;
  std::size_t filled = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    ss[j] = sigma[src];
    for (std::size_t i = 0; i < n; ++i) vs(i, j) = v(i, src);
    if (ss[j] > tiny && ss[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) u(i, j) = b(i, src) / ss[j];
      filled = j + 1;
    }
  }
  if (filled < n) fill_null_columns(u, filled);

  // Sign convention: largest-magnitude entry of each u column positive.
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t imax = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (std::fabs(u(i, j)) > best) { best = std::fabs(u(i, j)); imax = i; }
    }
    if (u(imax, j) < 0.0) {
      for (std::size_t i = 0; i < m; ++i) u(i, j) = -u(i, j);
      for (std::size_t i = 0; i < n; ++i) vs(i, j) = -vs(i, j);
    }
  }
  return SvdResult{std::move(u), std::move(ss), std::move(vs)};
}

}  // namespace

SvdResult thin_svd(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) throw invalid_input_error("thin_svd: empty matrix");
  if (!a.all_finite()) throw invalid_input_error("thin_svd: non-finite input");
  if (a.rows() >= a.cols()) return thin_svd_tall(a);
  SvdResult t = thin_svd_tall(a.transposed());
  return SvdResult{std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

Matrix orthonormal_complement(const Matrix& p) {
  const std::size_t d = p.rows();
  const std::size_t n = p.cols();
  if (n >= d) throw dimension_error("orthonormal_complement: N must be < D");
  // P must have orthonormal columns.
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      double g = 0.0;
      for (std::size_t i = 0; i < d; ++i) g += p(i, a) * p(i, b);
      const double want = (a == b) ? 1.0 : 0.0;
      if (std::fabs(g - want) > 1e-8)
        throw invalid_input_error("orthonormal_complement: columns not orthonormal");
    }
  }

  // Householder QR of P; columns n..d-1 of the implicit Q span the complement.
  Matrix work = p;
  std::vector<Vec> reflectors;
  reflectors.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vec v(d, 0.0);
    double nrm = 0.0;
    for (std::size_t i = k; i < d; ++i) { v[i] = work(i, k); nrm += v[i] * v[i]; }
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) throw numerical_failure_error("orthonormal_complement: zero column");
    if (v[k] >= 0.0) v[k] += nrm; else v[k] -= nrm;
    double vn = 0.0;
    for (std::size_t i = k; i < d; ++i) vn += v[i] * v[i];
    vn = std::sqrt(vn);
    for (std::size_t i = k; i < d; ++i) v[i] /= vn;
    for (std::size_t j = k; j < n; ++j) {
      double proj = 0.0;
      for (std::size_t i = k; i < d; ++i) proj += v[i] * work(i, j);
      for (std::size_t i = k; i < d; ++i) work(i, j) -= 2.0 * proj * v[i];
    }
    reflectors.push_back(std::move(v));
  }

  Matrix r(d, d - n);
  for (std::size_t j = n; j < d; ++j) {
    Vec w(d, 0.0);
    w[j] = 1.0;
    for (std::size_t k = n; k-- > 0;) {
      const Vec& v = reflectors[k];
      double proj = 0.0;
      for (std::size_t i = k; i < d; ++i) proj += v[i] * w[i];
      for (std::size_t i = k; i < d; ++i) w[i] -= 2.0 * proj * v[i];
    }
    r.set_col(j - n, w);
  }
  return r;
}

EigResult sym_eig(const Matrix& a) {
  const std::size_t n = a.rows();
  if (n != a.cols()) throw dimension_error("sym_eig: matrix not square");
  Matrix m = a;
  Matrix v = Matrix::identity(n);
  const double scale = std::max(m.max_abs(), 1e-300);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
    if (std::sqrt(off) <= 1e-14 * scale * n) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(m(p, q)) <= 1e-300) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < n; ++i) {
          const double mip = m(i, p), miq = m(i, q);
          m(i, p) = c * mip - s * miq;
          m(i, q) = s * mip + c * miq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double mpi = m(p, i), mqi = m(q, i);
          m(p, i) = c * mpi - s * mqi;
          m(q, i) = s * mpi + c * mqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  Vec vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = m(i, i);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return vals[x] > vals[y]; });
  EigResult res{Vec(n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    res.values[j] = vals[order[j]];
    for (std::size_t i = 0; i < n; ++i) res.vectors(i, j) = v(i, order[j]);
  }
  return res;
}

Matrix psd_sqrt(const Matrix& q, double eigen_floor) {
  const std::size_t n = q.rows();
  if (n != q.cols()) throw dimension_error("psd_sqrt: matrix not square");
  const double scale = std::max(q.max_abs(), 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::fabs(q(i, j) - q(j, i)) > 1e-8 * scale)
        throw invalid_input_error("psd_sqrt: matrix not symmetric");

  Matrix sym(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sym(i, j) = 0.5 * (q(i, j) + q(j, i));

  EigResult eig = sym_eig(sym);
  const double lam_max = eig.values.empty() ? 0.0 : std::max(eig.values[0], 0.0);
  const double floor = eigen_floor * lam_max;
  Matrix s(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = eig.values[k] < floor ? 0.0 : eig.values[k];
    if (lam == 0.0) continue;
    const double root = std::sqrt(lam);
    for (std::size_t i = 0; i < n; ++i) {
      const double vik = eig.vectors(i, k) * root;
      if (vik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) s(i, j) += vik * eig.vectors(j, k);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (s(i, j) + s(j, i));
      s(i, j) = s(j, i) = avg;
    }
  return s;
}

std::size_t numerical_rank(const Vec& sigma, double rel_tol) {
  if (sigma.empty()) return 0;
  const double cutoff = rel_tol * sigma[0];
  std::size_t r = 0;
  for (double s : sigma)
    if (s > cutoff && s > 0.0) ++r;
  return r;
}

}  // namespace xvt::linalg
