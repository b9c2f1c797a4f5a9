#include "xvt/flows.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "xvt/error.hpp"

namespace xvt::flows {

namespace {

using nlohmann::json;

struct Lu {
  Matrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
};

Lu lu_factor(const Matrix& w) {
  const std::size_t n = w.rows();
  Lu f{w, std::vector<std::size_t>(n), 1};
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::fabs(f.lu(i, k)) > std::fabs(f.lu(piv, k))) piv = i;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
      std::swap(f.perm[k], f.perm[piv]);
      f.sign = -f.sign;
    }
    const double d = f.lu(k, k);
    if (std::fabs(d) < 1e-300)
      throw numerical_failure_error("invertible_linear: singular matrix");
    for (std::size_t i = k + 1; i < n; ++i) {
      f.lu(i, k) /= d;
      const double m = f.lu(i, k);
      for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= m * f.lu(k, j);
    }
  }
  return f;
}

double lu_log_abs_det(const Lu& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.lu.rows(); ++i) s += std::log(std::fabs(f.lu(i, i)));
  return s;
}

Vec lu_solve(const Lu& f, const Vec& b) {
  const std::size_t n = f.lu.rows();
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
    x[i] /= f.lu(i, i);
  }
  return x;
}

void coupling_maps(const AffineCoupling& c, const Vec& y1, Vec& logs, Vec& shift) {
  Vec h(c.bh.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    double s = c.bh[i];
    for (std::size_t j = 0; j < y1.size(); ++j) s += c.wh(i, j) * y1[j];
    h[i] = std::tanh(s);
  }
  logs.resize(c.bs.size());
  shift.resize(c.bt.size());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    double s = c.bs[i], t = c.bt[i];
    for (std::size_t j = 0; j < h.size(); ++j) {
      s += c.ws(i, j) * h[j];
      t += c.wt(i, j) * h[j];
    }
    logs[i] = c.amp * std::tanh(s);
    shift[i] = t;
  }
}

void check_finite(const Vec& v, std::size_t layer_index) {
  for (double x : v)
    if (!std::isfinite(x))
      throw numerical_failure_error("flow layer " + std::to_string(layer_index) +
                                    ": non-finite output");
}

void validate_layer(const FlowLayer& layer, std::size_t dim) {
  if (const auto* a = std::get_if<ActNorm>(&layer)) {
    if (a->scale.size() != dim || a->bias.size() != dim)
      throw dimension_error("actnorm: parameter dimension mismatch");
    for (double s : a->scale)
      if (s == 0.0) throw invalid_input_error("actnorm: zero scale");
  } else if (const auto* l = std::get_if<InvertibleLinear>(&layer)) {
    if (l->w.rows() != dim || l->w.cols() != dim)
      throw dimension_error("invertible_linear: matrix dimension mismatch");
    const double logdet = lu_log_abs_det(lu_factor(l->w));
    if (logdet < std::log(1e-12))
      throw invalid_input_error("invertible_linear: |det| at or below 1e-12");
  } else {
    const auto& c = std::get<AffineCoupling>(layer);
    if (c.split == 0 || c.split >= dim)
      throw invalid_input_error("affine_coupling: split must be strictly interior");
    const std::size_t rest = dim - c.split;
    if (c.wh.cols() != c.split || c.wh.rows() != c.bh.size() || c.ws.rows() != rest ||
        c.wt.rows() != rest || c.ws.cols() != c.bh.size() || c.wt.cols() != c.bh.size() ||
        c.bs.size() != rest || c.bt.size() != rest)
      throw dimension_error("affine_coupling: coefficient map shape mismatch");
  }
}

}  // namespace

void validate_stack(const FlowStack& stack) {
  if (stack.dim == 0) throw invalid_input_error("FlowStack: zero dimension");
  for (const FlowLayer& layer : stack.layers) validate_layer(layer, stack.dim);
}

ForwardResult flow_forward(const FlowStack& stack, const Vec& y) {
  if (y.size() != stack.dim) throw dimension_error("flow_forward: input dimension mismatch");
  ForwardResult r{y, 0.0};
  for (std::size_t li = 0; li < stack.layers.size(); ++li) {
    const FlowLayer& layer = stack.layers[li];
    if (const auto* a = std::get_if<ActNorm>(&layer)) {
      for (std::size_t i = 0; i < r.z.size(); ++i) r.z[i] = a->scale[i] * r.z[i] + a->bias[i];
      for (double s : a->scale) r.logdet += std::log(std::fabs(s));
    } else if (const auto* l = std::get_if<InvertibleLinear>(&layer)) {
      const Lu f = lu_factor(l->w);
      r.z = l->w * r.z;
      r.logdet += lu_log_abs_det(f);
    } else {
      const auto& c = std::get<AffineCoupling>(layer);
      Vec y1(r.z.begin(), r.z.begin() + static_cast<std::ptrdiff_t>(c.split));
      Vec logs, shift;
      coupling_maps(c, y1, logs, shift);
      for (std::size_t i = 0; i < logs.size(); ++i) {
        r.z[c.split + i] = r.z[c.split + i] * std::exp(logs[i]) + shift[i];
        r.logdet += logs[i];
      }
    }
    check_finite(r.z, li);
  }
  return r;
}

Vec flow_inverse(const FlowStack& stack, const Vec& z) {
  if (z.size() != stack.dim) throw dimension_error("flow_inverse: input dimension mismatch");
  Vec y = z;
  for (std::size_t li = stack.layers.size(); li-- > 0;) {
    const FlowLayer& layer = stack.layers[li];
    if (const auto* a = std::get_if<ActNorm>(&layer)) {
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = (y[i] - a->bias[i]) / a->scale[i];
    } else if (const auto* l = std::get_if<InvertibleLinear>(&layer)) {
      y = lu_solve(lu_factor(l->w), y);
    } else {
      const auto& c = std::get<AffineCoupling>(layer);
      Vec y1(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(c.split));
      Vec logs, shift;
      coupling_maps(c, y1, logs, shift);
      for (std::size_t i = 0; i < logs.size(); ++i)
        y[c.split + i] = (y[c.split + i] - shift[i]) * std::exp(-logs[i]);
    }
    check_finite(y, li);
  }
  return y;
}

double bimal_loss(const FlowStack& stack, const Vec& y) {
  const ForwardResult r = flow_forward(stack, y);
  const double d = static_cast<double>(stack.dim);
  return 0.5 * dot(r.z, r.z) + 0.5 * d * std::log(2.0 * 3.14159265358979323846) - r.logdet;
}

GibbsCheck gibbs_bound_check(const Vec& p, const Vec& q, double epsilon) {
  if (p.size() != q.size() || p.empty())
    throw invalid_input_error("gibbs_bound_check: size mismatch or empty");
  GibbsCheck g;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw invalid_input_error("gibbs_bound_check: negative entry");
    const double qi = std::max(q[i], epsilon);
    if (p[i] > 0.0) {
      g.cross_entropy -= p[i] * std::log(qi);
      g.entropy -= p[i] * std::log(p[i]);
    }
  }
  g.holds = g.cross_entropy >= g.entropy - 1e-12;
  return g;
}

LatentSample transport_transform(const Vec& z_s, double rho, std::mt19937_64& rng) {
  if (rho < 0.0) throw invalid_input_error("transport_transform: rho must be >= 0");
  double alpha = 0.0;
  if (rho > 0.0) {
    std::uniform_real_distribution<double> u(-rho, rho);
    alpha = u(rng);
  }
  return transport_transform_fixed_alpha(z_s, rho, alpha, rng);
}

LatentSample transport_transform_fixed_alpha(const Vec& z_s, double rho, double alpha,
                                             std::mt19937_64& rng) {
  const double sqrt2 = std::sqrt(2.0);
  std::normal_distribution<double> n(alpha * sqrt2, 1.0);
  LatentSample out;
  out.z.resize(z_s.size());
  for (std::size_t i = 0; i < z_s.size(); ++i) out.z[i] = (z_s[i] + n(rng)) / sqrt2;
  out.provenance = Provenance{z_s, rho, alpha};
  return out;
}

double gaussian_w2_per_dim(const Vec& mean_a, const Vec& cov_diag_a, const Vec& mean_b,
                           const Vec& cov_diag_b) {
  const std::size_t d = mean_a.size();
  if (d == 0 || mean_b.size() != d || cov_diag_a.size() != d || cov_diag_b.size() != d)
    throw dimension_error("gaussian_w2_per_dim: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (cov_diag_a[i] <= 0.0 || cov_diag_b[i] <= 0.0)
      throw invalid_input_error("gaussian_w2_per_dim: nonpositive variance");
    const double dm = mean_a[i] - mean_b[i];
    const double ds = std::sqrt(cov_diag_a[i]) - std::sqrt(cov_diag_b[i]);
    s += dm * dm + ds * ds;
  }
  return std::sqrt(s) / std::sqrt(static_cast<double>(d));
}

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  std::vector<Vec> data;
  for (const auto& row : rows) data.push_back(row.get<Vec>());
  return Matrix::from_rows(data);
}

}  // namespace

std::string stack_to_json(const FlowStack& stack) {
  json doc;
  doc["dim"] = stack.dim;
  doc["layers"] = json::array();
  for (const FlowLayer& layer : stack.layers) {
    json entry;
    if (const auto* a = std::get_if<ActNorm>(&layer)) {
      entry["kind"] = "actnorm";
      entry["scale"] = a->scale;
      entry["bias"] = a->bias;
    } else if (const auto* l = std::get_if<InvertibleLinear>(&layer)) {
      entry["kind"] = "invertible_linear";
      entry["w"] = matrix_to_json(l->w);
    } else {
      const auto& c = std::get<AffineCoupling>(layer);
      entry["kind"] = "affine_coupling";
      entry["split"] = c.split;
      entry["wh"] = matrix_to_json(c.wh);
      entry["bh"] = c.bh;
      entry["ws"] = matrix_to_json(c.ws);
      entry["bs"] = c.bs;
      entry["wt"] = matrix_to_json(c.wt);
      entry["bt"] = c.bt;
      entry["amp"] = c.amp;
    }
    doc["layers"].push_back(std::move(entry));
  }
  return doc.dump();
}

FlowStack stack_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw io_error(std::string("stack_from_json: ") + e.what());
  }
  FlowStack stack;
  try {
    stack.dim = doc.at("dim").get<std::size_t>();
    for (const auto& entry : doc.at("layers")) {
      const std::string kind = entry.at("kind").get<std::string>();
      if (kind == "actnorm") {
        stack.layers.emplace_back(ActNorm{entry.at("scale").get<Vec>(), entry.at("bias").get<Vec>()});
      } else if (kind == "invertible_linear") {
        stack.layers.emplace_back(InvertibleLinear{matrix_from_json(entry.at("w"))});
      } else if (kind == "affine_coupling") {
        AffineCoupling c;
        c.split = entry.at("split").get<std::size_t>();
        c.wh = matrix_from_json(entry.at("wh"));
        c.bh = entry.at("bh").get<Vec>();
        c.ws = matrix_from_json(entry.at("ws"));
        c.bs = entry.at("bs").get<Vec>();
        c.wt = matrix_from_json(entry.at("wt"));
        c.bt = entry.at("bt").get<Vec>();
        c.amp = entry.at("amp").get<double>();
        stack.layers.emplace_back(std::move(c));
      } else {
        throw io_error("stack_from_json: unknown layer kind " + kind);
      }
    }
  } catch (const json::exception& e) {
    throw io_error(std::string("stack_from_json: ") + e.what());
  }
  validate_stack(stack);
  return stack;
}

FlowStack random_stack(std::size_t dim, std::size_t n_layers, std::uint64_t seed) {
  if (dim < 2) throw invalid_input_error("random_stack: need dim >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  FlowStack stack;
  stack.dim = dim;
  for (std::size_t li = 0; li < n_layers; ++li) {
    switch (li % 3) {
      case 0: {
        ActNorm a;
        a.scale.resize(dim);
        a.bias.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) {
          a.scale[i] = 0.5 + std::fabs(u(rng)) + 0.25;  // keep away from zero
          a.bias[i] = u(rng);
        }
        stack.layers.emplace_back(std::move(a));
        break;
      }
      case 1: {
        // diagonally dominant => comfortably invertible
        Matrix w(dim, dim);
        for (std::size_t i = 0; i < dim; ++i) {
          for (std::size_t j = 0; j < dim; ++j) w(i, j) = 0.3 * u(rng);
          w(i, i) += 1.0;
        }
        stack.layers.emplace_back(InvertibleLinear{std::move(w)});
        break;
      }
      default: {
        AffineCoupling c;
        c.split = dim / 2;
        const std::size_t rest = dim - c.split;
        const std::size_t hidden = std::max<std::size_t>(4, dim);
        c.wh = Matrix(hidden, c.split);
        c.bh.resize(hidden);
        c.ws = Matrix(rest, hidden);
        c.bs.resize(rest);
        c.wt = Matrix(rest, hidden);
        c.bt.resize(rest);
        for (std::size_t i = 0; i < hidden; ++i) {
          c.bh[i] = u(rng);
          for (std::size_t j = 0; j < c.split; ++j) c.wh(i, j) = u(rng);
        }
        for (std::size_t i = 0; i < rest; ++i) {
          c.bs[i] = u(rng);
          c.bt[i] = u(rng);
          for (std::size_t j = 0; j < hidden; ++j) {
            c.ws(i, j) = u(rng);
            c.wt(i, j) = u(rng);
          }
        }
        stack.layers.emplace_back(std::move(c));
        break;
      }
    }
  }
  validate_stack(stack);
  return stack;
}

}  // namespace xvt::flows
