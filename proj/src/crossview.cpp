#include "xvt/crossview.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace xvt::crossview {

namespace {

double quad_form(const Matrix& q, const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    if (a[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < q.cols(); ++j) row += q(i, j) * b[j];
    s += a[i] * row;
  }
  return s;
}

}  // namespace

double geodesic_distance(const Vec& a, const Vec& b, const grassmann::GeodesicKernel& kernel,
                         ZeroPolicy zero_policy) {
  const Matrix& q = kernel.q;
  if (a.size() != q.rows() || b.size() != q.rows())
    throw dimension_error("geodesic_distance: vector/kernel dimension mismatch");
  const double qnorm = q.frobenius_norm();
  const double qa = quad_form(q, a, a);
  const double qb = quad_form(q, b, b);
  const double floor_a = 1e-12 * qnorm * dot(a, a);
  const double floor_b = 1e-12 * qnorm * dot(b, b);
  if (qa <= floor_a || qb <= floor_b) {
    if (zero_policy == ZeroPolicy::saturate) return 1.0;
    throw numerical_failure_error("geodesic_distance: degenerate kernel norm");
  }
  const double d = 1.0 - quad_form(q, a, b) / std::sqrt(qa * qb);
  return std::clamp(d, 0.0, 2.0);
}

double deep_euclidean_metric(const Vec& a, const Vec& b, const Embedding& embedding,
                             double beta) {
  Vec ga = embedding ? embedding(a) : a;
  Vec gb = embedding ? embedding(b) : b;
  if (ga.size() != gb.size())
    throw invalid_input_error("deep_euclidean_metric: embedding output length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < ga.size(); ++i) {
    const double d = ga[i] - gb[i];
    s += d * d;
  }
  return std::min(s, beta);
}

double symmetric_kl_metric(const Vec& p, const Vec& q, double epsilon, double beta) {
  if (p.size() != q.size() || p.empty())
    throw invalid_input_error("symmetric_kl_metric: length mismatch or empty");
  if (epsilon <= 0.0) throw invalid_input_error("symmetric_kl_metric: epsilon must be > 0");
  auto smooth = [&](const Vec& v) {
    double sum = 0.0;
    for (double x : v) {
      if (x < 0.0) throw invalid_input_error("symmetric_kl_metric: negative entry");
      sum += x;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
      throw invalid_input_error("symmetric_kl_metric: vector does not sum to 1");
    Vec out(v.size());
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) total += v[i] + epsilon;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] + epsilon) / total;
    return out;
  };
  const Vec ps = smooth(p);
  const Vec qs = smooth(q);
  double kl_pq = 0.0, kl_qp = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    kl_pq += ps[i] * std::log(ps[i] / qs[i]);
    kl_qp += qs[i] * std::log(qs[i] / ps[i]);
  }
  return std::min(0.5 * (kl_pq + kl_qp), beta);
}

double MetricSpec::operator()(const Vec& a, const Vec& b) const {
  double d = fn(a, b);
  if (clamp) d = std::min(d, *clamp);
  return d;
}

MetricSpec geodesic_cosine_metric(const grassmann::GeodesicKernel& kernel,
                                  ZeroPolicy zero_policy) {
  MetricSpec m;
  m.kind = "geodesic_cosine";
  m.fn = [kernel, zero_policy](const Vec& a, const Vec& b) {
    return geodesic_distance(a, b, kernel, zero_policy);
  };
  return m;
}

MetricSpec deep_euclidean_spec(Embedding embedding, double beta) {
  if (beta <= 0.0) throw invalid_input_error("deep_euclidean_spec: beta must be > 0");
  MetricSpec m;
  m.kind = "deep_euclidean";
  m.clamp = beta;
  m.fn = [embedding = std::move(embedding), beta](const Vec& a, const Vec& b) {
    return deep_euclidean_metric(a, b, embedding, beta);
  };
  return m;
}

MetricSpec symmetric_kl_spec(double epsilon, double beta) {
  if (beta <= 0.0) throw invalid_input_error("symmetric_kl_spec: beta must be > 0");
  MetricSpec m;
  m.kind = "symmetric_kl";
  m.clamp = beta;
  m.fn = [epsilon, beta](const Vec& a, const Vec& b) {
    return symmetric_kl_metric(a, b, epsilon, beta);
  };
  return m;
}

void validate_batch(const CrossViewBatch& batch) {
  if (batch.source_items.empty() || batch.target_items.empty())
    throw invalid_input_error("CrossViewBatch: empty view");
  if (batch.source_items.size() != batch.source_outputs.size() ||
      batch.target_items.size() != batch.target_outputs.size())
    throw dimension_error("CrossViewBatch: item/output list lengths differ within a view");
}

double unpaired_crossview_loss(const CrossViewBatch& batch, const MetricSpec& mx,
                               const MetricSpec& my, double alpha) {
  if (alpha <= 0.0) throw invalid_input_error("unpaired_crossview_loss: alpha must be > 0");
  validate_batch(batch);
  double acc = 0.0;
  for (std::size_t i = 0; i < batch.source_items.size(); ++i)
    for (std::size_t j = 0; j < batch.target_items.size(); ++j) {
      const double dx = mx(batch.source_items[i], batch.target_items[j]);
      const double dy = my(batch.source_outputs[i], batch.target_outputs[j]);
      const double r = dx - alpha * dy;
      acc += r * r;
    }
  return acc / static_cast<double>(batch.source_items.size() * batch.target_items.size());
}

double combined_prompt_loss(const CrossViewBatch& batch, const std::vector<Vec>& prompt_src,
                            const std::vector<Vec>& prompt_tgt, const MetricSpec& mx,
                            const MetricSpec& my, const MetricSpec& mp, double alpha,
                            double gamma, double lambda_i, double lambda_p) {
  if (lambda_i < 0.0 || lambda_p < 0.0)
    throw invalid_input_error("combined_prompt_loss: lambdas must be >= 0");
  validate_batch(batch);
  if (prompt_src.size() != batch.source_items.size() ||
      prompt_tgt.size() != batch.target_items.size())
    throw dimension_error("combined_prompt_loss: prompt list length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < batch.source_items.size(); ++i)
    for (std::size_t j = 0; j < batch.target_items.size(); ++j) {
      const double dy = my(batch.source_outputs[i], batch.target_outputs[j]);
      const double rx = mx(batch.source_items[i], batch.target_items[j]) - alpha * dy;
      const double rp = mp(prompt_src[i], prompt_tgt[j]) - gamma * dy;
      acc += lambda_i * rx * rx + lambda_p * rp * rp;
    }
  return acc / static_cast<double>(batch.source_items.size() * batch.target_items.size());
}

double cvar_selfattention_loss(const CrossViewBatch& video_pairs,
                               const std::vector<Vec>& attn_src,
                               const std::vector<Vec>& attn_tgt, const Embedding& embedding,
                               double alpha, double lambda, double beta) {
  if (lambda <= 0.0) throw invalid_input_error("cvar_selfattention_loss: lambda must be > 0");
  validate_batch(video_pairs);
  if (attn_src.size() != video_pairs.source_items.size() ||
      attn_tgt.size() != video_pairs.target_items.size())
    throw dimension_error("cvar_selfattention_loss: attention list length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < video_pairs.source_items.size(); ++i)
    for (std::size_t j = 0; j < video_pairs.target_items.size(); ++j) {
      const double dx = deep_euclidean_metric(video_pairs.source_items[i],
                                              video_pairs.target_items[j], embedding, beta);
      const double da = symmetric_kl_metric(attn_src[i], attn_tgt[j], 1e-12, beta);
      const double r = dx - alpha * da;
      acc += r * r;
    }
  return lambda * acc /
         static_cast<double>(video_pairs.source_items.size() * video_pairs.target_items.size());
}

double gw_cost_1d(const Vec& u, const Vec& v) {
  const std::size_t n = u.size();
  Vec us = u, vs = v;
  std::sort(us.begin(), us.end());
  std::sort(vs.begin(), vs.end());
  double cost_id = 0.0, cost_rev = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double du = us[i] - us[j];
      const double dv_id = vs[i] - vs[j];
      const double dv_rev = vs[n - 1 - i] - vs[n - 1 - j];
      const double rid = du * du - dv_id * dv_id;
      const double rrev = du * du - dv_rev * dv_rev;
      cost_id += rid * rid;
      cost_rev += rrev * rrev;
    }
  const double scale = static_cast<double>(n) * static_cast<double>(n);
  return std::min(cost_id, cost_rev) / scale;
}

double sliced_gw_alignment(const std::vector<Vec>& set_a, const std::vector<Vec>& set_b,
                           std::size_t n_projections, std::uint64_t seed) {
  if (set_a.empty() || set_b.empty())
    throw invalid_input_error("sliced_gw_alignment: empty set");
  if (set_a.size() != set_b.size())
    throw invalid_input_error("sliced_gw_alignment: sets must have equal cardinality");
  if (n_projections == 0)
    throw invalid_input_error("sliced_gw_alignment: need at least one projection");
  const std::size_t n = set_a.size();
  if (n == 1) return 0.0;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  double acc = 0.0;
  for (std::size_t t = 0; t < n_projections; ++t) {
    // A shared point-pair difference defines the slicing direction in each
    // set; intra-set geometry is all that survives, so a rigid motion of one
    // set leaves every 1-D cost unchanged.
    std::size_t i0 = 0, j0 = 0;
    Vec da, db;
    double na = 0.0, nb = 0.0;
    for (int attempt = 0; attempt < 64; ++attempt) {
      i0 = pick(rng);
      j0 = pick(rng);
      if (i0 == j0) continue;
      da = sub(set_a[i0], set_a[j0]);
      db = sub(set_b[i0], set_b[j0]);
      na = norm2(da);
      nb = norm2(db);
      if (na > 1e-15 && nb > 1e-15) break;
    }
    if (na <= 1e-15 || nb <= 1e-15) continue;  // degenerate slice contributes zero

    Vec u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = dot(set_a[i], da) / na;
      v[i] = dot(set_b[i], db) / nb;
    }
    acc += gw_cost_1d(u, v);
  }
  return acc / static_cast<double>(n_projections);
}

BoundReport paired_vs_unpaired_bound_report(const CrossViewBatch& batch,
                                            const std::vector<std::size_t>& correspondence,
                                            const MetricSpec& mx, const MetricSpec& my,
                                            double alpha) {
  validate_batch(batch);
  if (correspondence.size() != batch.source_items.size())
    throw dimension_error("paired_vs_unpaired_bound_report: correspondence length mismatch");
  double paired = 0.0;
  for (std::size_t i = 0; i < correspondence.size(); ++i) {
    const std::size_t j = correspondence[i];
    if (j >= batch.target_items.size())
      throw invalid_input_error("paired_vs_unpaired_bound_report: correspondence index out of range");
    const double dx = mx(batch.source_items[i], batch.target_items[j]);
    const double dy = my(batch.source_outputs[i], batch.target_outputs[j]);
    const double r = dx - alpha * dy;
    paired += r * r;
  }
  paired /= static_cast<double>(correspondence.size());

  BoundReport rep;
  rep.paired_loss = paired;
  rep.unpaired_loss = unpaired_crossview_loss(batch, mx, my, alpha);
  if (paired > 0.0)
    rep.ratio = rep.unpaired_loss / paired;
  else
    rep.ratio = rep.unpaired_loss > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  return rep;
}

std::string loss_report_json(double loss, std::size_t pair_count, double alpha, double gamma,
                             const Vec& lambdas, const std::vector<std::string>& metric_kinds,
                             double beta) {
  std::ostringstream os;
  os << "{\"alpha\":" << format_real(alpha) << ",\"beta\":" << format_real(beta)
     << ",\"gamma\":" << format_real(gamma) << ",\"lambdas\":[";
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (i) os << ",";
    os << format_real(lambdas[i]);
  }
  os << "],\"loss\":" << format_real(loss) << ",\"metric_kinds\":[";
  for (std::size_t i = 0; i < metric_kinds.size(); ++i) {
    if (i) os << ",";
    os << "\"" << metric_kinds[i] << "\"";
  }
  os << "],\"pair_count\":" << pair_count << "}";
  return os.str();
}

}  // namespace xvt::crossview
