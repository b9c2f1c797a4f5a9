#include "xvt/faircluster.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "xvt/error.hpp"

namespace xvt::faircluster {

namespace {

// log of sum_f exp(f . c), max-shifted.
double log_partition(const std::vector<Vec>& features, const Vec& c) {
  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> logits(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    logits[i] = dot(features[i], c);
    m = std::max(m, logits[i]);
  }
  double s = 0.0;
  for (double l : logits) s += std::exp(l - m);
  return m + std::log(s);
}

// Euclidean projection onto the probability simplex.
void project_simplex(Vec& x) {
  Vec u = x;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  std::size_t rho = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      tau = t;
    }
  }
  (void)rho;
  for (double& v : x) v = std::max(v - tau, 0.0);
}

}  // namespace

ClusterModel make_model(std::vector<Vec> centroids, double eta, std::size_t update_period,
                        std::size_t bank_cap, double margin) {
  if (eta <= 0.0 || eta >= 1.0) throw invalid_input_error("make_model: eta must be in (0,1)");
  if (update_period == 0 || bank_cap == 0)
    throw invalid_input_error("make_model: period and bank cap must be positive");
  ClusterModel m;
  m.transitive = centroids;
  m.banks.resize(centroids.size());
  m.frozen.assign(centroids.size(), false);
  m.centroids = std::move(centroids);
  m.eta = eta;
  m.update_period = update_period;
  m.bank_cap = bank_cap;
  m.margin = margin;
  return m;
}

double contrastive_cluster_loss(const std::vector<Vec>& features, const Assignment& assignment,
                                const ClusterModel& model) {
  if (features.empty()) throw invalid_input_error("contrastive_cluster_loss: empty batch");
  if (assignment.of.size() != features.size())
    throw dimension_error("contrastive_cluster_loss: assignment length mismatch");
  std::size_t assigned = 0;
  double loss = 0.0;
  for (std::size_t c = 0; c < model.centroids.size(); ++c) {
    double logz = 0.0;
    bool have_logz = false;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (!assignment.of[i] || *assignment.of[i] != c) continue;
      if (!have_logz) {
        logz = log_partition(features, model.centroids[c]);
        have_logz = true;
      }
      loss += logz - dot(features[i], model.centroids[c]);
      ++assigned;
    }
  }
  for (const auto& a : assignment.of)
    if (a && *a >= model.centroids.size())
      throw invalid_input_error("contrastive_cluster_loss: assigned index out of range");
  if (assigned == 0) throw invalid_input_error("contrastive_cluster_loss: no assigned features");
  return loss;
}

double fairness_cluster_loss(const std::vector<Vec>& features, const Assignment& assignment,
                             const ClusterModel& model, double alpha) {
  if (alpha <= 0.0) throw invalid_input_error("fairness_cluster_loss: alpha must be > 0");
  if (features.empty()) throw invalid_input_error("fairness_cluster_loss: empty batch");
  if (assignment.of.size() != features.size())
    throw dimension_error("fairness_cluster_loss: assignment length mismatch");
  double loss = 0.0;
  for (std::size_t c = 0; c < model.centroids.size(); ++c) {
    const double logz = log_partition(features, model.centroids[c]);
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (!assignment.of[i]) continue;
      if (*assignment.of[i] >= model.centroids.size())
        throw invalid_input_error("fairness_cluster_loss: assigned index out of range");
      if (*assignment.of[i] != c) continue;
      loss += alpha * (logz - dot(features[i], model.centroids[c]));
    }
    loss += logz - dot(model.transitive[c], model.centroids[c]);
  }
  return loss;
}

double enforcement_optimum_oracle(std::optional<double> alpha, std::size_t l_count) {
  if (l_count < 1) throw invalid_input_error("enforcement_optimum_oracle: L must be >= 1");
  if (alpha && *alpha <= 0.0)
    throw invalid_input_error("enforcement_optimum_oracle: alpha must be > 0");

  const std::size_t n = alpha ? l_count + 1 : l_count;
  // objective: sum_i w_i * log x_i on the simplex, w_i = alpha (or 1) for the
  // enforcement slots and 1 for the transitive slot when alpha is present.
  Vec w(n, alpha ? *alpha : 1.0);
  if (alpha) w[n - 1] = 1.0;

  auto objective = [&](const Vec& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] <= 0.0) return -std::numeric_limits<double>::infinity();
      s += w[i] * std::log(x[i]);
    }
    return s;
  };

  Vec x(n, 1.0 / static_cast<double>(n));
  double fx = objective(x);
  bool converged = false;
  for (int iter = 0; iter < 20000 && !converged; ++iter) {
    Vec g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = w[i] / x[i];
    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      Vec y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + step * g[i];
      project_simplex(y);
      const double fy = objective(y);
      if (fy >= fx) {
        double move = 0.0;
        for (std::size_t i = 0; i < n; ++i) move = std::max(move, std::fabs(y[i] - x[i]));
        x = std::move(y);
        if (fy - fx < 1e-15 && move < 1e-12) converged = true;
        fx = fy;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) converged = true;  // no ascent direction left at this scale
  }

  const double expected =
      alpha ? 1.0 / (1.0 / *alpha + static_cast<double>(l_count)) : 1.0 / static_cast<double>(l_count);
  for (std::size_t i = 0; i + (alpha ? 1 : 0) < n; ++i)
    if (std::fabs(x[i] - expected) > 1e-6)
      throw numerical_failure_error("enforcement_optimum_oracle: ascent did not converge");
  return x[0];
}

double hinge_prototype_loss(const std::vector<Vec>& features,
                            const std::vector<std::size_t>& labels, const ClusterModel& model,
                            double delta) {
  if (delta <= 0.0) throw invalid_input_error("hinge_prototype_loss: delta must be > 0");
  if (features.size() != labels.size())
    throw dimension_error("hinge_prototype_loss: label list length mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (labels[i] >= model.centroids.size())
      throw invalid_input_error("hinge_prototype_loss: label out of range");
    for (std::size_t c = 0; c < model.centroids.size(); ++c) {
      const double d = distance(features[i], model.centroids[c]);
      loss += (labels[i] == c) ? d : std::max(0.0, delta - d);
    }
  }
  return loss;
}

void prototype_update(ClusterModel& model,
                      const std::vector<std::vector<Vec>>& features_by_centroid) {
  if (features_by_centroid.size() != model.centroids.size())
    throw dimension_error("prototype_update: group count mismatch");
  for (std::size_t c = 0; c < model.centroids.size(); ++c) {
    for (const Vec& f : features_by_centroid[c]) {
      model.banks[c].push_back(f);
      while (model.banks[c].size() > model.bank_cap) model.banks[c].pop_front();
    }
  }
  ++model.step;
  if (model.step % model.update_period != 0) return;
  for (std::size_t c = 0; c < model.centroids.size(); ++c) {
    if (model.frozen[c] || model.banks[c].empty()) continue;
    Vec mean(model.centroids[c].size(), 0.0);
    for (const Vec& f : model.banks[c]) {
      if (f.size() != mean.size()) throw dimension_error("prototype_update: feature dim mismatch");
      for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += f[k];
    }
    for (double& v : mean) v /= static_cast<double>(model.banks[c].size());
    for (std::size_t k = 0; k < mean.size(); ++k)
      model.centroids[c][k] = model.eta * model.centroids[c][k] + (1.0 - model.eta) * mean[k];
  }
}

double cluster_repulsion(const ClusterModel& model) {
  const std::size_t n = model.centroids.size();
  if (n < 2) return 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double gap = std::max(0.0, 2.0 * model.margin - distance(model.centroids[i], model.centroids[j]));
      loss += gap * gap;
    }
  return loss;
}

std::vector<Vec> unknown_cluster_init(const std::vector<Vec>& unknown_features, double eps,
                                      std::size_t min_pts, double margin) {
  if (eps <= 0.0) throw invalid_input_error("unknown_cluster_init: eps must be > 0");
  if (min_pts < 1) throw invalid_input_error("unknown_cluster_init: min_pts must be >= 1");
  const std::size_t n = unknown_features.size();
  if (n == 0) return {};

  // DBSCAN with the point itself counted in its own neighborhood.
  std::vector<std::vector<std::size_t>> neigh(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (distance(unknown_features[i], unknown_features[j]) <= eps) neigh[i].push_back(j);

  constexpr int kNoise = -1, kUnvisited = -2;
  std::vector<int> label(n, kUnvisited);
  int next_cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    if (neigh[i].size() < min_pts) {
      label[i] = kNoise;
      continue;
    }
    const int cid = next_cluster++;
    label[i] = cid;
    std::vector<std::size_t> frontier = neigh[i];
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const std::size_t p = frontier[f];
      if (label[p] == kNoise) label[p] = cid;
      if (label[p] != kUnvisited) continue;
      label[p] = cid;
      if (neigh[p].size() >= min_pts)
        frontier.insert(frontier.end(), neigh[p].begin(), neigh[p].end());
    }
  }
  if (next_cluster == 0) return {};

  const std::size_t dim = unknown_features[0].size();
  std::vector<Vec> centers(static_cast<std::size_t>(next_cluster), Vec(dim, 0.0));
  std::vector<std::size_t> counts(static_cast<std::size_t>(next_cluster), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] < 0) continue;
    const auto c = static_cast<std::size_t>(label[i]);
    for (std::size_t k = 0; k < dim; ++k) centers[c][k] += unknown_features[i][k];
    ++counts[c];
  }
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (double& v : centers[c]) v /= static_cast<double>(counts[c]);

  // Merge any pair closer than 2*margin; repeat until stable.
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < centers.size() && !merged; ++i)
      for (std::size_t j = i + 1; j < centers.size() && !merged; ++j) {
        if (distance(centers[i], centers[j]) >= 2.0 * margin) continue;
        for (std::size_t k = 0; k < dim; ++k)
          centers[i][k] = 0.5 * (centers[i][k] + centers[j][k]);
        centers.erase(centers.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
  }
  return centers;
}

Assignment assign_nearest(const std::vector<Vec>& features, const ClusterModel& model) {
  if (model.centroids.empty()) throw invalid_input_error("assign_nearest: no centroids");
  Assignment a;
  a.of.resize(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    std::size_t best = 0;
    double best_d = distance(features[i], model.centroids[0]);
    for (std::size_t c = 1; c < model.centroids.size(); ++c) {
      const double d = distance(features[i], model.centroids[c]);
      if (d < best_d) {
        best = c;
        best_d = d;
      }
    }
    a.of[i] = best;
  }
  return a;
}

std::string model_snapshot_json(const ClusterModel& model) {
  auto emit_vecs = [](std::ostringstream& os, const std::vector<Vec>& vs) {
    os << "[";
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (i) os << ",";
      os << "[";
      for (std::size_t k = 0; k < vs[i].size(); ++k) {
        if (k) os << ",";
        os << format_real(vs[i][k]);
      }
      os << "]";
    }
    os << "]";
  };
  std::ostringstream os;
  os << "{\"centroids\":";
  emit_vecs(os, model.centroids);
  os << ",\"eta\":" << format_real(model.eta) << ",\"margin\":" << format_real(model.margin)
     << ",\"transitive\":";
  emit_vecs(os, model.transitive);
  os << ",\"update_period\":" << model.update_period << "}";
  return os.str();
}

}  // namespace xvt::faircluster
