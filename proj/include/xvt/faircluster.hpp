#pragma once

#include <deque>
#include <optional>
#include <string>

#include "xvt/matrix.hpp"

namespace xvt::faircluster {

/// Cluster state: centroids with per-centroid transitive vectors, bounded
/// FIFO feature banks, momentum update schedule, and freeze flags.
struct ClusterModel {
  std::vector<Vec> centroids;
  std::vector<Vec> transitive;  // one per centroid, initialized at the centroid
  std::vector<std::deque<Vec>> banks;
  std::vector<bool> frozen;
  double eta = 0.99;
  std::size_t update_period = 100;
  std::size_t bank_cap = 500;
  double margin = 10.0;
  std::size_t step = 0;  // update-call counter driving the period
};

ClusterModel make_model(std::vector<Vec> centroids, double eta = 0.99,
                        std::size_t update_period = 100, std::size_t bank_cap = 500,
                        double margin = 10.0);

/// Feature index -> centroid index, or unassigned.
struct Assignment {
  std::vector<std::optional<std::size_t>> of;
};

/// Softmax contrastive clustering loss: for each centroid c and each feature
/// assigned to it, -log(exp(f.c) / sum over all batch features f' of exp(f'.c)).
double contrastive_cluster_loss(const std::vector<Vec>& features, const Assignment& assignment,
                                const ClusterModel& model);

/// Fairness variant: per centroid, -alpha * sum of assigned log-softmax terms
/// minus the transitive-vector log-softmax term.
double fairness_cluster_loss(const std::vector<Vec>& features, const Assignment& assignment,
                             const ClusterModel& model, double alpha);

/// Maximizes the enforcement objective over the simplex by projected gradient
/// ascent and returns the common per-slot optimum. Without alpha the optimum
/// is 1/L; with alpha it is 1/(1/alpha + L).
double enforcement_optimum_oracle(std::optional<double> alpha, std::size_t l_count);

/// Prototype hinge loss: pull to the own prototype, push others beyond delta.
double hinge_prototype_loss(const std::vector<Vec>& features,
                            const std::vector<std::size_t>& labels, const ClusterModel& model,
                            double delta);

/// Pushes grouped features into the banks and, when a centroid's period is
/// due, applies c <- eta*c + (1-eta)*mean(bank). Frozen centroids never move.
void prototype_update(ClusterModel& model,
                      const std::vector<std::vector<Vec>>& features_by_centroid);

/// Sum over unordered distinct centroid pairs of max(0, 2*margin - dist)^2.
double cluster_repulsion(const ClusterModel& model);

/// DBSCAN over the features (noise discarded), then merge centroid pairs
/// closer than 2*margin (center = mean of the two) until a fixpoint.
std::vector<Vec> unknown_cluster_init(const std::vector<Vec>& unknown_features, double eps,
                                      std::size_t min_pts, double margin);

/// Nearest-centroid assignment; ties go to the lowest centroid index.
Assignment assign_nearest(const std::vector<Vec>& features, const ClusterModel& model);

/// JSON snapshot of the model; feature banks are omitted.
std::string model_snapshot_json(const ClusterModel& model);

}  // namespace xvt::faircluster
