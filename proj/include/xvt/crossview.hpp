#pragma once

#include <functional>
#include <optional>
#include <string>

#include "xvt/grassmann.hpp"

namespace xvt::crossview {

enum class ZeroPolicy { error, saturate };

/// Geodesic cosine distance D = 1 - a'Qb / sqrt((a'Qa)(b'Qb)), clamped to
/// [0, 2]. A Q-norm at or below 1e-12 * ||Q||_F * ||a||^2 is degenerate:
/// error by default, D = 1 under saturate.
double geodesic_distance(const Vec& a, const Vec& b, const grassmann::GeodesicKernel& kernel,
                         ZeroPolicy zero_policy = ZeroPolicy::error);

using Embedding = std::function<Vec(const Vec&)>;

/// min(||G(a) - G(b)||^2, beta) for an embedding G (identity allowed).
double deep_euclidean_metric(const Vec& a, const Vec& b, const Embedding& embedding,
                             double beta);

/// Symmetrized KL between probability vectors after epsilon-smoothing and
/// renormalization, clamped at beta.
double symmetric_kl_metric(const Vec& p, const Vec& q, double epsilon = 1e-12,
                           double beta = 200.0);

/// A pairwise distance with a kind tag for reporting.
struct MetricSpec {
  std::string kind;
  std::function<double(const Vec&, const Vec&)> fn;
  std::optional<double> clamp;

  double operator()(const Vec& a, const Vec& b) const;
};

MetricSpec geodesic_cosine_metric(const grassmann::GeodesicKernel& kernel,
                                  ZeroPolicy zero_policy = ZeroPolicy::error);
MetricSpec deep_euclidean_spec(Embedding embedding, double beta);
MetricSpec symmetric_kl_spec(double epsilon = 1e-12, double beta = 200.0);

/// Unpaired minibatch from two views; items and outputs are index-aligned
/// within a view but carry no cross-view correspondence.
struct CrossViewBatch {
  std::vector<Vec> source_items;
  std::vector<Vec> target_items;
  std::vector<Vec> source_outputs;
  std::vector<Vec> target_outputs;
};

void validate_batch(const CrossViewBatch& batch);

/// Mean over the full cross product of (Dx(xs_i, xt_j) - alpha * Dy(ys_i, yt_j))^2.
double unpaired_crossview_loss(const CrossViewBatch& batch, const MetricSpec& mx,
                               const MetricSpec& my, double alpha);

/// Adds the prompt branch: per pair,
/// lambda_i * (Dx - alpha*Dy)^2 + lambda_p * (Dp - gamma*Dy)^2, averaged.
double combined_prompt_loss(const CrossViewBatch& batch, const std::vector<Vec>& prompt_src,
                            const std::vector<Vec>& prompt_tgt, const MetricSpec& mx,
                            const MetricSpec& my, const MetricSpec& mp, double alpha,
                            double gamma, double lambda_i, double lambda_p);

/// Cross-view self-attention loss:
/// lambda * mean over cross pairs of (Dx(x_s, x_t) - alpha * Da(a_s, a_t))^2
/// with Dx = deep Euclidean and Da = symmetrized KL, both beta-clamped.
double cvar_selfattention_loss(const CrossViewBatch& video_pairs,
                               const std::vector<Vec>& attn_src,
                               const std::vector<Vec>& attn_tgt, const Embedding& embedding,
                               double alpha, double lambda, double beta);

/// Sliced Gromov-Wasserstein: average over seeded projections of the 1-D GW
/// cost (squared-difference intra-distance loss) under the better of the
/// sorted-identity and sorted-reversed couplings. Projection directions are
/// drawn as normalized differences of a shared random point pair so the value
/// is invariant under a rigid motion applied to one set.
double sliced_gw_alignment(const std::vector<Vec>& set_a, const std::vector<Vec>& set_b,
                           std::size_t n_projections = 64, std::uint64_t seed = 0);

/// The 1-D GW cost used per projection; exposed for oracle tests.
double gw_cost_1d(const Vec& u, const Vec& v);

struct BoundReport {
  double paired_loss = 0.0;
  double unpaired_loss = 0.0;
  double ratio = 1.0;
};

/// Compares the matched-pair loss against the full cross-product loss on a
/// batch with known correspondence; purely diagnostic.
BoundReport paired_vs_unpaired_bound_report(const CrossViewBatch& batch,
                                            const std::vector<std::size_t>& correspondence,
                                            const MetricSpec& mx, const MetricSpec& my,
                                            double alpha);

/// JSON: {alpha, beta, gamma, lambdas[], loss, metric_kinds[], pair_count}.
std::string loss_report_json(double loss, std::size_t pair_count, double alpha, double gamma,
                             const Vec& lambdas, const std::vector<std::string>& metric_kinds,
                             double beta);

}  // namespace xvt::crossview
