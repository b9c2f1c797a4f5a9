#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "xvt/matrix.hpp"

namespace xvt::fairmetrics {

/// C x C counts; entry (i, j) = pixels of true class i predicted as class j.
struct ConfusionMatrix {
  std::size_t num_classes = 0;
  std::vector<std::uint64_t> counts;  // row-major

  explicit ConfusionMatrix(std::size_t c) : num_classes(c), counts(c * c, 0) {}
  std::uint64_t& at(std::size_t t, std::size_t p) { return counts[t * num_classes + p]; }
  std::uint64_t at(std::size_t t, std::size_t p) const { return counts[t * num_classes + p]; }
};

struct IouStats {
  std::vector<std::optional<double>> per_class_iou;  // nullopt when union is zero
  double miou = 0.0;
  double iou_std = 0.0;  // population STD over included classes
};

IouStats iou_stats(const ConfusionMatrix& cm);

/// Sum over ordered class pairs of |L_i - L_j|.
double fairness_gap(const Vec& per_class_loss);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// lhs = fairness_gap, rhs = 2C * sum of losses, holds = lhs <= rhs + 1e-12.
BoundCheck fairness_bound_check(const Vec& per_class_loss);

/// w_c = log(q_c / p_c) with a 1e-12 floor on p; q defaults to uniform.
Vec class_balance_weight(const Vec& p, const std::optional<Vec>& q = std::nullopt,
                         double floor = 1e-12);

/// Sum over pixels and window neighbors of
/// exp(-||dcolor||^2 / 2 sigma1^2 - ||dpred||^2 / 2 sigma2^2), ordered pairs.
double structural_consistency_energy(const std::vector<std::vector<Vec>>& colors,
                                     const std::vector<std::vector<Vec>>& predictions,
                                     double sigma1, double sigma2, int window = 1);

struct ClassGradient {
  std::vector<std::optional<double>> mean_magnitude;  // nullopt when class absent
  Vec total_mass;                                     // count-weighted sum
};

/// Mean |softmax_c - 1| over pixels of true class c (the analytic CE gradient
/// magnitude at the true-class logit).
ClassGradient per_class_gradient_magnitude(const std::vector<std::vector<Vec>>& logits,
                                           const std::vector<std::vector<std::size_t>>& labels);

/// JSON: {balance_weights[], bound_holds, fairness_gap, iou_std, miou,
/// per_class_iou[]} with null for excluded classes.
std::string fairness_report_json(const IouStats& stats, double gap, bool bound_holds,
                                 const Vec& balance_weights);

}  // namespace xvt::fairmetrics
