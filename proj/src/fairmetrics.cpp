#include "xvt/fairmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xvt/error.hpp"

namespace xvt::fairmetrics {

IouStats iou_stats(const ConfusionMatrix& cm) {
  const std::size_t c = cm.num_classes;
  IouStats st;
  st.per_class_iou.resize(c);
  Vec included;
  for (std::size_t k = 0; k < c; ++k) {
    std::uint64_t tp = cm.at(k, k), fp = 0, fn = 0;
    for (std::size_t j = 0; j < c; ++j) {
      if (j == k) continue;
      fn += cm.at(k, j);
      fp += cm.at(j, k);
    }
    const std::uint64_t uni = tp + fp + fn;
    if (uni == 0) continue;
    const double iou = static_cast<double>(tp) / static_cast<double>(uni);
    st.per_class_iou[k] = iou;
    included.push_back(iou);
  }
  if (included.empty()) throw invalid_input_error("iou_stats: all class unions are zero");
  double mean = 0.0;
  for (double v : included) mean += v;
  mean /= static_cast<double>(included.size());
  double var = 0.0;
  for (double v : included) var += (v - mean) * (v - mean);
  var /= static_cast<double>(included.size());
  st.miou = mean;
  st.iou_std = std::sqrt(var);
  return st;
}

double fairness_gap(const Vec& per_class_loss) {
  for (double v : per_class_loss)
    if (v < 0.0) throw invalid_input_error("fairness_gap: negative loss");
  double gap = 0.0;
  for (std::size_t i = 0; i < per_class_loss.size(); ++i)
    for (std::size_t j = 0; j < per_class_loss.size(); ++j)
      gap += std::fabs(per_class_loss[i] - per_class_loss[j]);
  return gap;
}

BoundCheck fairness_bound_check(const Vec& per_class_loss) {
  BoundCheck bc;
  bc.lhs = fairness_gap(per_class_loss);
  double total = 0.0;
  for (double v : per_class_loss) total += v;
  bc.rhs = 2.0 * static_cast<double>(per_class_loss.size()) * total;
  bc.holds = bc.lhs <= bc.rhs + 1e-12;
  return bc;
}

Vec class_balance_weight(const Vec& p, const std::optional<Vec>& q, double floor) {
  if (p.empty()) throw invalid_input_error("class_balance_weight: empty distribution");
  if (q && q->size() != p.size())
    throw dimension_error("class_balance_weight: distribution size mismatch");
  const double uniform = 1.0 / static_cast<double>(p.size());
  Vec w(p.size());
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (p[c] < 0.0) throw invalid_input_error("class_balance_weight: negative probability");
    const double pc = std::max(p[c], floor);
    const double qc = q ? std::max((*q)[c], floor) : uniform;
    w[c] = std::log(qc / pc);
  }
  return w;
}

double structural_consistency_energy(const std::vector<std::vector<Vec>>& colors,
                                     const std::vector<std::vector<Vec>>& predictions,
                                     double sigma1, double sigma2, int window) {
  if (sigma1 <= 0.0 || sigma2 <= 0.0)
    throw invalid_input_error("structural_consistency_energy: sigmas must be > 0");
  const std::size_t h = colors.size();
  if (h == 0 || predictions.size() != h)
    throw invalid_input_error("structural_consistency_energy: grid shape mismatch");
  const std::size_t w = colors[0].size();
  for (std::size_t i = 0; i < h; ++i)
    if (colors[i].size() != w || predictions[i].size() != w)
      throw invalid_input_error("structural_consistency_energy: grid shape mismatch");

  double energy = 0.0;
  const double inv1 = 1.0 / (2.0 * sigma1 * sigma1);
  const double inv2 = 1.0 / (2.0 * sigma2 * sigma2);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      for (int di = -window; di <= window; ++di)
        for (int dj = -window; dj <= window; ++dj) {
          if (di == 0 && dj == 0) continue;
          const auto ni = static_cast<std::ptrdiff_t>(i) + di;
          const auto nj = static_cast<std::ptrdiff_t>(j) + dj;
          if (ni < 0 || nj < 0 || ni >= static_cast<std::ptrdiff_t>(h) ||
              nj >= static_cast<std::ptrdiff_t>(w))
            continue;
          const Vec dc = sub(colors[i][j], colors[static_cast<std::size_t>(ni)][static_cast<std::size_t>(nj)]);
          const Vec dp = sub(predictions[i][j],
                             predictions[static_cast<std::size_t>(ni)][static_cast<std::size_t>(nj)]);
          energy += std::exp(-dot(dc, dc) * inv1 - dot(dp, dp) * inv2);
        }
  return energy;
}

ClassGradient per_class_gradient_magnitude(const std::vector<std::vector<Vec>>& logits,
                                           const std::vector<std::vector<std::size_t>>& labels) {
  const std::size_t h = logits.size();
  if (h == 0 || labels.size() != h)
    throw invalid_input_error("per_class_gradient_magnitude: grid shape mismatch");
  const std::size_t c = logits[0][0].size();
  Vec sum(c, 0.0);
  std::vector<std::size_t> count(c, 0);
  for (std::size_t i = 0; i < h; ++i) {
    if (labels[i].size() != logits[i].size())
      throw invalid_input_error("per_class_gradient_magnitude: grid shape mismatch");
    for (std::size_t j = 0; j < logits[i].size(); ++j) {
      const Vec& z = logits[i][j];
      if (z.size() != c)
        throw invalid_input_error("per_class_gradient_magnitude: logit length mismatch");
      const std::size_t y = labels[i][j];
      if (y >= c) throw invalid_input_error("per_class_gradient_magnitude: label out of range");
      double m = z[0];
      for (double v : z) m = std::max(m, v);
      double denom = 0.0;
      for (double v : z) denom += std::exp(v - m);
      const double p_true = std::exp(z[y] - m) / denom;
      sum[y] += std::fabs(p_true - 1.0);
      ++count[y];
    }
  }
  ClassGradient g;
  g.mean_magnitude.resize(c);
  g.total_mass = sum;
  for (std::size_t k = 0; k < c; ++k)
    if (count[k] > 0) g.mean_magnitude[k] = sum[k] / static_cast<double>(count[k]);
  return g;
}

std::string fairness_report_json(const IouStats& stats, double gap, bool bound_holds,
                                 const Vec& balance_weights) {
  std::ostringstream os;
  os << "{\"balance_weights\":[";
  for (std::size_t i = 0; i < balance_weights.size(); ++i) {
    if (i) os << ",";
    os << format_real(balance_weights[i]);
  }
  os << "],\"bound_holds\":" << (bound_holds ? "true" : "false")
     << ",\"fairness_gap\":" << format_real(gap)
     << ",\"iou_std\":" << format_real(stats.iou_std)
     << ",\"miou\":" << format_real(stats.miou) << ",\"per_class_iou\":[";
  for (std::size_t i = 0; i < stats.per_class_iou.size(); ++i) {
    if (i) os << ",";
    if (stats.per_class_iou[i])
      os << format_real(*stats.per_class_iou[i]);
    else
      os << "null";
  }
  os << "]}";
  return os.str();
}

}  // namespace xvt::fairmetrics
