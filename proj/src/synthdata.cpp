#include "xvt/synthdata.hpp"

#include <algorithm>
#include <cmath>

#include "xvt/error.hpp"

namespace xvt::synthdata {

Matrix random_orthogonal(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix q(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    Vec v(d);
    for (double& x : v) x = gauss(rng);
    // modified Gram-Schmidt with one re-orthogonalization pass
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < j; ++k) {
        double proj = 0.0;
        for (std::size_t i = 0; i < d; ++i) proj += q(i, k) * v[i];
        for (std::size_t i = 0; i < d; ++i) v[i] -= proj * q(i, k);
      }
    const double n = norm2(v);
    if (n < 1e-12) throw numerical_failure_error("random_orthogonal: degenerate draw");
    for (std::size_t i = 0; i < d; ++i) q(i, j) = v[i] / n;
  }
  return q;
}

std::pair<grassmann::Subspace, grassmann::Subspace> rotated_subspace_pair(
    std::size_t d, std::size_t n, const Vec& angles, std::uint64_t seed) {
  if (n == 0 || n > d / 2)
    throw dimension_error("rotated_subspace_pair: need 1 <= n <= floor(d/2)");
  if (angles.size() != n)
    throw dimension_error("rotated_subspace_pair: angle count mismatch");
  for (double a : angles)
    if (a < 0.0 || a > 1.5707963267948966 + 1e-12)
      throw invalid_input_error("rotated_subspace_pair: angle outside [0, pi/2]");

  std::mt19937_64 rng(seed);
  Matrix q = random_orthogonal(d, rng);

  Matrix src(d, n), tgt(d, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double c = std::cos(angles[j]);
    const double s = std::sin(angles[j]);
    for (std::size_t i = 0; i < d; ++i) {
      src(i, j) = q(i, j);
      tgt(i, j) = c * q(i, j) + s * q(i, n + j);
    }
  }
  return {grassmann::make_subspace(std::move(src)), grassmann::make_subspace(std::move(tgt))};
}

LabelGrid imbalanced_label_grid(std::size_t h, std::size_t w, const Vec& class_probs,
                                std::uint64_t seed, double color_noise) {
  if (h == 0 || w == 0) throw invalid_input_error("imbalanced_label_grid: empty grid");
  double total = 0.0;
  for (double p : class_probs) {
    if (p < 0.0) throw invalid_input_error("imbalanced_label_grid: negative probability");
    total += p;
  }
  if (class_probs.empty() || std::fabs(total - 1.0) > 1e-9)
    throw invalid_input_error("imbalanced_label_grid: probabilities must sum to 1");

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(class_probs.begin(), class_probs.end());
  std::uniform_real_distribution<double> jitter(-color_noise, color_noise);

  const std::size_t c = class_probs.size();
  std::vector<Vec> base(c, Vec(3, 0.0));
  for (std::size_t k = 0; k < c; ++k) {
    // spread base colors around the RGB cube deterministically
    base[k][0] = std::fmod(0.1 + 0.61803398875 * static_cast<double>(k), 1.0);
    base[k][1] = std::fmod(0.5 + 0.38196601125 * static_cast<double>(k), 1.0);
    base[k][2] = static_cast<double>(k % 2);
  }

  LabelGrid grid;
  grid.labels.assign(h, std::vector<std::size_t>(w, 0));
  grid.colors.assign(h, std::vector<Vec>(w));
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t k = pick(rng);
      grid.labels[i][j] = k;
      Vec color = base[k];
      for (double& v : color) v += jitter(rng);
      grid.colors[i][j] = std::move(color);
    }
  return grid;
}

MixtureData gaussian_mixture(const std::vector<std::size_t>& counts, std::size_t dim,
                             double separation, std::uint64_t seed) {
  if (counts.empty() || dim == 0)
    throw invalid_input_error("gaussian_mixture: need classes and a positive dimension");
  for (std::size_t c : counts)
    if (c < 1) throw invalid_input_error("gaussian_mixture: counts must be >= 1");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  MixtureData data;
  data.means.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    Vec dir(dim);
    for (double& v : dir) v = gauss(rng);
    const double n = norm2(dir);
    data.means[k] = scaled(dir, n > 0.0 ? separation / n : 0.0);
  }
  for (std::size_t k = 0; k < counts.size(); ++k)
    for (std::size_t i = 0; i < counts[k]; ++i) {
      Vec f = data.means[k];
      for (double& v : f) v += gauss(rng);
      data.features.push_back(std::move(f));
      data.labels.push_back(k);
    }
  return data;
}

directed::AttentionGrid chain_attention(std::size_t t, double strength, double noise,
                                        std::uint64_t seed) {
  if (strength <= 0.0) throw invalid_input_error("chain_attention: strength must be > 0");
  if (t < 2) throw invalid_input_error("chain_attention: need t >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix w(t, t);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < t; ++j)
      w(i, j) = (j == i + 1) ? strength : noise * u(rng);
  return directed::make_grid(std::move(w));
}

PairedViews paired_views(const std::vector<Vec>& base_samples, const Matrix& linear_map,
                         const Matrix& output_map, double noise, std::uint64_t seed) {
  if (base_samples.empty()) throw invalid_input_error("paired_views: empty sample set");
  const std::size_t n = base_samples.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Vec> tgt_items(n), tgt_outputs(n);
  PairedViews pv;
  for (const Vec& x : base_samples) {
    pv.batch.source_items.push_back(x);
    pv.batch.source_outputs.push_back(output_map * x);
  }
  for (std::size_t i = 0; i < n; ++i) {
    Vec y = linear_map * base_samples[i];
    for (double& v : y) v += noise * gauss(rng);
    tgt_outputs[i] = output_map * y;
    tgt_items[i] = std::move(y);
  }

  std::vector<std::size_t> slot(n);
  for (std::size_t i = 0; i < n; ++i) slot[i] = i;
  std::shuffle(slot.begin(), slot.end(), rng);

  pv.batch.target_items.resize(n);
  pv.batch.target_outputs.resize(n);
  pv.correspondence.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pv.batch.target_items[slot[i]] = std::move(tgt_items[i]);
    pv.batch.target_outputs[slot[i]] = std::move(tgt_outputs[i]);
    pv.correspondence[i] = slot[i];
  }
  return pv;
}

}  // namespace xvt::synthdata
