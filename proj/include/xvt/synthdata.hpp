#pragma once

#include <cstdint>
#include <random>

#include "xvt/crossview.hpp"
#include "xvt/directed.hpp"
#include "xvt/grassmann.hpp"

namespace xvt::synthdata {

/// Random orthogonal matrix (Haar via QR of a Gaussian draw).
Matrix random_orthogonal(std::size_t d, std::mt19937_64& rng);

/// Subspace pair with exactly the prescribed principal angles, built by
/// rotating each basis column into a disjoint complement plane; needs
/// n <= floor(d/2).
std::pair<grassmann::Subspace, grassmann::Subspace> rotated_subspace_pair(
    std::size_t d, std::size_t n, const Vec& angles, std::uint64_t seed);

struct LabelGrid {
  std::vector<std::vector<std::size_t>> labels;
  std::vector<std::vector<Vec>> colors;
};

/// I.i.d. labels by class_probs with per-class base colors plus noise.
LabelGrid imbalanced_label_grid(std::size_t h, std::size_t w, const Vec& class_probs,
                                std::uint64_t seed, double color_noise = 0.05);

struct MixtureData {
  std::vector<Vec> features;
  std::vector<std::size_t> labels;
  std::vector<Vec> means;
};

/// Class means at separation * unit directions; unit-variance isotropic noise.
MixtureData gaussian_mixture(const std::vector<std::size_t>& counts, std::size_t dim,
                             double separation, std::uint64_t seed);

/// Weight `strength` on edges (i -> i+1), uniform noise elsewhere.
directed::AttentionGrid chain_attention(std::size_t t, double strength, double noise,
                                        std::uint64_t seed);

struct PairedViews {
  crossview::CrossViewBatch batch;
  std::vector<std::size_t> correspondence;  // source index i matches target correspondence[i]
};

/// Target items = linear_map * source + noise; outputs via output_map; the
/// target side is shuffled and the shuffle recorded as the correspondence.
PairedViews paired_views(const std::vector<Vec>& base_samples, const Matrix& linear_map,
                         const Matrix& output_map, double noise, std::uint64_t seed);

}  // namespace xvt::synthdata
