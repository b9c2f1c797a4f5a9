#pragma once

#include <cstdint>
#include <string>

#include "xvt/matrix.hpp"

namespace xvt::directed {

/// T x T temporal attention; entry (t, t') is the attention of query frame t
/// to key frame t'.
struct AttentionGrid {
  Matrix weights;

  std::size_t frames() const { return weights.rows(); }
};

AttentionGrid make_grid(Matrix weights);

/// Average of an S x T x T spatial stack down to one T x T grid.
AttentionGrid average_spatial(const std::vector<AttentionGrid>& stack);

/// Entry (t, t') = cos(q_t / sqrt(D), k_t'). The divisor is inert under
/// cosine; it is kept to match the defining expression.
AttentionGrid directed_cosine_attention(const std::vector<Vec>& queries,
                                        const std::vector<Vec>& keys, std::size_t scale_dim);

struct Permutation {
  std::vector<std::size_t> order;  // 0-based positions
};

Permutation identity_permutation(std::size_t t);

/// (1 / (L*N*T^2)) * sum over grids and index pairs of (1 - a) * sign, with
/// sign = +1 when order[t] < order[t'] and -1 otherwise. The diagonal is
/// included by default, matching the literal summation bounds.
double guided_order_loss(const std::vector<AttentionGrid>& grids, const Permutation& order,
                         bool include_diagonal = true);

struct RecoveredOrder {
  Permutation order;
  double path_weight = 0.0;
};

/// Maximum-total-weight Hamiltonian path with free endpoints by Held-Karp
/// subset DP; ties broken lexicographically by path sequence. T <= 16.
RecoveredOrder recover_order(const AttentionGrid& grid);

/// LCS(recovered, truth) / T * 100.
double order_accuracy(const Permutation& recovered, const Permutation& truth);

/// Greedy seeded selection of distinct permutations keeping the maximum
/// pairwise Hamming distance of the set as small as possible.
std::vector<Permutation> min_hamming_permutations(std::size_t t, std::size_t how_many,
                                                  std::uint64_t seed,
                                                  std::size_t candidate_pool = 64);

std::size_t hamming(const Permutation& a, const Permutation& b);

/// JSON: {T, order_accuracy, path_weight, recovered[], truth[]}.
std::string order_report_json(std::size_t t, const Permutation& recovered,
                              const Permutation& truth, double accuracy, double path_weight);

}  // namespace xvt::directed
