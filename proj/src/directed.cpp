#include "xvt/directed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "xvt/error.hpp"

namespace xvt::directed {

AttentionGrid make_grid(Matrix weights) {
  if (weights.rows() != weights.cols() || weights.rows() < 2)
    throw dimension_error("AttentionGrid: need a square T x T grid with T >= 2");
  if (!weights.all_finite()) throw invalid_input_error("AttentionGrid: non-finite entry");
  return AttentionGrid{std::move(weights)};
}

AttentionGrid average_spatial(const std::vector<AttentionGrid>& stack) {
  if (stack.empty()) throw invalid_input_error("average_spatial: empty stack");
  Matrix acc = stack[0].weights;
  for (std::size_t s = 1; s < stack.size(); ++s) {
    if (stack[s].frames() != stack[0].frames())
      throw dimension_error("average_spatial: inconsistent T");
    acc += stack[s].weights;
  }
  acc *= 1.0 / static_cast<double>(stack.size());
  return AttentionGrid{std::move(acc)};
}

AttentionGrid directed_cosine_attention(const std::vector<Vec>& queries,
                                        const std::vector<Vec>& keys, std::size_t scale_dim) {
  const std::size_t t = queries.size();
  if (t < 2 || keys.size() != t)
    throw dimension_error("directed_cosine_attention: need T >= 2 queries and T keys");
  if (scale_dim == 0) throw invalid_input_error("directed_cosine_attention: zero scale_dim");
  const double root_d = std::sqrt(static_cast<double>(scale_dim));
  Matrix w(t, t);
  for (std::size_t i = 0; i < t; ++i) {
    const Vec q = scaled(queries[i], 1.0 / root_d);
    const double nq = norm2(q);
    if (nq <= 0.0) throw invalid_input_error("directed_cosine_attention: zero-norm query");
    for (std::size_t j = 0; j < t; ++j) {
      const double nk = norm2(keys[j]);
      if (nk <= 0.0) throw invalid_input_error("directed_cosine_attention: zero-norm key");
      w(i, j) = std::clamp(dot(q, keys[j]) / (nq * nk), -1.0, 1.0);
    }
  }
  return AttentionGrid{std::move(w)};
}

Permutation identity_permutation(std::size_t t) {
  Permutation p;
  p.order.resize(t);
  for (std::size_t i = 0; i < t; ++i) p.order[i] = i;
  return p;
}

namespace {

void check_permutation(const Permutation& p, std::size_t t) {
  if (p.order.size() != t) throw invalid_input_error("permutation: length mismatch");
  std::vector<bool> seen(t, false);
  for (std::size_t v : p.order) {
    if (v >= t || seen[v]) throw invalid_input_error("permutation: not a bijection");
    seen[v] = true;
  }
}

}  // namespace

double guided_order_loss(const std::vector<AttentionGrid>& grids, const Permutation& order,
                         bool include_diagonal) {
  if (grids.empty()) throw invalid_input_error("guided_order_loss: no grids");
  const std::size_t t = grids[0].frames();
  check_permutation(order, t);
  double acc = 0.0;
  for (const AttentionGrid& g : grids) {
    if (g.frames() != t) throw invalid_input_error("guided_order_loss: inconsistent T");
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < t; ++j) {
        if (!include_diagonal && i == j) continue;
        const double sign = order.order[i] < order.order[j] ? 1.0 : -1.0;
        acc += (1.0 - g.weights(i, j)) * sign;
      }
  }
  return acc / (static_cast<double>(grids.size()) * static_cast<double>(t) * static_cast<double>(t));
}

RecoveredOrder recover_order(const AttentionGrid& grid) {
  const std::size_t t = grid.frames();
  if (t > 16) throw invalid_input_error("recover_order: T > 16 exceeds the exact-DP limit");

  // g[S][j]: best weight of a path that starts at j and visits exactly the
  // frames in S. Sums are built right to left so the brute-force oracle can
  // reproduce ties bit for bit.
  const std::size_t full = (std::size_t{1} << t) - 1;
  std::vector<std::vector<double>> g(full + 1, std::vector<double>(t, -std::numeric_limits<double>::infinity()));
  for (std::size_t j = 0; j < t; ++j) g[std::size_t{1} << j][j] = 0.0;

  for (std::size_t s = 1; s <= full; ++s) {
    for (std::size_t j = 0; j < t; ++j) {
      if (!(s & (std::size_t{1} << j))) continue;
      const std::size_t rest = s & ~(std::size_t{1} << j);
      if (rest == 0) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < t; ++k) {
        if (!(rest & (std::size_t{1} << k))) continue;
        const double cand = grid.weights(j, k) + g[rest][k];
        if (cand > best) best = cand;
      }
      g[s][j] = best;
    }
  }

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < t; ++j) best = std::max(best, g[full][j]);

  RecoveredOrder out;
  out.path_weight = best;
  out.order.order.reserve(t);
  std::size_t s = full;
  std::size_t cur = t;
  for (std::size_t j = 0; j < t; ++j)
    if (g[full][j] == best) {
      cur = j;
      break;
    }
  out.order.order.push_back(cur);
  while (out.order.order.size() < t) {
    const std::size_t rest = s & ~(std::size_t{1} << cur);
    for (std::size_t k = 0; k < t; ++k) {
      if (!(rest & (std::size_t{1} << k))) continue;
      if (grid.weights(cur, k) + g[rest][k] == g[s][cur]) {
        s = rest;
        cur = k;
        out.order.order.push_back(k);
        break;
      }
    }
  }
  return out;
}

double order_accuracy(const Permutation& recovered, const Permutation& truth) {
  const std::size_t t = recovered.order.size();
  check_permutation(recovered, t);
  check_permutation(truth, t);
  std::vector<std::vector<std::size_t>> dp(t + 1, std::vector<std::size_t>(t + 1, 0));
  for (std::size_t i = 1; i <= t; ++i)
    for (std::size_t j = 1; j <= t; ++j)
      dp[i][j] = recovered.order[i - 1] == truth.order[j - 1]
                     ? dp[i - 1][j - 1] + 1
                     : std::max(dp[i - 1][j], dp[i][j - 1]);
  return static_cast<double>(dp[t][t]) / static_cast<double>(t) * 100.0;
}

std::size_t hamming(const Permutation& a, const Permutation& b) {
  if (a.order.size() != b.order.size()) throw dimension_error("hamming: length mismatch");
  std::size_t h = 0;
  for (std::size_t i = 0; i < a.order.size(); ++i) h += a.order[i] != b.order[i];
  return h;
}

std::vector<Permutation> min_hamming_permutations(std::size_t t, std::size_t how_many,
                                                  std::uint64_t seed,
                                                  std::size_t candidate_pool) {
  if (t < 2) throw invalid_input_error("min_hamming_permutations: need t >= 2");
  if (how_many == 0) return {};
  std::mt19937_64 rng(seed);
  auto draw = [&] {
    Permutation p = identity_permutation(t);
    std::shuffle(p.order.begin(), p.order.end(), rng);
    return p;
  };

  std::set<std::vector<std::size_t>> chosen;
  std::vector<Permutation> out;
  Permutation first = draw();
  chosen.insert(first.order);
  out.push_back(std::move(first));

  while (out.size() < how_many) {
    std::vector<Permutation> pool;
    std::size_t attempts = 0;
    while (pool.size() < candidate_pool && attempts < 20000) {
      ++attempts;
      Permutation c = draw();
      if (chosen.count(c.order)) continue;
      pool.push_back(std::move(c));
    }
    if (pool.empty())
      throw numerical_failure_error("min_hamming_permutations: candidate stream exhausted");
    std::size_t best_idx = 0;
    std::size_t best_score = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      std::size_t score = 0;
      for (const Permutation& s : out) score = std::max(score, hamming(pool[i], s));
      if (score < best_score ||
          (score == best_score && pool[i].order < pool[best_idx].order)) {
        best_score = score;
        best_idx = i;
      }
    }
    chosen.insert(pool[best_idx].order);
    out.push_back(std::move(pool[best_idx]));
  }
  return out;
}

std::string order_report_json(std::size_t t, const Permutation& recovered,
                              const Permutation& truth, double accuracy, double path_weight) {
  auto emit = [](std::ostringstream& os, const Permutation& p) {
    os << "[";
    for (std::size_t i = 0; i < p.order.size(); ++i) {
      if (i) os << ",";
      os << p.order[i];
    }
    os << "]";
  };
  std::ostringstream os;
  os << "{\"T\":" << t << ",\"order_accuracy\":" << format_real(accuracy)
     << ",\"path_weight\":" << format_real(path_weight) << ",\"recovered\":";
  emit(os, recovered);
  os << ",\"truth\":";
  emit(os, truth);
  os << "}";
  return os.str();
}

}  // namespace xvt::directed
