#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "xvt/crossview.hpp"
#include "xvt/synthdata.hpp"

using namespace xvt;
using namespace xvt::crossview;

namespace {

constexpr double kPi = 3.14159265358979323846;

grassmann::GeodesicKernel planar_kernel() {
  Matrix ps(2, 1);
  ps(0, 0) = 1.0;
  Matrix pt(2, 1);
  pt(1, 0) = 1.0;
  return grassmann::gfk_between(grassmann::make_subspace(ps), grassmann::make_subspace(pt));
}

grassmann::GeodesicKernel identity_like_kernel() {
  // kernel whose Q is proportional to a projector wide enough to act on e1/e2
  auto [src, tgt] = synthdata::rotated_subspace_pair(4, 2, {0.0, 0.0}, 9);
  return grassmann::gfk_between(src, tgt);
}

CrossViewBatch random_batch(std::size_t n_src, std::size_t n_tgt, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  CrossViewBatch b;
  auto vec = [&](std::size_t d) {
    Vec v(d);
    for (double& x : v) x = g(rng);
    return v;
  };
  for (std::size_t i = 0; i < n_src; ++i) {
    b.source_items.push_back(vec(5));
    b.source_outputs.push_back(vec(3));
  }
  for (std::size_t j = 0; j < n_tgt; ++j) {
    b.target_items.push_back(vec(5));
    b.target_outputs.push_back(vec(3));
  }
  return b;
}

}  // namespace

TEST_CASE("geodesic distance basics") {
  auto kernel = identity_like_kernel();
  Vec a = {1.0, 0.5, -0.2, 0.1};
  CHECK(geodesic_distance(a, a, kernel) == doctest::Approx(0.0).epsilon(1e-12));

  auto planar = planar_kernel();
  const double d = geodesic_distance({1.0, 0.0}, {0.0, 1.0}, planar);
  CHECK(d == doctest::Approx(1.0 - 2.0 / kPi).epsilon(1e-12));
  CHECK(std::fabs(d - 0.363380) < 1e-6);
}

TEST_CASE("geodesic distance symmetry, scale invariance and range") {
  auto planar = planar_kernel();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    Vec a = {g(rng), g(rng)}, b = {g(rng), g(rng)};
    const double dab = geodesic_distance(a, b, planar);
    CHECK(dab == doctest::Approx(geodesic_distance(b, a, planar)).epsilon(1e-12));
    CHECK(dab == doctest::Approx(geodesic_distance(scaled(a, 2.5), b, planar)).epsilon(1e-10));
    CHECK(dab >= 0.0);
    CHECK(dab <= 2.0);
  }
}

TEST_CASE("geodesic distance degenerate-norm policy") {
  auto kernel = identity_like_kernel();
  // vector orthogonal to the projector's span has zero Q-norm
  Matrix r = linalg::orthonormal_complement(kernel.source.basis);
  Vec dead = r.col(0);
  Vec alive = kernel.source.basis.col(0);
  CHECK_THROWS_AS(geodesic_distance(dead, alive, kernel), numerical_failure_error);
  CHECK(geodesic_distance(dead, alive, kernel, ZeroPolicy::saturate) == 1.0);
}

TEST_CASE("deep euclidean metric") {
  CHECK(deep_euclidean_metric({1.0, 2.0}, {1.0, 2.0}, nullptr, 200.0) == 0.0);
  CHECK(deep_euclidean_metric({0.0, 0.0}, {3.0, 4.0}, nullptr, 200.0) == doctest::Approx(25.0));
  CHECK(deep_euclidean_metric({0.0}, {30.0}, nullptr, 200.0) == 200.0);  // raw 900 clamped
  Embedding bad = [](const Vec& v) { return v.size() == 1 ? Vec{1.0, 2.0} : Vec{1.0}; };
  CHECK_THROWS_AS(deep_euclidean_metric({0.0}, {1.0, 2.0}, bad, 200.0), invalid_input_error);
}

TEST_CASE("symmetric kl metric") {
  CHECK(symmetric_kl_metric({0.5, 0.5}, {0.5, 0.5}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(symmetric_kl_metric({0.75, 0.25}, {0.25, 0.75}) ==
        doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-10));
  // smoothing guards exact zeros
  const double v = symmetric_kl_metric({1.0, 0.0}, {0.5, 0.5});
  CHECK(std::isfinite(v));
  CHECK(v > 0.0);
  // symmetry
  CHECK(symmetric_kl_metric({0.3, 0.7}, {0.6, 0.4}) ==
        doctest::Approx(symmetric_kl_metric({0.6, 0.4}, {0.3, 0.7})).epsilon(1e-15));
  CHECK_THROWS_AS(symmetric_kl_metric({-0.1, 1.1}, {0.5, 0.5}), invalid_input_error);
  CHECK_THROWS_AS(symmetric_kl_metric({0.6, 0.6}, {0.5, 0.5}), invalid_input_error);
  // clamp
  CHECK(symmetric_kl_metric({1.0, 0.0}, {0.0, 1.0}, 1e-12, 5.0) == 5.0);
}

TEST_CASE("unpaired loss: zero, hand value, brute force") {
  MetricSpec deep = deep_euclidean_spec(nullptr, 200.0);

  CrossViewBatch same;
  same.source_items = {{0.5}, {1.5}};
  same.target_items = {{0.25}, {2.0}};
  same.source_outputs = same.source_items;
  same.target_outputs = same.target_items;
  CHECK(unpaired_crossview_loss(same, deep, deep, 1.0) == doctest::Approx(0.0));

  CrossViewBatch single;
  single.source_items = {{0.0}};
  single.target_items = {{std::sqrt(0.8)}};
  single.source_outputs = {{0.0}};
  single.target_outputs = {{std::sqrt(0.2)}};
  CHECK(unpaired_crossview_loss(single, deep, deep, 1.5) == doctest::Approx(0.25).epsilon(1e-12));

  CrossViewBatch batch = random_batch(5, 7, 21);
  const double loss = unpaired_crossview_loss(batch, deep, deep, 1.5);
  double brute = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 7; ++j) {
      const double dx = deep(batch.source_items[i], batch.target_items[j]);
      const double dy = deep(batch.source_outputs[i], batch.target_outputs[j]);
      brute += (dx - 1.5 * dy) * (dx - 1.5 * dy);
    }
  brute /= 35.0;
  CHECK(std::fabs(loss - brute) < 1e-12);
  CHECK_THROWS_AS(unpaired_crossview_loss(batch, deep, deep, 0.0), invalid_input_error);
}

TEST_CASE("coordinate descent on a free target output decreases the loss surface") {
  MetricSpec deep = deep_euclidean_spec(nullptr, 200.0);
  CrossViewBatch b;
  b.source_items = {{0.0, 0.0}};
  b.target_items = {{1.0, 1.0}};
  b.source_outputs = {{0.0, 0.0}};
  b.target_outputs = {{5.0, 5.0}};
  double prev = unpaired_crossview_loss(b, deep, deep, 1.0);
  for (int step = 0; step < 40; ++step) {
    // greedy coordinate probe on y_t
    double best = prev;
    Vec best_y = b.target_outputs[0];
    for (std::size_t k = 0; k < 2; ++k)
      for (double delta : {-0.25, 0.25}) {
        CrossViewBatch probe = b;
        probe.target_outputs[0][k] += delta;
        const double v = unpaired_crossview_loss(probe, deep, deep, 1.0);
        if (v < best) {
          best = v;
          best_y = probe.target_outputs[0];
        }
      }
    b.target_outputs[0] = best_y;
    CHECK(best <= prev);
    prev = best;
  }
}

TEST_CASE("combined prompt loss reductions") {
  MetricSpec deep = deep_euclidean_spec(nullptr, 200.0);
  CrossViewBatch batch = random_batch(4, 4, 33);
  std::vector<Vec> ps(batch.source_items.begin(), batch.source_items.end());
  std::vector<Vec> pt(batch.target_items.begin(), batch.target_items.end());

  const double unpaired = unpaired_crossview_loss(batch, deep, deep, 1.5);
  const double reduced =
      combined_prompt_loss(batch, ps, pt, deep, deep, deep, 1.5, 1.0, 2.0, 0.0);
  CHECK(reduced == doctest::Approx(2.0 * unpaired).epsilon(1e-12));

  // lambda_i = 0 and D_p = gamma * D_y everywhere -> 0
  CrossViewBatch same;
  same.source_items = {{1.0}};
  same.target_items = {{3.0}};
  same.source_outputs = {{1.0}};
  same.target_outputs = {{3.0}};
  const double zero =
      combined_prompt_loss(same, {{1.0}}, {{3.0}}, deep, deep, deep, 1.5, 1.0, 0.0, 0.7);
  CHECK(zero == doctest::Approx(0.0));
  CHECK_THROWS_AS(combined_prompt_loss(batch, ps, pt, deep, deep, deep, 1.5, 1.0, -1.0, 0.5),
                  invalid_input_error);
}

TEST_CASE("cvar self-attention loss") {
  // identical videos and attentions -> 0
  CrossViewBatch b;
  b.source_items = {{1.0, 2.0}};
  b.target_items = {{1.0, 2.0}};
  b.source_outputs = {{0.0}};
  b.target_outputs = {{0.0}};
  std::vector<Vec> attn = {{0.25, 0.25, 0.25, 0.25}};
  CHECK(cvar_selfattention_loss(b, attn, attn, nullptr, 1.5, 5e-3, 200.0) ==
        doctest::Approx(0.0));

  // single pair engineered so D_x - alpha*D_a = 4 -> loss 16 at lambda 1
  const double da = symmetric_kl_metric({0.75, 0.25}, {0.25, 0.75});
  CrossViewBatch s;
  s.source_items = {{0.0}};
  s.target_items = {{std::sqrt(1.5 * da + 4.0)}};
  s.source_outputs = {{0.0}};
  s.target_outputs = {{0.0}};
  std::vector<Vec> a1 = {{0.75, 0.25}};
  std::vector<Vec> a2 = {{0.25, 0.75}};
  const double v = cvar_selfattention_loss(s, a1, a2, nullptr, 1.5, 1.0, 200.0);
  CHECK(v == doctest::Approx(16.0).epsilon(1e-10));
  CHECK_THROWS_AS(cvar_selfattention_loss(s, a1, a2, nullptr, 1.5, 0.0, 200.0),
                  invalid_input_error);
}

TEST_CASE("sliced GW: zero on identical sets and under rigid motion") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec> a;
  for (int i = 0; i < 24; ++i) a.push_back({g(rng), g(rng), g(rng)});

  CHECK(sliced_gw_alignment(a, a, 64, 5) == doctest::Approx(0.0).epsilon(1e-15));

  Matrix rot = synthdata::random_orthogonal(3, rng);
  Vec shift = {4.0, -7.0, 2.5};
  std::vector<Vec> b;
  for (const Vec& v : a) b.push_back(add(rot * v, shift));
  CHECK(sliced_gw_alignment(a, b, 64, 5) < 1e-8);

  // different geometries separate
  std::vector<Vec> c;
  for (const Vec& v : a) c.push_back(scaled(v, 3.0));
  CHECK(sliced_gw_alignment(a, c, 64, 5) > 1e-3);

  CHECK_THROWS_AS(sliced_gw_alignment({}, {}, 8, 0), invalid_input_error);
  CHECK_THROWS_AS(sliced_gw_alignment(a, {{1.0, 0.0, 0.0}}, 8, 0), invalid_input_error);
}

TEST_CASE("1-D GW cost matches exhaustive search over couplings") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4;
    Vec us(n), vs(n);
    for (double& x : us) x = u(rng);
    for (double& x : vs) x = u(rng);
    const double fast = gw_cost_1d(us, vs);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double cost = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double du = us[i] - us[j];
          const double dv = vs[perm[i]] - vs[perm[j]];
          cost += (du * du - dv * dv) * (du * du - dv * dv);
        }
      best = std::min(best, cost / 16.0);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(std::fabs(fast - best) < 1e-12);
  }
}

TEST_CASE("paired vs unpaired bound report") {
  MetricSpec deep = deep_euclidean_spec(nullptr, 200.0);

  // exactly-paired batch with aligned indices -> ratio 1
  CrossViewBatch b;
  b.source_items = {{0.0}, {1.0}};
  b.target_items = {{0.0}, {1.0}};
  b.source_outputs = {{0.0}, {1.0}};
  b.target_outputs = {{0.0}, {1.0}};
  auto rep = paired_vs_unpaired_bound_report(b, {0, 1}, deep, deep, 1.0);
  CHECK(rep.paired_loss == doctest::Approx(0.0));
  CHECK(rep.ratio == doctest::Approx(1.0));

  // degenerate single-pair batch: paired equals unpaired
  CrossViewBatch single = random_batch(1, 1, 55);
  auto rep2 = paired_vs_unpaired_bound_report(single, {0}, deep, deep, 1.5);
  CHECK(rep2.paired_loss == doctest::Approx(rep2.unpaired_loss).epsilon(1e-15));

  // shuffled synthetic pairs: finite diagnostic
  auto pv = synthdata::paired_views({{0.1, 0.2}, {1.0, -1.0}, {2.0, 0.5}},
                                    Matrix::identity(2), Matrix::identity(2), 0.01, 3);
  auto rep3 = paired_vs_unpaired_bound_report(pv.batch, pv.correspondence, deep, deep, 1.0);
  CHECK(std::isfinite(rep3.ratio));
}

TEST_CASE("loss report json") {
  const std::string js =
      loss_report_json(0.5, 35, 1.5, 1.0, {1.0, 0.5}, {"deep_euclidean", "deep_euclidean"}, 200.0);
  CHECK(js.find("\"alpha\":1.5") != std::string::npos);
  CHECK(js.find("\"pair_count\":35") != std::string::npos);
  CHECK(js.find("\"metric_kinds\":[\"deep_euclidean\",\"deep_euclidean\"]") != std::string::npos);
}
