#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "xvt/faircluster.hpp"
#include "xvt/error.hpp"

using namespace xvt;
using namespace xvt::faircluster;

namespace {

Assignment all_to(std::size_t c, std::size_t n) {
  Assignment a;
  a.of.assign(n, std::optional<std::size_t>(c));
  return a;
}

double brute_contrastive(const std::vector<Vec>& features, const Assignment& assign,
                         const ClusterModel& model) {
  double loss = 0.0;
  for (std::size_t c = 0; c < model.centroids.size(); ++c)
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (!assign.of[i] || *assign.of[i] != c) continue;
      double denom = 0.0;
      for (const Vec& f : features) denom += std::exp(dot(f, model.centroids[c]));
      loss += -std::log(std::exp(dot(features[i], model.centroids[c])) / denom);
    }
  return loss;
}

}  // namespace

TEST_CASE("contrastive loss: singleton softmax is zero") {
  ClusterModel m = make_model({{1.0, 0.0}});
  CHECK(contrastive_cluster_loss({{2.0, 0.5}}, all_to(0, 1), m) == doctest::Approx(0.0));
}

TEST_CASE("contrastive loss: equal logits give 2 ln 2") {
  ClusterModel m = make_model({{1.0, 0.0}});
  const double loss = contrastive_cluster_loss({{0.5, 0.3}, {0.5, 0.9}}, all_to(0, 2), m);
  CHECK(loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("contrastive and fairness losses match their brute-force oracles") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec> features;
    for (int i = 0; i < 7; ++i) features.push_back({g(rng), g(rng), g(rng)});
    ClusterModel m = make_model({{g(rng), g(rng), g(rng)}, {g(rng), g(rng), g(rng)}});
    Assignment assign;
    for (int i = 0; i < 7; ++i)
      assign.of.push_back(i % 3 == 2 ? std::nullopt
                                     : std::optional<std::size_t>(static_cast<std::size_t>(i) % 2));
    const double got = contrastive_cluster_loss(features, assign, m);
    CHECK(std::fabs(got - brute_contrastive(features, assign, m)) < 1e-12);

    const double alpha = 0.05;
    double brute_fair = 0.0;
    for (std::size_t c = 0; c < 2; ++c) {
      double denom = 0.0;
      for (const Vec& f : features) denom += std::exp(dot(f, m.centroids[c]));
      for (std::size_t i = 0; i < features.size(); ++i) {
        if (!assign.of[i] || *assign.of[i] != c) continue;
        brute_fair += -alpha * std::log(std::exp(dot(features[i], m.centroids[c])) / denom);
      }
      brute_fair += -std::log(std::exp(dot(m.transitive[c], m.centroids[c])) / denom);
    }
    CHECK(std::fabs(fairness_cluster_loss(features, assign, m, alpha) - brute_fair) < 1e-12);
  }
}

TEST_CASE("loss guards") {
  ClusterModel m = make_model({{1.0}});
  CHECK_THROWS_AS(contrastive_cluster_loss({}, Assignment{}, m), invalid_input_error);
  Assignment none;
  none.of = {std::nullopt};
  CHECK_THROWS_AS(contrastive_cluster_loss({{1.0}}, none, m), invalid_input_error);
  CHECK_THROWS_AS(fairness_cluster_loss({{1.0}}, all_to(0, 1), m, 0.0), invalid_input_error);
}

TEST_CASE("enforcement oracle matches both closed forms") {
  CHECK(enforcement_optimum_oracle(std::nullopt, 4) == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(enforcement_optimum_oracle(0.05, 100) ==
        doctest::Approx(1.0 / 120.0).epsilon(1e-6));
  for (double alpha : {0.05, 0.01})
    for (std::size_t l : {std::size_t{5}, std::size_t{50}, std::size_t{500}}) {
      CHECK(std::fabs(enforcement_optimum_oracle(std::nullopt, l) - 1.0 / double(l)) < 1e-6);
      CHECK(std::fabs(enforcement_optimum_oracle(alpha, l) - 1.0 / (1.0 / alpha + double(l))) <
            1e-6);
    }
}

TEST_CASE("fairness gap shrinkage inequality on a grid") {
  for (double alpha : {0.05, 0.01})
    for (std::size_t lminor : {std::size_t{1}, std::size_t{10}, std::size_t{100}})
      for (std::size_t lmajor : {std::size_t{20}, std::size_t{1000}}) {
        if (lmajor <= lminor) continue;
        const double fair = 1.0 / (1.0 / alpha + double(lminor)) - 1.0 / (1.0 / alpha + double(lmajor));
        const double plain = 1.0 / double(lminor) - 1.0 / double(lmajor);
        CHECK(fair < plain);
      }
  // worked instance: L = 10 vs 1000 at alpha = 0.05
  CHECK(1.0 / (1.0 / 0.05 + 10.0) - 1.0 / (1.0 / 0.05 + 1000.0) < 0.1 - 0.001);
}

TEST_CASE("hinge prototype loss") {
  ClusterModel m = make_model({{0.0, 0.0}, {100.0, 0.0}});
  // at own prototype, far beyond the margin from the other -> 0
  CHECK(hinge_prototype_loss({{0.0, 0.0}}, {0}, m, 10.0) == doctest::Approx(0.0));

  ClusterModel close = make_model({{0.0, 0.0}, {3.0, 0.0}});
  // own distance 0, wrong prototype 3 away -> contributes 10 - 3 = 7
  CHECK(hinge_prototype_loss({{0.0, 0.0}}, {0}, close, 10.0) == doctest::Approx(7.0));
  CHECK_THROWS_AS(hinge_prototype_loss({{0.0, 0.0}}, {5}, m, 10.0), invalid_input_error);
  CHECK_THROWS_AS(hinge_prototype_loss({{0.0, 0.0}}, {0}, m, 0.0), invalid_input_error);
}

TEST_CASE("prototype update: momentum, period, fixed point, freeze, bank cap") {
  ClusterModel m = make_model({{0.0, 0.0}}, 0.9, 2, 3, 10.0);

  // period 2: first call banks only
  prototype_update(m, {{{1.0, 0.0}}});
  CHECK(m.centroids[0][0] == 0.0);
  // second call: bank mean (1,0) -> c = 0.9*0 + 0.1*1
  prototype_update(m, {{{1.0, 0.0}}});
  CHECK(m.centroids[0][0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(m.centroids[0][1] == doctest::Approx(0.0));

  // FIFO cap 3
  prototype_update(m, {{{5.0, 0.0}, {5.0, 0.0}, {5.0, 0.0}, {5.0, 0.0}}});
  CHECK(m.banks[0].size() == 3);

  // fixed point: bank mean equals the centroid
  ClusterModel fp = make_model({{2.0, -1.0}}, 0.99, 1, 10, 10.0);
  prototype_update(fp, {{{2.0, -1.0}, {2.0, -1.0}}});
  CHECK(fp.centroids[0][0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(fp.centroids[0][1] == doctest::Approx(-1.0).epsilon(1e-15));

  // frozen centroids are bit-identical after updates
  ClusterModel fz = make_model({{1.0, 1.0}}, 0.5, 1, 10, 10.0);
  fz.frozen[0] = true;
  prototype_update(fz, {{{9.0, 9.0}}});
  CHECK(fz.centroids[0][0] == 1.0);
  CHECK(fz.centroids[0][1] == 1.0);
}

TEST_CASE("cluster repulsion") {
  CHECK(cluster_repulsion(make_model({{0.0}})) == 0.0);

  ClusterModel spread = make_model({{0.0, 0.0}, {25.0, 0.0}}, 0.99, 100, 500, 10.0);
  CHECK(cluster_repulsion(spread) == 0.0);

  ClusterModel coincident = make_model({{0.0, 0.0}, {0.0, 0.0}}, 0.99, 100, 500, 10.0);
  CHECK(cluster_repulsion(coincident) == doctest::Approx(400.0));

  // collinear spacing = margin: inner pairs (20-10)^2 each, outer pair zero
  ClusterModel tri = make_model({{0.0}, {10.0}, {20.0}}, 0.99, 100, 500, 10.0);
  CHECK(cluster_repulsion(tri) == doctest::Approx(200.0));
}

TEST_CASE("unknown cluster init: blobs, merging, noise") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<Vec> pts;
  for (int i = 0; i < 40; ++i) pts.push_back({g(rng), g(rng)});
  for (int i = 0; i < 40; ++i) pts.push_back({20.0 + g(rng), g(rng)});

  auto centers = unknown_cluster_init(pts, 1.0, 5, 3.0);
  REQUIRE(centers.size() == 2);
  const double e0 = std::min(distance(centers[0], {0.0, 0.0}), distance(centers[0], {20.0, 0.0}));
  const double e1 = std::min(distance(centers[1], {0.0, 0.0}), distance(centers[1], {20.0, 0.0}));
  CHECK(e0 < 0.3);
  CHECK(e1 < 0.3);

  // idempotent: re-clustering the centroids themselves changes nothing
  auto again = unknown_cluster_init(centers, 1.0, 1, 3.0);
  REQUIRE(again.size() == 2);
  CHECK(distance(again[0], centers[0]) < 1e-12);
  CHECK(distance(again[1], centers[1]) < 1e-12);

  // merge when below 2 * margin
  auto merged = unknown_cluster_init(pts, 1.0, 5, 15.0);
  REQUIRE(merged.size() == 1);
  CHECK(distance(merged[0], {10.0, 0.0}) < 0.3);

  // isolated points beyond eps are all noise
  std::vector<Vec> lonely = {{0.0, 0.0}, {100.0, 0.0}, {0.0, 100.0}};
  CHECK(unknown_cluster_init(lonely, 1.0, 2, 3.0).empty());
  CHECK(unknown_cluster_init({}, 1.0, 2, 3.0).empty());
  CHECK_THROWS_AS(unknown_cluster_init(lonely, 0.0, 2, 3.0), invalid_input_error);
}

TEST_CASE("assign nearest") {
  ClusterModel m = make_model({{0.0}, {1.0}, {2.0}, {3.0}, {4.0}, {5.0}});
  auto a = assign_nearest({{3.0}}, m);
  CHECK(*a.of[0] == 3);

  // equidistant between centroids 2 and 5 -> centroid 2
  ClusterModel tie = make_model({{0.0}, {10.0}, {4.0}, {20.0}, {30.0}, {6.0}});
  auto t = assign_nearest({{5.0}}, tie);
  CHECK(*t.of[0] == 2);

  // random instances match a linear scan
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 1.0);
  ClusterModel rnd = make_model({{g(rng), g(rng)}, {g(rng), g(rng)}, {g(rng), g(rng)}});
  for (int i = 0; i < 30; ++i) {
    Vec f = {g(rng), g(rng)};
    auto got = assign_nearest({f}, rnd);
    std::size_t best = 0;
    for (std::size_t c = 1; c < 3; ++c)
      if (distance(f, rnd.centroids[c]) < distance(f, rnd.centroids[best])) best = c;
    CHECK(*got.of[0] == best);
  }
  CHECK_THROWS_AS(assign_nearest({{1.0}}, make_model({})), invalid_input_error);
}

TEST_CASE("model snapshot json excludes banks") {
  ClusterModel m = make_model({{1.0, 2.0}}, 0.99, 100, 500, 10.0);
  prototype_update(m, {{{3.0, 4.0}}});
  const std::string js = model_snapshot_json(m);
  CHECK(js.find("\"centroids\":[[1,2]]") != std::string::npos);
  CHECK(js.find("\"eta\":0.9") != std::string::npos);
  CHECK(js.find("bank") == std::string::npos);
}
