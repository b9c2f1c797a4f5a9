#include "xvt/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "json.hpp"

#include "xvt/crossview.hpp"
#include "xvt/directed.hpp"
#include "xvt/error.hpp"
#include "xvt/faircluster.hpp"
#include "xvt/fairmetrics.hpp"
#include "xvt/flows.hpp"
#include "xvt/grassmann.hpp"
#include "xvt/synthdata.hpp"

namespace xvt::commands {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Resolved {
  std::uint64_t seed = 7;
  std::size_t dim = 16;
  std::size_t sub = 4;
  std::size_t trials = 100;
  std::size_t l_count = 100;
  double tol = 1e-8;
  double alpha = 1.5;
  double gamma = 1.0;
  double rho = 0.5;
  double beta = 200.0;
};

Resolved resolve(const CommandConfig& c, Resolved defaults) {
  Resolved r = defaults;
  if (c.seed) r.seed = *c.seed;
  if (c.dim) r.dim = *c.dim;
  if (c.sub) r.sub = *c.sub;
  if (c.trials) r.trials = *c.trials;
  if (c.l_count) r.l_count = *c.l_count;
  if (c.tol) r.tol = *c.tol;
  if (c.alpha) r.alpha = *c.alpha;
  if (c.gamma) r.gamma = *c.gamma;
  if (c.rho) r.rho = *c.rho;
  if (c.beta) r.beta = *c.beta;
  return r;
}

void echo_config(report::RunReport& rep, const Resolved& r) {
  rep.config["alpha"] = format_real(r.alpha);
  rep.config["beta"] = format_real(r.beta);
  rep.config["dim"] = std::to_string(r.dim);
  rep.config["gamma"] = format_real(r.gamma);
  rep.config["l_count"] = std::to_string(r.l_count);
  rep.config["rho"] = format_real(r.rho);
  rep.config["seed"] = std::to_string(r.seed);
  rep.config["sub"] = std::to_string(r.sub);
  rep.config["tol"] = format_real(r.tol);
  rep.config["trials"] = std::to_string(r.trials);
}

// ---------------------------------------------------------------- gfk-verify

report::RunReport cmd_gfk_verify(const CommandConfig& cfg) {
  Resolved r = resolve(cfg, {.dim = 32, .sub = 8, .trials = 100, .tol = 1e-8});
  report::RunReport rep;
  rep.command = "gfk-verify";
  echo_config(rep, r);

  double max_quad = 0.0, max_endpoint = 0.0, max_angle = 0.0;
  for (std::size_t trial = 0; trial < r.trials; ++trial) {
    std::mt19937_64 rng(r.seed + trial);
    std::uniform_real_distribution<double> ang(0.01, 1.55);
    Vec angles(r.sub);
    for (double& a : angles) a = ang(rng);
    std::sort(angles.begin(), angles.end());

    auto [src, tgt] = synthdata::rotated_subspace_pair(r.dim, r.sub, angles, r.seed * 1000 + trial);
    grassmann::GeodesicKernel kernel = grassmann::gfk_between(src, tgt);

    Matrix quad = grassmann::gfk_quadrature(kernel.system, src, 64);
    quad *= 2.0;
    max_quad = std::max(max_quad, (kernel.q - quad).frobenius_norm() / kernel.q.frobenius_norm());

    Matrix p0 = grassmann::geodesic_point(kernel.system, src, 0.0);
    Matrix p1 = grassmann::geodesic_point(kernel.system, src, 1.0);
    max_endpoint = std::max(max_endpoint, grassmann::projector_distance(p0, src.basis));
    max_endpoint = std::max(max_endpoint, grassmann::projector_distance(p1, tgt.basis));

    for (std::size_t i = 0; i < r.sub; ++i)
      max_angle = std::max(max_angle, std::fabs(kernel.system.omega[i] - angles[i]));
  }
  rep.metrics["max_angle_error"] = max_angle;
  rep.metrics["max_endpoint_distance"] = max_endpoint;
  rep.metrics["max_quad_residual"] = max_quad;
  rep.add_check("closed_form_vs_quadrature", max_quad, r.tol);
  rep.add_check("geodesic_endpoints", max_endpoint, 1e-8);
  rep.add_check("principal_angle_recovery", max_angle, 1e-9);
  return rep;
}

// -------------------------------------------------------------- gfk-distance

grassmann::GeodesicKernel planar_kernel() {
  Matrix ps(2, 1);
  ps(0, 0) = 1.0;
  Matrix pt(2, 1);
  pt(1, 0) = 1.0;
  return grassmann::gfk_between(grassmann::make_subspace(ps), grassmann::make_subspace(pt));
}

report::RunReport cmd_gfk_distance(const CommandConfig& cfg) {
  Resolved r = resolve(cfg, {.dim = 8, .sub = 2, .trials = 50, .tol = 1e-12});
  report::RunReport rep;
  rep.command = "gfk-distance";
  echo_config(rep, r);

  grassmann::GeodesicKernel planar = planar_kernel();
  const double two_over_pi = 2.0 / kPi;
  double planar_err = 0.0;
  planar_err = std::max(planar_err, std::fabs(planar.q(0, 0) - 1.0));
  planar_err = std::max(planar_err, std::fabs(planar.q(1, 1) - 1.0));
  planar_err = std::max(planar_err, std::fabs(planar.q(0, 1) - two_over_pi));
  planar_err = std::max(planar_err, std::fabs(planar.q(1, 0) - two_over_pi));

  const double d12 = crossview::geodesic_distance({1.0, 0.0}, {0.0, 1.0}, planar);
  rep.metrics["planar_distance"] = d12;

  double max_sym = 0.0, max_scale = 0.0, max_self = 0.0;
  std::mt19937_64 rng(r.seed);
  std::uniform_real_distribution<double> ang(0.1, 1.5);
  Vec angles(r.sub);
  for (double& a : angles) a = ang(rng);
  std::sort(angles.begin(), angles.end());
  auto [src, tgt] = synthdata::rotated_subspace_pair(r.dim, r.sub, angles, r.seed);
  grassmann::GeodesicKernel kernel = grassmann::gfk_between(src, tgt);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t t = 0; t < r.trials; ++t) {
    Vec a(r.dim), b(r.dim);
    for (double& v : a) v = gauss(rng);
    for (double& v : b) v = gauss(rng);
    const double dab = crossview::geodesic_distance(a, b, kernel);
    const double dba = crossview::geodesic_distance(b, a, kernel);
    const double dca = crossview::geodesic_distance(scaled(a, 3.5), b, kernel);
    max_sym = std::max(max_sym, std::fabs(dab - dba));
    max_scale = std::max(max_scale, std::fabs(dab - dca));
    max_self = std::max(max_self, crossview::geodesic_distance(a, a, kernel));
  }

  rep.add_check("planar_kernel_entries", planar_err, r.tol);
  rep.add_check("planar_orthogonal_distance", std::fabs(d12 - (1.0 - two_over_pi)), r.tol);
  rep.add_check("distance_symmetry", max_sym, 1e-10);
  rep.add_check("distance_scale_invariance", max_scale, 1e-10);
  rep.add_check("distance_self_zero", max_self, 1e-10);
  return rep;
}

// ------------------------------------------------------------ crossview-demo

report::RunReport cmd_crossview_demo(const CommandConfig& cfg) {
  Resolved r = resolve(cfg, {.dim = 6, .trials = 8, .alpha = 1.5, .beta = 200.0});
  report::RunReport rep;
  rep.command = "crossview-demo";
  echo_config(rep, r);

  crossview::MetricSpec deep = crossview::deep_euclidean_spec(nullptr, r.beta);
  crossview::MetricSpec skl = crossview::symmetric_kl_spec();

  // seeded unpaired batch
  std::mt19937_64 rng(r.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  crossview::CrossViewBatch batch;
  std::vector<Vec> prompt_src, prompt_tgt;
  for (std::size_t i = 0; i < r.trials; ++i) {
    Vec xs(r.dim), xt(r.dim), ys(3), yt(3), ps(4), pt(4);
    for (double& v : xs) v = gauss(rng);
    for (double& v : xt) v = gauss(rng);
    for (double& v : ys) v = gauss(rng);
    for (double& v : yt) v = gauss(rng);
    for (double& v : ps) v = gauss(rng);
    for (double& v : pt) v = gauss(rng);
    batch.source_items.push_back(xs);
    batch.target_items.push_back(xt);
    batch.source_outputs.push_back(ys);
    batch.target_outputs.push_back(yt);
    prompt_src.push_back(ps);
    prompt_tgt.push_back(pt);
  }

  const double loss = crossview::unpaired_crossview_loss(batch, deep, deep, r.alpha);
  double brute = 0.0;
  for (std::size_t i = 0; i < batch.source_items.size(); ++i)
    for (std::size_t j = 0; j < batch.target_items.size(); ++j) {
      double dx = 0.0, dy = 0.0;
      for (std::size_t k = 0; k < r.dim; ++k) {
        const double d = batch.source_items[i][k] - batch.target_items[j][k];
        dx += d * d;
      }
      for (std::size_t k = 0; k < 3; ++k) {
        const double d = batch.source_outputs[i][k] - batch.target_outputs[j][k];
        dy += d * d;
      }
      const double res = std::min(dx, r.beta) - r.alpha * std::min(dy, r.beta);
      brute += res * res;
    }
  brute /= static_cast<double>(batch.source_items.size() * batch.target_items.size());
  rep.metrics["unpaired_loss"] = loss;

  const double combined = crossview::combined_prompt_loss(batch, prompt_src, prompt_tgt, deep,
                                                          deep, deep, r.alpha, r.gamma, 1.0, 0.5);
  rep.metrics["combined_loss"] = combined;
  const double combined_reduced = crossview::combined_prompt_loss(
      batch, prompt_src, prompt_tgt, deep, deep, deep, r.alpha, r.gamma, 1.0, 0.0);

  // hand examples
  crossview::CrossViewBatch single;
  single.source_items = {{0.0}};
  single.target_items = {{0.8944271909999159}};  // squared distance 0.8
  single.source_outputs = {{0.0}};
  single.target_outputs = {{0.4472135954999579}};  // squared distance 0.2
  const double single_loss = crossview::unpaired_crossview_loss(single, deep, deep, 1.5);

  const double skl_example = crossview::symmetric_kl_metric({0.75, 0.25}, {0.25, 0.75});

  // clamp property
  const double far_metric = crossview::deep_euclidean_metric({0.0}, {30.0}, nullptr, r.beta);

  rep.add_check("unpaired_equals_bruteforce", std::fabs(loss - brute), 1e-12);
  rep.add_check("single_pair_hand_value", std::fabs(single_loss - 0.25), 1e-12);
  rep.add_check("symmetric_kl_hand_value", std::fabs(skl_example - 0.5 * std::log(3.0)), 1e-10);
  rep.add_check("clamp_respected", std::max(0.0, far_metric - r.beta), 0.0);
  rep.add_check("prompt_reduction", std::fabs(combined_reduced - loss), 1e-12);
  return rep;
}

// -------------------------------------------------------------- cluster-props

report::RunReport cmd_cluster_props(const CommandConfig& cfg) {
  Resolved r = resolve(cfg, {.l_count = 100, .tol = 1e-6, .alpha = 0.05});
  report::RunReport rep;
  rep.command = "cluster-props";
  echo_config(rep, r);

  const std::vector<std::size_t> ls = {5, 50, 500};
  const std::vector<double> alphas = {0.05, 0.01};

  double max_p1 = 0.0, max_p2 = 0.0;
  for (std::size_t l : ls) {
    const double got = faircluster::enforcement_optimum_oracle(std::nullopt, l);
    max_p1 = std::max(max_p1, std::fabs(got - 1.0 / static_cast<double>(l)));
    for (double a : alphas) {
      const double got2 = faircluster::enforcement_optimum_oracle(a, l);
      max_p2 = std::max(max_p2, std::fabs(got2 - 1.0 / (1.0 / a + static_cast<double>(l))));
    }
  }

  bool shrinkage = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (double a : alphas)
    for (std::size_t lminor = 1; lminor <= 64; lminor *= 2)
      for (std::size_t lmajor = lminor * 2; lmajor <= 1024; lmajor *= 2) {
        const double fair = 1.0 / (1.0 / a + static_cast<double>(lminor)) -
                            1.0 / (1.0 / a + static_cast<double>(lmajor));
        const double plain = 1.0 / static_cast<double>(lminor) - 1.0 / static_cast<double>(lmajor);
        worst_margin = std::min(worst_margin, plain - fair);
        if (fair >= plain) shrinkage = false;
      }

  const double ell = faircluster::enforcement_optimum_oracle(r.alpha, r.l_count);
  rep.metrics["ell_star"] = ell;
  rep.metrics["ell_star_closed_form"] = 1.0 / (1.0 / r.alpha + static_cast<double>(r.l_count));

  rep.add_check("proposition1_optimum", max_p1, r.tol);
  rep.add_check("proposition2_optimum", max_p2, r.tol);
  rep.add_check_flag("fairness_gap_shrinkage", shrinkage, worst_margin, 0.0);
  return rep;
}

// --------------------------------------------------------------- cluster-demo

report::RunReport cmd_cluster_demo(const CommandConfig& cfg) {
  Resolved r = resolve(cfg, {.trials = 60, .tol = 0.5});
  report::RunReport rep;
  rep.command = "cluster-demo";
  echo_config(rep, r);

  // two tight blobs 30 apart
  std::mt19937_64 rng(r.seed);
  std::normal_distribution<double> gauss(0.0, 0.5);
  std::vector<Vec> blob;
  for (std::size_t i = 0; i < r.trials; ++i) blob.push_back({gauss(rng), gauss(rng)});
  for (std::size_t i = 0; i < r.trials; ++i) blob.push_back({30.0 + gauss(rng), gauss(rng)});

  auto centers = faircluster::unknown_cluster_init(blob, 1.0, 5, 5.0);
  double blob_err = 1e9;
  if (centers.size() == 2) {
    const double e0 = std::min(distance(centers[0], {0.0, 0.0}), distance(centers[0], {30.0, 0.0}));
    const double e1 = std::min(distance(centers[1], {0.0, 0.0}), distance(centers[1], {30.0, 0.0}));
    blob_err = std::max(e0, e1);
  }
  rep.metrics["blob_cluster_count"] = static_cast<double>(centers.size());

  auto merged_centers = faircluster::unknown_cluster_init(blob, 1.0, 5, 20.0);
  double merged_err = 1e9;
  if (merged_centers.size() == 1) merged_err = distance(merged_centers[0], {15.0, 0.0});

  // repulsion hand value: coincident centroids, margin 10 -> (20 - 0)^2 = 400
  faircluster::ClusterModel coincident =
      faircluster::make_model({{0.0, 0.0}, {0.0, 0.0}}, 0.99, 100, 500, 10.0);
  const double repulsion = faircluster::cluster_repulsion(coincident);

  // hinge hand value: feature at its own prototype, 3 away from the wrong one
  faircluster::ClusterModel pair_model =
      faircluster::make_model({{0.0, 0.0}, {3.0, 0.0}}, 0.99, 100, 500, 10.0);
  const double hinge =
      faircluster::hinge_prototype_loss({{0.0, 0.0}}, {0}, pair_model, 10.0);

  // contrastive hand value: two identical features on one centroid -> 2 ln 2
  faircluster::ClusterModel one = faircluster::make_model({{1.0, 0.0}}, 0.99, 100, 500, 10.0);
  faircluster::Assignment assign;
  assign.of = {std::optional<std::size_t>(0), std::optional<std::size_t>(0)};
  const double contrastive =
      faircluster::contrastive_cluster_loss({{0.5, 0.2}, {0.5, 0.2}}, assign, one);

  // momentum fixed point and frozen-centroid stability
  faircluster::ClusterModel fp = faircluster::make_model({{2.0, -1.0}, {5.0, 5.0}}, 0.9, 1, 10, 1.0);
  fp.frozen[1] = true;
  const Vec frozen_before = fp.centroids[1];
  faircluster::prototype_update(fp, {{{2.0, -1.0}, {2.0, -1.0}}, {{9.0, 9.0}}});
  const double fixed_point_err = distance(fp.centroids[0], {2.0, -1.0});
  const double frozen_err = distance(fp.centroids[1], frozen_before);

  // nearest assignment ties break to the lowest index
  faircluster::ClusterModel tie = faircluster::make_model({{-1.0}, {1.0}}, 0.99, 100, 500, 1.0);
  auto a = faircluster::assign_nearest({{0.0}}, tie);
  const bool tie_ok = a.of[0] && *a.of[0] == 0;

  rep.add_check("blob_recovery", blob_err, r.tol);
  rep.add_check("blob_merge_to_midpoint", merged_err, r.tol);
  rep.add_check("repulsion_hand_value", std::fabs(repulsion - 400.0), 1e-12);
  rep.add_check("hinge_hand_value", std::fabs(hinge - 7.0), 1e-12);
  rep.add_check("contrastive_hand_value", std::fabs(contrastive - 2.0 * std::log(2.0)), 1e-12);
  rep.add_check("momentum_fixed_point", fixed_point_err, 1e-12);
  rep.add_check("frozen_centroid_stable", frozen_err, 0.0);
  rep.add_check_flag("nearest_tie_rule", tie_ok, tie_ok ? 0.0 : 1.0, 0.0);
  return rep;
}

// ----------------------------------------------------------- metrics-fairness

report::RunReport cmd_metrics_fairness(const CommandConfig& cfg) {
  Resolved r = resolve(cfg, {.trials = 1000});
  report::RunReport rep;
  rep.command = "metrics-fairness";
  echo_config(rep, r);

  std::mt19937_64 rng(r.seed);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_int_distribution<std::size_t> csize(1, 32);
  bool bound_ok = true;
  for (std::size_t t = 0; t < r.trials; ++t) {
    Vec losses(csize(rng));
    for (double& v : losses) v = u(rng);
    if (!fairmetrics::fairness_bound_check(losses).holds) bound_ok = false;
  }

  fairmetrics::ConfusionMatrix cm(2);
  cm.at(0, 0) = 50;
  cm.at(0, 1) = 50;
  cm.at(1, 0) = 0;
  cm.at(1, 1) = 100;
  const auto stats = fairmetrics::iou_stats(cm);
  const double miou_err = std::fabs(stats.miou - (0.5 + 2.0 / 3.0) / 2.0);
  rep.metrics["example_miou"] = stats.miou;

  const Vec w = fairmetrics::class_balance_weight({0.9, 0.1});
  const double w_err = std::max(std::fabs(w[0] - std::log(0.5 / 0.9)),
                                std::fabs(w[1] - std::log(0.5 / 0.1)));

  // imbalanced grid: minority gradient mass below majority under uniform logits
  auto grid = synthdata::imbalanced_label_grid(100, 100, {0.9, 0.1}, r.seed);
  std::vector<std::vector<Vec>> logits(100, std::vector<Vec>(100, Vec(2, 0.0)));
  const auto grad = fairmetrics::per_class_gradient_magnitude(logits, grid.labels);
  const bool mass_ok = grad.total_mass[1] < grad.total_mass[0];
  const double mean_err = grad.mean_magnitude[0] ? std::fabs(*grad.mean_magnitude[0] - 0.5) : 1.0;

  // 2x1 grid, color gap sigma1*sqrt(2), equal predictions -> energy 2/e
  const double s1 = 0.7;
  std::vector<std::vector<Vec>> colors = {{{0.0}, {s1 * std::sqrt(2.0)}}};
  std::vector<std::vector<Vec>> preds = {{{0.5, 0.5}, {0.5, 0.5}}};
  const double energy = fairmetrics::structural_consistency_energy(colors, preds, s1, 1.0);

  rep.add_check_flag("fairness_bound_sweep", bound_ok, bound_ok ? 0.0 : 1.0, 0.0);
  rep.add_check("iou_hand_value", miou_err, 1e-12);
  rep.add_check("balance_weight_hand_value", w_err, 1e-12);
  rep.add_check_flag("gradient_mass_imbalance", mass_ok,
                     grad.total_mass[1] - grad.total_mass[0], 0.0);
  rep.add_check("uniform_logit_gradient", mean_err, 1e-12);
  rep.add_check("structural_energy_hand_value", std::fabs(energy - 2.0 * std::exp(-1.0)), 1e-12);
  return rep;
}

// ------------------------------------------------------------------ flow-check

double fd_log_abs_det(const flows::FlowStack& stack, const Vec& y, double step) {
  const std::size_t d = y.size();
  Matrix jac(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    Vec yp = y, ym = y;
    yp[j] += step;
    ym[j] -= step;
    const Vec zp = flows::flow_forward(stack, yp).z;
    const Vec zm = flows::flow_forward(stack, ym).z;
    for (std::size_t i = 0; i < d; ++i) jac(i, j) = (zp[i] - zm[i]) / (2.0 * step);
  }
  const auto svd = linalg::thin_svd(jac);
  double logdet = 0.0;
  for (double s : svd.sigma) logdet += std::log(s);
  return logdet;
}

report::RunReport cmd_flow_check(const CommandConfig& cfg) {
  Resolved r = resolve(cfg, {.trials = 50});
  report::RunReport rep;
  rep.command = "flow-check";
  echo_config(rep, r);

  double max_rt = 0.0, max_logdet_rel = 0.0;
  std::mt19937_64 rng(r.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t t = 0; t < r.trials; ++t) {
    const std::size_t d = 2 + (t % 7);  // 2..8
    const std::size_t layers = 3 + (t % 4);
    flows::FlowStack stack = flows::random_stack(d, layers, r.seed * 131 + t);
    Vec y(d);
    for (double& v : y) v = gauss(rng);

    const auto fwd = flows::flow_forward(stack, y);
    const Vec back = flows::flow_inverse(stack, fwd.z);
    for (std::size_t i = 0; i < d; ++i) max_rt = std::max(max_rt, std::fabs(back[i] - y[i]));

    const double fd = fd_log_abs_det(stack, y, 1e-5);
    max_logdet_rel = std::max(max_logdet_rel,
                              std::fabs(fwd.logdet - fd) / std::max(1.0, std::fabs(fwd.logdet)));
  }

  // analytic hand values
  flows::FlowStack ident;
  ident.dim = 2;
  const double bimal2 = flows::bimal_loss(ident, {0.0, 0.0});
  flows::FlowStack act1;
  act1.dim = 1;
  act1.layers.emplace_back(flows::ActNorm{{2.0}, {0.0}});
  const double bimal_act = flows::bimal_loss(act1, {0.0});

  // Gibbs sweep
  std::uniform_real_distribution<double> u(0.01, 1.0);
  bool gibbs_ok = true;
  double max_eq_gap = 0.0;
  for (std::size_t t = 0; t < 1000; ++t) {
    Vec p(4), q(4);
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      p[i] = u(rng);
      q[i] = u(rng);
      sp += p[i];
      sq += q[i];
    }
    for (std::size_t i = 0; i < 4; ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    const auto g = flows::gibbs_bound_check(p, q);
    if (!g.holds) gibbs_ok = false;
    const auto eq = flows::gibbs_bound_check(p, p);
    max_eq_gap = std::max(max_eq_gap, std::fabs(eq.cross_entropy - eq.entropy));
  }

  // serialization reload is bit-identical
  flows::FlowStack stack = flows::random_stack(6, 5, r.seed);
  const std::string js = flows::stack_to_json(stack);
  flows::FlowStack reload = flows::stack_from_json(js);
  Vec probe(6);
  for (double& v : probe) v = gauss(rng);
  const auto z1 = flows::flow_forward(stack, probe);
  const auto z2 = flows::flow_forward(reload, probe);
  double reload_gap = std::fabs(z1.logdet - z2.logdet);
  for (std::size_t i = 0; i < 6; ++i) reload_gap = std::max(reload_gap, std::fabs(z1.z[i] - z2.z[i]));

  rep.metrics["max_roundtrip_error"] = max_rt;
  rep.metrics["max_logdet_relative_error"] = max_logdet_rel;
  rep.add_check("flow_roundtrip", max_rt, 1e-9);
  rep.add_check("logdet_vs_finite_difference", max_logdet_rel, 1e-5);
  rep.add_check("bimal_identity_hand_value", std::fabs(bimal2 - std::log(2.0 * kPi)), 1e-12);
  rep.add_check("bimal_actnorm_hand_value",
                std::fabs(bimal_act - (0.5 * std::log(2.0 * kPi) - std::log(2.0))), 1e-12);
  rep.add_check_flag("gibbs_bound_sweep", gibbs_ok, gibbs_ok ? 0.0 : 1.0, 0.0);
  rep.add_check("gibbs_equality_at_p", max_eq_gap, 1e-10);
  rep.add_check("stack_reload_bitwise", reload_gap, 0.0);
  return rep;
}

// -------------------------------------------------------------- transport-check

report::RunReport cmd_transport_check(const CommandConfig& cfg) {
  Resolved r = resolve(cfg, {.trials = 100000, .rho = 0.5});
  report::RunReport rep;
  rep.command = "transport-check";
  echo_config(rep, r);

  const double alpha = std::min(0.3, r.rho);
  std::mt19937_64 rng(r.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double sum = 0.0, sumsq = 0.0;
  const std::size_t n = r.trials;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec zs = {gauss(rng)};
    const auto out = flows::transport_transform_fixed_alpha(zs, r.rho, alpha, rng);
    sum += out.z[0];
    sumsq += out.z[0] * out.z[0];
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sumsq / static_cast<double>(n) - mean * mean;
  const double mean_gate = 4.0 / std::sqrt(static_cast<double>(n));
  const double var_gate = 4.0 * std::sqrt(2.0 / static_cast<double>(n));
  rep.metrics["empirical_mean"] = mean;
  rep.metrics["empirical_variance"] = var;

  double max_w2_err = 0.0, max_w2 = 0.0;
  for (int k = -10; k <= 10; ++k) {
    const double a = r.rho * static_cast<double>(k) / 10.0;
    const Vec zero(4, 0.0), shifted(4, a), ones(4, 1.0);
    const double w2 = flows::gaussian_w2_per_dim(zero, ones, shifted, ones);
    max_w2_err = std::max(max_w2_err, std::fabs(w2 - std::fabs(a)));
    max_w2 = std::max(max_w2, w2);
  }

  rep.add_check("transport_mean", std::fabs(mean - alpha), mean_gate);
  rep.add_check("transport_variance", std::fabs(var - 1.0), var_gate);
  rep.add_check("w2_equals_abs_alpha", max_w2_err, 1e-12);
  rep.add_check("w2_bounded_by_rho", std::max(0.0, max_w2 - r.rho), 1e-12);
  return rep;
}

// --------------------------------------------------------------- order-recover

// right-associated path weight, matching the DP's summation order
double path_weight(const directed::AttentionGrid& g, const std::vector<std::size_t>& p) {
  double w = 0.0;
  for (std::size_t i = p.size() - 1; i-- > 0;) w = g.weights(p[i], p[i + 1]) + w;
  return w;
}

report::RunReport cmd_order_recover(const CommandConfig& cfg) {
  Resolved r = resolve(cfg, {.trials = 200});
  report::RunReport rep;
  rep.command = "order-recover";
  echo_config(rep, r);

  const std::size_t t = 6;
  std::size_t weight_mismatch = 0, path_mismatch = 0;
  std::mt19937_64 rng(r.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t trial = 0; trial < r.trials; ++trial) {
    Matrix w(t, t);
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < t; ++j) w(i, j) = u(rng);
    directed::AttentionGrid grid = directed::make_grid(w);
    const auto dp = directed::recover_order(grid);

    std::vector<std::size_t> perm(t);
    std::iota(perm.begin(), perm.end(), 0);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_path;
    do {
      const double pw = path_weight(grid, perm);
      if (pw > best) {
        best = pw;
        best_path = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));

    if (dp.path_weight != best) ++weight_mismatch;
    if (dp.order.order != best_path) ++path_mismatch;
  }

  double chain_acc_min = 100.0;
  for (std::size_t len = 2; len <= 12; ++len) {
    auto grid = synthdata::chain_attention(len, 1.0, 0.0, r.seed);
    const auto rec = directed::recover_order(grid);
    chain_acc_min = std::min(chain_acc_min,
                             directed::order_accuracy(rec.order, directed::identity_permutation(len)));
  }

  directed::Permutation swapped;
  swapped.order = {1, 0, 2, 3, 4, 5, 6, 7};
  const double acc_swap = directed::order_accuracy(swapped, directed::identity_permutation(8));
  directed::Permutation reversed;
  reversed.order = {7, 6, 5, 4, 3, 2, 1, 0};
  const double acc_rev = directed::order_accuracy(reversed, directed::identity_permutation(8));

  directed::AttentionGrid zero_grid = directed::make_grid(Matrix(2, 2));
  const double guided =
      directed::guided_order_loss({zero_grid}, directed::identity_permutation(2));

  rep.metrics["chain_min_accuracy"] = chain_acc_min;
  rep.add_check_flag("dp_weight_equals_bruteforce", weight_mismatch == 0,
                     static_cast<double>(weight_mismatch), 0.0);
  rep.add_check_flag("dp_path_equals_bruteforce", path_mismatch == 0,
                     static_cast<double>(path_mismatch), 0.0);
  rep.add_check("noiseless_chain_accuracy", 100.0 - chain_acc_min, 0.0);
  rep.add_check("lcs_adjacent_swap", std::fabs(acc_swap - 87.5), 1e-12);
  rep.add_check("lcs_reversed", std::fabs(acc_rev - 12.5), 1e-12);
  rep.add_check("guided_loss_hand_value", std::fabs(guided - (-0.5)), 1e-12);
  return rep;
}

// ------------------------------------------------------------------ sgw-check

report::RunReport cmd_sgw_check(const CommandConfig& cfg) {
  Resolved r = resolve(cfg, {.dim = 4, .trials = 32});
  report::RunReport rep;
  rep.command = "sgw-check";
  echo_config(rep, r);

  std::mt19937_64 rng(r.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec> set_a;
  for (std::size_t i = 0; i < r.trials; ++i) {
    Vec v(r.dim);
    for (double& x : v) x = gauss(rng);
    set_a.push_back(v);
  }

  const double self = crossview::sliced_gw_alignment(set_a, set_a, 64, r.seed);

  Matrix rot = synthdata::random_orthogonal(r.dim, rng);
  Vec shift(r.dim);
  for (double& x : shift) x = 10.0 * gauss(rng);
  std::vector<Vec> set_b;
  for (const Vec& v : set_a) set_b.push_back(add(rot * v, shift));
  const double rigid = crossview::sliced_gw_alignment(set_a, set_b, 64, r.seed);

  // 1-D cost vs exhaustive over all couplings, small sets
  double max_gap = 0.0;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t trial = 0; trial < 50; ++trial) {
    const std::size_t n = 4;
    Vec us(n), vs(n);
    for (double& x : us) x = u(rng);
    for (double& x : vs) x = u(rng);
    const double fast = crossview::gw_cost_1d(us, vs);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double cost = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double du = us[i] - us[j];
          const double dv = vs[perm[i]] - vs[perm[j]];
          const double d = du * du - dv * dv;
          cost += d * d;
        }
      best = std::min(best, cost / static_cast<double>(n * n));
    } while (std::next_permutation(perm.begin(), perm.end()));
    max_gap = std::max(max_gap, std::fabs(fast - best));
  }

  rep.metrics["rigid_motion_value"] = rigid;
  rep.metrics["self_value"] = self;
  rep.add_check("identical_sets_zero", self, 1e-12);
  rep.add_check("rigid_motion_invariance", rigid, 1e-8);
  rep.add_check("one_dim_exhaustive_match", max_gap, 1e-12);
  return rep;
}

}  // namespace

CommandConfig merged(const CommandConfig& base, const CommandConfig& over) {
  CommandConfig out = base;
  if (over.seed) out.seed = over.seed;
  if (over.dim) out.dim = over.dim;
  if (over.sub) out.sub = over.sub;
  if (over.trials) out.trials = over.trials;
  if (over.l_count) out.l_count = over.l_count;
  if (over.tol) out.tol = over.tol;
  if (over.alpha) out.alpha = over.alpha;
  if (over.gamma) out.gamma = over.gamma;
  if (over.rho) out.rho = over.rho;
  if (over.beta) out.beta = over.beta;
  return out;
}

CommandConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("config: cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input_error(std::string("config: ") + e.what());
  }
  CommandConfig c;
  try {
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("dim")) c.dim = doc["dim"].get<std::size_t>();
    if (doc.contains("sub")) c.sub = doc["sub"].get<std::size_t>();
    if (doc.contains("trials")) c.trials = doc["trials"].get<std::size_t>();
    if (doc.contains("L")) c.l_count = doc["L"].get<std::size_t>();
    if (doc.contains("tol")) c.tol = doc["tol"].get<double>();
    if (doc.contains("alpha")) c.alpha = doc["alpha"].get<double>();
    if (doc.contains("gamma")) c.gamma = doc["gamma"].get<double>();
    if (doc.contains("rho")) c.rho = doc["rho"].get<double>();
    if (doc.contains("beta")) c.beta = doc["beta"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input_error(std::string("config: ") + e.what());
  }
  return c;
}

std::vector<std::string> command_names() {
  return {"gfk-verify",   "gfk-distance",     "crossview-demo", "cluster-props",
          "cluster-demo", "metrics-fairness", "flow-check",     "transport-check",
          "order-recover", "sgw-check"};
}

bool known_command(const std::string& name) {
  const auto names = command_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

report::RunReport run_command(const std::string& name, const CommandConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  report::RunReport rep;
  if (name == "gfk-verify")
    rep = cmd_gfk_verify(config);
  else if (name == "gfk-distance")
    rep = cmd_gfk_distance(config);
  else if (name == "crossview-demo")
    rep = cmd_crossview_demo(config);
  else if (name == "cluster-props")
    rep = cmd_cluster_props(config);
  else if (name == "cluster-demo")
    rep = cmd_cluster_demo(config);
  else if (name == "metrics-fairness")
    rep = cmd_metrics_fairness(config);
  else if (name == "flow-check")
    rep = cmd_flow_check(config);
  else if (name == "transport-check")
    rep = cmd_transport_check(config);
  else if (name == "order-recover")
    rep = cmd_order_recover(config);
  else if (name == "sgw-check")
    rep = cmd_sgw_check(config);
  else
    throw invalid_input_error("unknown command: " + name);
  rep.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace xvt::commands
