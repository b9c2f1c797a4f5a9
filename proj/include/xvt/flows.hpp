#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>

#include "xvt/matrix.hpp"

namespace xvt::flows {

/// Elementwise y -> s*y + b; all scales nonzero.
struct ActNorm {
  Vec scale;
  Vec bias;
};

/// y -> W*y with |det W| > 1e-12; logdet and inverse via LU.
struct InvertibleLinear {
  Matrix w;
};

/// Splits y at `split`; the first half passes through untouched and drives
/// fixed tanh coefficient maps producing per-coordinate log-scale and shift
/// for the second half. Maps are seeded at construction, never trained.
struct AffineCoupling {
  std::size_t split = 0;
  Matrix wh;  // hidden map weights, hidden x split
  Vec bh;
  Matrix ws;  // log-scale head, (d - split) x hidden
  Vec bs;
  Matrix wt;  // shift head, (d - split) x hidden
  Vec bt;
  double amp = 0.5;  // log-scale amplitude cap: logs = amp * tanh(...)
};

using FlowLayer = std::variant<ActNorm, InvertibleLinear, AffineCoupling>;

struct FlowStack {
  std::vector<FlowLayer> layers;
  std::size_t dim = 0;
};

void validate_stack(const FlowStack& stack);

struct ForwardResult {
  Vec z;
  double logdet = 0.0;
};

ForwardResult flow_forward(const FlowStack& stack, const Vec& y);
Vec flow_inverse(const FlowStack& stack, const Vec& z);

/// -log N(z; 0, I) - logdet = 0.5*||z||^2 + (d/2) log 2pi - logdet.
double bimal_loss(const FlowStack& stack, const Vec& y);

struct GibbsCheck {
  double cross_entropy = 0.0;
  double entropy = 0.0;
  bool holds = false;
};

GibbsCheck gibbs_bound_check(const Vec& p, const Vec& q, double epsilon = 1e-12);

struct Provenance {
  Vec source;
  double rho = 0.0;
  double alpha = 0.0;
};

struct LatentSample {
  Vec z;
  std::optional<Provenance> provenance;
};

/// z* = (z_s + g)/sqrt(2) with g ~ N(alpha*sqrt(2) * 1, I), alpha ~ U(-rho, rho).
LatentSample transport_transform(const Vec& z_s, double rho, std::mt19937_64& rng);
LatentSample transport_transform_fixed_alpha(const Vec& z_s, double rho, double alpha,
                                             std::mt19937_64& rng);

/// Dimension-normalized W2 between diagonal Gaussians:
/// sqrt(||mu_a - mu_b||^2 + sum (sqrt(va) - sqrt(vb))^2) / sqrt(d).
double gaussian_w2_per_dim(const Vec& mean_a, const Vec& cov_diag_a, const Vec& mean_b,
                           const Vec& cov_diag_b);

/// JSON description of the stack; reload reproduces bit-identical outputs.
std::string stack_to_json(const FlowStack& stack);
FlowStack stack_from_json(const std::string& text);

/// Seeded random stack alternating actnorm / linear / coupling layers.
FlowStack random_stack(std::size_t dim, std::size_t n_layers, std::uint64_t seed);

}  // namespace xvt::flows
