#pragma once
#include <string>

#include "lsl/rng.hpp"

namespace lsl::dists {

enum class Kind { normal, uniform, truncated_normal, rademacher, point_mass_zero };

// A symmetric scalar distribution. `variance` is always the realized variance;
// for truncated_normal it is the post-truncation variance, and `cutoff` is the
// truncation point in pre-truncation standard deviations.
struct DistributionSpec {
  Kind kind = Kind::point_mass_zero;
  double variance = 0.0;
  double cutoff = 0.0;
};

struct MomentSet {
  double mu2 = 0.0;
  double mu4 = 0.0;
  double kurt = 3.0;  // mu4/mu2^2, by convention 3 when mu2 == 0
};

enum class SchemeName {
  he_normal,
  he_uniform,
  he_normal_truncated2,
  lecun_normal,
  lecun_uniform,
  glorot_normal,
  glorot_uniform,
  scaled,
};

// kappa/base apply to the scaled scheme only; bias defaults to an exact zero.
struct InitScheme {
  SchemeName name = SchemeName::he_normal;
  double kappa = 1.0;
  Kind base = Kind::normal;
  DistributionSpec bias;
};

struct LayerInit {
  DistributionSpec weights;
  DistributionSpec biases;
};

MomentSet moments(const DistributionSpec& d);

// r(c) = Var[X | |X| <= c sigma] / sigma^2 for standard normal X.
double effective_truncation_factor(double cutoff);

LayerInit resolve_layer(const InitScheme& s, int fan_in, int fan_out);

double sample(const DistributionSpec& d, rng::Stream& rs);

// weight_variance * fan_in / 2, in closed form per scheme so the critical
// schemes report exactly 1.0 (no rounding through the resolved variance).
double scheme_kappa(const InitScheme& s, int fan_in, int fan_out);

// Stable CLI strings: "he-normal", "glorot-uniform", "he-normal-trunc2",
// "scaled:2.0:normal", ... (see README).
InitScheme parse_scheme(const std::string& text);
std::string scheme_name(const InitScheme& s);

}  // namespace lsl::dists
