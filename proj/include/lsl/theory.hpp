#pragma once
#include <string>
#include <vector>

#include "lsl/dists.hpp"
#include "lsl/netgen.hpp"

namespace lsl::theory {

// Entry j refers to layer j (0 = input). kappa[0] and bias_mu2[0] are
// placeholders (1 and 0) so all vectors share the layer indexing.
struct MeanPrediction {
  std::vector<double> mean;      // E[M_j]
  std::vector<double> kappa;     // weight_variance * fan_in / 2
  std::vector<double> bias_mu2;  // nu2 per layer
};

// Lower/upper bounds on E[M_j^2] at each depth j (index 0..d), valid at the
// critical variance with M0 = 1.
struct VarianceBounds {
  std::vector<double> lower;
  std::vector<double> upper;
  double c1 = 0.0;
  double c2 = 0.0;
  double beta = 0.0;  // sum of reciprocal hidden widths
};

struct EmpVarBounds {
  double lower = 0.0;
  double upper = 0.0;
  double beta = 0.0;
  double c_lower = 0.5;
  double c_upper = 0.0;  // equals the c2 of variance_bounds_fc
};

// Cumulative per-module bounds on E[M^res_l], index 0..L with entry 0 = 1.
struct ResnetBounds {
  std::vector<double> lower;
  std::vector<double> upper;
  double scale_sum = 0.0;
  bool bounded = false;  // the prescribed full scale series converges
};

enum class BudgetKind { neurons, parameters };

// E[M_j] = kappa_j * E[M_{j-1}] + nu2_j / 2, iterated from M0.
MeanPrediction predict_mean_fc(const netgen::Architecture& a, const dists::InitScheme& s,
                               double m0);

// lower(j) = exp(sum_{k<=j} 1/(2 n_k)), upper(j) = c1 * exp(c2 * sum_{k<=j} 1/n_k).
// Requires kappa = 1 per layer and m0 = 1 (throws std::domain_error otherwise).
VarianceBounds variance_bounds_fc(const netgen::Architecture& a, const dists::InitScheme& s,
                                  double m0);

// Sandwich for E[emp_var]: (c/d) sum_j ((j-1)/d) exp(c sum_{k=j..d-1} 1/n_k)
// at c = 1/2 (lower) and c = c2 (upper). Requires kappa = 1 and zero biases.
EmpVarBounds empvar_bounds_fc(const netgen::Architecture& a, const dists::InitScheme& s);

// beta = sum of 1/width over hidden layers (excludes input and final layer).
double sum_reciprocal_widths(const netgen::Architecture& a);

// Constant width minimizing beta under a neuron or parameter budget.
int optimal_constant_width(int depth, double budget, BudgetKind kind);

// lower(L) = prod(1 + eta^2), upper(L) = prod(1 + sqrt(2) eta + eta^2), for
// nonnegative inputs and eta in [0, 1). Throws std::domain_error on eta >= 1.
ResnetBounds resnet_growth_bounds(const netgen::ScaleSchedule& schedule, int module_width);

// (1/n_next) * Var[(A_1)^2 | a] with
//   Var[(A_1)^2 | a] = 5 M^2 + 2 (kurt_w - 3) l4 + 5 nu2 M + nu4/2 - nu2^2/4,
// where l4 = ||a||_4^4 / n^2 and nu2, nu4 are raw bias moments. Reduces to
// 5 M^2 / n_next for Gaussian weights with zero bias.
double conditional_variance_exact(double m, double l4, int n_next, const dists::MomentSet& weights,
                                  const dists::MomentSet& biases);

// Same layer schema as the ensemble CSV/JSON. `vb` may be null; the bound
// columns are then left blank (CSV) or null (JSON).
std::string prediction_to_csv(const netgen::Architecture& a, const MeanPrediction& mp,
                              const VarianceBounds* vb);
std::string prediction_to_json(const netgen::Architecture& a, const MeanPrediction& mp,
                               const VarianceBounds* vb);

}  // namespace lsl::theory
