#include "lsl/theory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <variant>

#include "json.hpp"

namespace lsl::theory {
namespace {

constexpr double kKappaTol = 1e-9;

const netgen::FcArch& require_fc(const netgen::Architecture& a, const char* op) {
  const auto* fc = std::get_if<netgen::FcArch>(&a);
  if (!fc) throw std::invalid_argument(std::string(op) + ": FC architecture required");
  return *fc;
}

struct LayerMoments {
  double kappa = 0.0;
  double nu2 = 0.0;
  double nu4 = 0.0;
  double weight_kurt = 3.0;
};

LayerMoments layer_moments(const dists::InitScheme& s, int fan_in, int fan_out) {
  const dists::LayerInit init = dists::resolve_layer(s, fan_in, fan_out);
  const dists::MomentSet w = dists::moments(init.weights);
  const dists::MomentSet b = dists::moments(init.biases);
  LayerMoments out;
  out.kappa = dists::scheme_kappa(s, fan_in, fan_out);
  out.nu2 = b.mu2;
  out.nu4 = b.mu4;
  out.weight_kurt = w.kurt;
  return out;
}

std::string fmt(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

MeanPrediction predict_mean_fc(const netgen::Architecture& a, const dists::InitScheme& s,
                               double m0) {
  const auto& fc = require_fc(a, "predict_mean_fc");
  netgen::validate(a);
  if (!(m0 >= 0.0)) throw std::invalid_argument("predict_mean_fc: M0 must be >= 0");
  const int d = static_cast<int>(fc.widths.size()) - 1;
  MeanPrediction mp;
  mp.mean.assign(static_cast<std::size_t>(d) + 1, 0.0);
  mp.kappa.assign(static_cast<std::size_t>(d) + 1, 1.0);
  mp.bias_mu2.assign(static_cast<std::size_t>(d) + 1, 0.0);
  mp.mean[0] = m0;
  for (int j = 1; j <= d; ++j) {
    const LayerMoments lm = layer_moments(s, netgen::fan_in(a, j), netgen::fan_out(a, j));
    mp.kappa[static_cast<std::size_t>(j)] = lm.kappa;
    mp.bias_mu2[static_cast<std::size_t>(j)] = lm.nu2;
    mp.mean[static_cast<std::size_t>(j)] =
        lm.kappa * mp.mean[static_cast<std::size_t>(j) - 1] + 0.5 * lm.nu2;
  }
  return mp;
}

VarianceBounds variance_bounds_fc(const netgen::Architecture& a, const dists::InitScheme& s,
                                  double m0) {
  const auto& fc = require_fc(a, "variance_bounds_fc");
  netgen::validate(a);
  if (std::abs(m0 - 1.0) > 1e-12)
    throw std::domain_error("variance_bounds_fc: bounds require M0 = 1");
  const int d = static_cast<int>(fc.widths.size()) - 1;

  double bias_sum = 0.0, bias_sq_sum = 0.0, nu4_max = 0.0, kurt_dev = 0.0;
  std::vector<double> recip(static_cast<std::size_t>(d) + 1, 0.0);
  for (int j = 1; j <= d; ++j) {
    const LayerMoments lm = layer_moments(s, netgen::fan_in(a, j), netgen::fan_out(a, j));
    if (std::abs(lm.kappa - 1.0) > kKappaTol)
      throw std::domain_error("variance_bounds_fc: layer " + std::to_string(j) + " has kappa " +
                              fmt(lm.kappa) + "; bounds hold only at the critical variance");
    bias_sum += lm.nu2;
    bias_sq_sum += lm.nu2 * lm.nu2;
    nu4_max = std::max(nu4_max, lm.nu4);
    kurt_dev = std::max(kurt_dev, std::abs(lm.weight_kurt - 3.0));
    recip[static_cast<std::size_t>(j)] = 1.0 / static_cast<double>(fc.widths[static_cast<std::size_t>(j)]);
  }

  // Envelope constants traced from the second-moment recursion: for Gaussian
  // weights, zero biases, and M0 = 1 they reduce to (c1, c2) = (5, 4).
  const double s_star = std::max(bias_sum, 1.0);
  const double q_star = std::max(bias_sq_sum, 1.0);
  const double nu4_star = std::max(nu4_max, 1.0);
  VarianceBounds vb;
  vb.c1 = 1.0 + m0 * m0 + (m0 + s_star) * s_star + q_star;
  vb.c2 = std::max({1.0, 0.25 * nu4_star, 2.0 * kurt_dev}) * (2.0 + m0 + s_star);
  vb.beta = sum_reciprocal_widths(a);
  vb.lower.assign(static_cast<std::size_t>(d) + 1, 0.0);
  vb.upper.assign(static_cast<std::size_t>(d) + 1, 0.0);
  double sum = 0.0;
  for (int j = 0; j <= d; ++j) {
    sum += recip[static_cast<std::size_t>(j)];
    vb.lower[static_cast<std::size_t>(j)] = std::exp(0.5 * sum);
    vb.upper[static_cast<std::size_t>(j)] = vb.c1 * std::exp(vb.c2 * sum);
  }
  return vb;
}

EmpVarBounds empvar_bounds_fc(const netgen::Architecture& a, const dists::InitScheme& s) {
  const auto& fc = require_fc(a, "empvar_bounds_fc");
  netgen::validate(a);
  const int d = static_cast<int>(fc.widths.size()) - 1;
  for (int j = 1; j <= d; ++j) {
    const LayerMoments lm = layer_moments(s, netgen::fan_in(a, j), netgen::fan_out(a, j));
    if (lm.nu2 != 0.0) throw std::domain_error("empvar_bounds_fc: bounds require zero biases");
  }
  const VarianceBounds vb = variance_bounds_fc(a, s, 1.0);

  EmpVarBounds eb;
  eb.beta = vb.beta;
  eb.c_upper = vb.c2;
  auto sandwich = [&](double c) {
    double total = 0.0;
    for (int j = 1; j <= d; ++j) {
      double tail = 0.0;
      for (int k = j; k <= d - 1; ++k) tail += 1.0 / static_cast<double>(fc.widths[static_cast<std::size_t>(k)]);
      total += (static_cast<double>(j) - 1.0) / static_cast<double>(d) * std::exp(c * tail);
    }
    return c / static_cast<double>(d) * total;
  };
  eb.lower = sandwich(eb.c_lower);
  eb.upper = sandwich(eb.c_upper);
  return eb;
}

double sum_reciprocal_widths(const netgen::Architecture& a) {
  const auto& fc = require_fc(a, "sum_reciprocal_widths");
  if (fc.widths.size() < 3) return 0.0;
  // summed in sorted order so permuting the hidden widths is bit-exact
  std::vector<int> hidden(fc.widths.begin() + 1, fc.widths.end() - 1);
  std::sort(hidden.begin(), hidden.end());
  double beta = 0.0;
  for (int n : hidden) beta += 1.0 / static_cast<double>(n);
  return beta;
}

int optimal_constant_width(int depth, double budget, BudgetKind kind) {
  if (depth < 1) throw std::invalid_argument("optimal_constant_width: depth must be >= 1");
  if (!(budget > 0.0)) throw std::invalid_argument("optimal_constant_width: budget must be > 0");
  const double per_layer = budget / static_cast<double>(depth);
  const double w = kind == BudgetKind::neurons ? per_layer : std::sqrt(per_layer);
  const int width = static_cast<int>(std::floor(w + 1e-9));
  if (width < 1) throw std::invalid_argument("optimal_constant_width: budget infeasible for width 1");
  return width;
}

ResnetBounds resnet_growth_bounds(const netgen::ScaleSchedule& schedule, int module_width) {
  if (module_width < 1)
    throw std::invalid_argument("resnet_growth_bounds: module width must be >= 1");
  const std::vector<double> etas = schedule.scales();
  ResnetBounds rb;
  rb.lower.assign(etas.size() + 1, 1.0);
  rb.upper.assign(etas.size() + 1, 1.0);
  const double root2 = std::sqrt(2.0);
  for (std::size_t l = 0; l < etas.size(); ++l) {
    const double eta = etas[l];
    if (!(eta >= 0.0) || eta >= 1.0)
      throw std::domain_error("resnet_growth_bounds: scale " + fmt(eta) +
                              " outside [0, 1); the growth bounds need eta < 1");
    rb.scale_sum += eta;
    rb.lower[l + 1] = rb.lower[l] * (1.0 + eta * eta);
    rb.upper[l + 1] = rb.upper[l] * (1.0 + root2 * eta + eta * eta);
  }
  switch (schedule.kind) {
    case netgen::ScaleKind::constant:
      rb.bounded = schedule.value == 0.0;
      break;
    case netgen::ScaleKind::geometric:
      rb.bounded = schedule.value < 1.0;
      break;
    case netgen::ScaleKind::explicit_list:
      rb.bounded = true;  // the prescribed series is the finite list itself
      break;
  }
  return rb;
}

double conditional_variance_exact(double m, double l4, int n_next,
                                  const dists::MomentSet& weights,
                                  const dists::MomentSet& biases) {
  if (m < 0.0 || l4 < 0.0)
    throw std::invalid_argument("conditional_variance_exact: M and l4 must be >= 0");
  if (n_next < 1) throw std::invalid_argument("conditional_variance_exact: n_next must be >= 1");
  const double nu2 = biases.mu2, nu4 = biases.mu4;
  const double var = 5.0 * m * m + 2.0 * (weights.kurt - 3.0) * l4 + 5.0 * nu2 * m + 0.5 * nu4 -
                     0.25 * nu2 * nu2;
  return var / static_cast<double>(n_next);
}

std::string prediction_to_csv(const netgen::Architecture& a, const MeanPrediction& mp,
                              const VarianceBounds* vb) {
  std::string out = "layer,n_layer,theory_mean,theory_var_lo,theory_var_hi\n";
  for (std::size_t j = 0; j < mp.mean.size(); ++j) {
    out += std::to_string(j);
    out += ',' + std::to_string(netgen::layer_units(a, static_cast<int>(j)));
    out += ',' + fmt(mp.mean[j]);
    out += ',';
    if (vb) out += fmt(vb->lower[j]);
    out += ',';
    if (vb) out += fmt(vb->upper[j]);
    out += '\n';
  }
  return out;
}

std::string prediction_to_json(const netgen::Architecture& a, const MeanPrediction& mp,
                               const VarianceBounds* vb) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (std::size_t idx = 0; idx < mp.mean.size(); ++idx) {
    nlohmann::ordered_json row;
    row["layer"] = idx;
    row["n_layer"] = netgen::layer_units(a, static_cast<int>(idx));
    row["theory_mean"] = mp.mean[idx];
    if (vb) {
      row["theory_var_lo"] = vb->lower[idx];
      row["theory_var_hi"] = vb->upper[idx];
    } else {
      row["theory_var_lo"] = nullptr;
      row["theory_var_hi"] = nullptr;
    }
    row["kappa"] = mp.kappa[idx];
    layers.push_back(row);
  }
  j["layers"] = layers;
  if (vb) {
    j["c1"] = vb->c1;
    j["c2"] = vb->c2;
    j["beta"] = vb->beta;
  }
  return j.dump(2) + "\n";
}

}  // namespace lsl::theory
