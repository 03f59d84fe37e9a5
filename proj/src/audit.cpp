#include "lsl/audit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <variant>

#include "json.hpp"

namespace lsl::audit {
namespace {

constexpr double kKappaTol = 1e-9;
constexpr double kBetaCaution = 0.5;
constexpr double kBetaHigh = 2.0;
constexpr double kScaleSumOk = 3.0;
constexpr double kScaleSumCaution = 10.0;

std::string fmt(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Verdict fm2_from_beta(double beta) {
  if (beta < kBetaCaution) return Verdict::ok;
  if (beta < kBetaHigh) return Verdict::caution;
  return Verdict::high;
}

// kappa per layer plus the FM1 verdict shared by the FC and conv paths
void feedforward_fm1(const netgen::Architecture& a, const dists::InitScheme& s, AuditReport& r) {
  const int d = netgen::num_layers(a);
  r.kappa.assign(static_cast<std::size_t>(d) + 1, 1.0);
  double max_dev = 0.0;
  r.predicted_ratio = 1.0;
  for (int j = 1; j <= d; ++j) {
    const double kappa = dists::scheme_kappa(s, netgen::fan_in(a, j), netgen::fan_out(a, j));
    r.kappa[static_cast<std::size_t>(j)] = kappa;
    r.predicted_ratio *= kappa;
    max_dev = std::max(max_dev, std::abs(kappa - 1.0));
  }
  if (max_dev <= kKappaTol)
    r.fm1 = Verdict::ok;
  else
    r.fm1 = r.predicted_ratio < 1.0 ? Verdict::vanishing : Verdict::exploding;
}

// hidden-layer beta generalized by unit count; matches sum_reciprocal_widths on FC
double beta_by_units(const netgen::Architecture& a) {
  const int d = netgen::num_layers(a);
  double beta = 0.0;
  for (int j = 1; j <= d - 1; ++j) beta += 1.0 / static_cast<double>(netgen::layer_units(a, j));
  return beta;
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ok: return "ok";
    case Verdict::caution: return "caution";
    case Verdict::vanishing: return "vanishing";
    case Verdict::exploding: return "exploding";
    case Verdict::high: return "high";
  }
  return "unknown";
}

AuditReport audit(const netgen::Architecture& a, const dists::InitScheme& s) {
  netgen::validate(a);
  AuditReport r;
  if (const auto* res = std::get_if<netgen::ResidualArch>(&a)) {
    r.arch_type = "residual";
    const std::vector<double> etas = res->schedule.scales();
    for (double e : etas) {
      if (!(e > 0.0)) throw std::invalid_argument("audit: residual scales must be positive");
      r.scale_sum += e;
    }
    if (r.scale_sum <= kScaleSumOk)
      r.fm1 = Verdict::ok;
    else if (r.scale_sum <= kScaleSumCaution)
      r.fm1 = Verdict::caution;
    else
      r.fm1 = Verdict::exploding;

    netgen::FcArch module;
    module.widths.assign(static_cast<std::size_t>(res->module_depth) + 1, res->width);
    const AuditReport module_report = audit(netgen::Architecture{module}, s);
    r.kappa = module_report.kappa;
    r.predicted_ratio = module_report.predicted_ratio;
    r.beta = module_report.beta;
    r.fm2_implied_safe = r.fm1 == Verdict::ok && module_report.fm1 == Verdict::ok &&
                         module_report.fm2 == Verdict::ok;
    r.fm2 = r.fm2_implied_safe ? Verdict::ok : Verdict::caution;
    if (r.fm1 != Verdict::ok) r.recommendations.push_back("GEOMETRIC_SCALES");
    if (module_report.fm1 != Verdict::ok) r.recommendations.push_back("SET_CRITICAL_VARIANCE");
    return r;
  }

  r.arch_type = std::holds_alternative<netgen::FcArch>(a) ? "fc" : "conv";
  feedforward_fm1(a, s, r);
  r.beta = beta_by_units(a);
  r.fm2 = fm2_from_beta(r.beta);
  if (r.fm1 != Verdict::ok) r.recommendations.push_back("SET_CRITICAL_VARIANCE");
  if (r.fm2 != Verdict::ok) r.recommendations.push_back("WIDEN_TO_BETA");
  return r;
}

int recommend_width(int depth, double target_beta) {
  if (depth < 2) throw std::invalid_argument("recommend_width: depth must be >= 2");
  if (!(target_beta > 0.0)) throw std::invalid_argument("recommend_width: target beta must be > 0");
  const double hidden = static_cast<double>(depth - 1);
  int n = static_cast<int>(std::ceil(hidden / target_beta - 1e-9));
  if (n < 1) n = 1;
  while (hidden / static_cast<double>(n) > target_beta + 1e-12) ++n;
  return n;
}

std::vector<double> recommend_scales(int length, double target_sum) {
  if (length < 1) throw std::invalid_argument("recommend_scales: L must be >= 1");
  if (!(target_sum > 0.0)) throw std::invalid_argument("recommend_scales: target sum must be > 0");
  if (target_sum >= static_cast<double>(length))
    throw std::invalid_argument("recommend_scales: target sum " + fmt(target_sum) +
                                " needs b >= 1 at L = " + std::to_string(length));
  auto series = [&](double b) {
    double sum = 0.0, term = 1.0;
    for (int l = 1; l <= length; ++l) {
      term *= b;
      sum += term;
    }
    return sum;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = series(mid);
    if (std::abs(s - target_sum) <= 1e-10) {
      lo = hi = mid;
      break;
    }
    (s < target_sum ? lo : hi) = mid;
  }
  const double b = 0.5 * (lo + hi);
  std::vector<double> etas(static_cast<std::size_t>(length));
  double term = 1.0;
  for (int l = 0; l < length; ++l) {
    term *= b;
    etas[static_cast<std::size_t>(l)] = term;
  }
  return etas;
}

std::string report_to_json(const AuditReport& r) {
  nlohmann::ordered_json j;
  j["arch_type"] = r.arch_type;
  j["fm1"] = verdict_name(r.fm1);
  j["predicted_ratio"] = r.predicted_ratio;
  j["kappa"] = std::vector<double>(r.kappa.begin() + (r.kappa.empty() ? 0 : 1), r.kappa.end());
  j["fm2"] = verdict_name(r.fm2);
  j["beta"] = r.beta;
  if (r.arch_type == "residual") {
    j["scale_sum"] = r.scale_sum;
    j["fm2_implied_safe"] = r.fm2_implied_safe;
  }
  j["recommendations"] = r.recommendations;
  return j.dump(2) + "\n";
}

std::string report_to_text(const AuditReport& r) {
  std::string out;
  out += "architecture : " + r.arch_type + "\n";
  if (r.arch_type == "residual") {
    out += "fm1          : " + verdict_name(r.fm1) + " (scale sum " + fmt(r.scale_sum) + ")\n";
    out += "fm2          : " + verdict_name(r.fm2) +
           (r.fm2_implied_safe ? " (implied safe: modules critical, scale sum bounded)" : "") +
           "\n";
    out += "module kappa : " + fmt(r.kappa.size() > 1 ? r.kappa[1] : 1.0) + "\n";
  } else {
    double max_dev = 0.0;
    for (std::size_t j = 1; j < r.kappa.size(); ++j)
      max_dev = std::max(max_dev, std::abs(r.kappa[j] - 1.0));
    out += "fm1          : " + verdict_name(r.fm1) + " (max |kappa-1| " + fmt(max_dev) +
           ", predicted end-to-end ratio " + fmt(r.predicted_ratio) + ")\n";
    out += "fm2          : " + verdict_name(r.fm2) + " (beta " + fmt(r.beta) + ")\n";
  }
  if (r.recommendations.empty()) {
    out += "recommend    : none\n";
  } else {
    out += "recommend    :";
    for (const std::string& c : r.recommendations) out += " " + c;
    out += "\n";
  }
  return out;
}

}  // namespace lsl::audit
