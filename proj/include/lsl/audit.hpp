#pragma once
#include <string>
#include <vector>

#include "lsl/dists.hpp"
#include "lsl/netgen.hpp"

namespace lsl::audit {

enum class Verdict { ok, caution, vanishing, exploding, high };

std::string verdict_name(Verdict v);

// Verdicts are a pure function of (architecture, scheme); no sampling.
struct AuditReport {
  std::string arch_type;      // "fc", "conv", "residual"
  std::vector<double> kappa;  // per layer, index 0 is a placeholder 1
  Verdict fm1 = Verdict::ok;
  double predicted_ratio = 1.0;  // product of kappa = E[M_d]/M0 at zero bias
  double beta = 0.0;             // FC/conv: sum of reciprocal hidden-layer sizes
  Verdict fm2 = Verdict::ok;
  double scale_sum = 0.0;        // residual only
  bool fm2_implied_safe = false;  // residual: safe given FM1 and per-module audit
  std::vector<std::string> recommendations;  // stable codes, see README
};

// FM1: ok iff max_j |kappa_j - 1| <= 1e-9 (FC/conv), or scale_sum <= 3
// (residual, caution up to 10, exploding beyond). FM2: beta thresholds
// ok < 0.5 <= caution < 2.0 <= high.
AuditReport audit(const netgen::Architecture& a, const dists::InitScheme& s);

// Smallest constant hidden width n with (depth-1)/n <= target_beta.
int recommend_width(int depth, double target_beta);

// eta_l = b^l with b in (0,1) solved so that the L-term sum hits target_sum
// within 1e-10. target_sum >= L is infeasible (b would reach 1) and throws.
std::vector<double> recommend_scales(int length, double target_sum);

std::string report_to_json(const AuditReport& r);
std::string report_to_text(const AuditReport& r);

}  // namespace lsl::audit
