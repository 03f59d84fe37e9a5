#pragma once
#include <cmath>
#include <cstdint>

namespace lsl::stats {

// Streaming central moments through order 4 (Pebay update formulas).
// Mergeable: merge() over any partition equals single-pass accumulation up to
// floating-point reassociation (~1e-10 relative at ensemble scale).
struct Moments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;  // sum (x - mean)^2
  double m3 = 0.0;
  double m4 = 0.0;

  void push(double x) {
    const double n1 = static_cast<double>(n);
    n += 1;
    const double nn = static_cast<double>(n);
    const double delta = x - mean;
    const double dn = delta / nn;
    const double dn2 = dn * dn;
    const double term1 = delta * dn * n1;
    mean += dn;
    m4 += term1 * dn2 * (nn * nn - 3.0 * nn + 3.0) + 6.0 * dn2 * m2 - 4.0 * dn * m3;
    m3 += term1 * dn * (nn - 2.0) - 3.0 * dn * m2;
    m2 += term1;
  }

  void merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
    const double nt = na + nb;
    const double d = o.mean - mean;
    const double d2 = d * d;
    const double m2a = m2, m2b = o.m2, m3a = m3, m3b = o.m3;
    mean += d * nb / nt;
    m4 += o.m4 + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (nt * nt * nt) +
          6.0 * d2 * (na * na * m2b + nb * nb * m2a) / (nt * nt) +
          4.0 * d * (na * m3b - nb * m3a) / nt;
    m3 += m3b + d * d2 * na * nb * (na - nb) / (nt * nt) + 3.0 * d * (na * m2b - nb * m2a) / nt;
    m2 += m2b + d2 * na * nb / nt;
    n += o.n;
  }

  // unbiased sample variance
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double se_mean() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }

  double second_central() const { return n > 0 ? m2 / static_cast<double>(n) : 0.0; }
  double third_central() const { return n > 0 ? m3 / static_cast<double>(n) : 0.0; }
  double fourth_central() const { return n > 0 ? m4 / static_cast<double>(n) : 0.0; }

  // asymptotic standard error of the variance estimate
  double se_variance() const {
    if (n < 2) return 0.0;
    const double v = second_central();
    double var_of_var = fourth_central() - v * v;
    if (var_of_var < 0.0) var_of_var = 0.0;
    return std::sqrt(var_of_var / static_cast<double>(n));
  }

  // estimate of E[x^2] and its standard error
  double mean_sq() const { return second_central() + mean * mean; }
  double se_mean_sq() const {
    if (n < 2) return 0.0;
    const double mu = mean, v = second_central();
    const double raw4 =
        fourth_central() + 4.0 * mu * third_central() + 6.0 * mu * mu * v + mu * mu * mu * mu;
    double var_sq = raw4 - mean_sq() * mean_sq();
    if (var_sq < 0.0) var_sq = 0.0;
    return std::sqrt(var_sq / static_cast<double>(n));
  }
};

}  // namespace lsl::stats
