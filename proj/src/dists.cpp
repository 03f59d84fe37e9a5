#include "lsl/dists.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace lsl::dists {
namespace {

constexpr double kPi = 3.14159265358979323846;

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

// P(|X| <= c) for standard normal X
double central_mass(double c) { return std::erf(c / std::sqrt(2.0)); }

// Adaptive Simpson on [a, b].
template <typename F>
double simpson_step(const F& f, double a, double m, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double simpson_rec(const F& f, double a, double m, double b, double fa, double fm, double fb,
                   double whole, double eps, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson_step(f, a, lm, m, fa, flm, fm);
  const double right = simpson_step(f, m, rm, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double eps) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  return simpson_rec(f, a, m, b, fa, fm, fb, simpson_step(f, a, m, b, fa, fm, fb), eps, 48);
}

// E[X^4 | |X| <= c] for standard normal X, by quadrature (relative <= 1e-10).
double truncated_fourth_moment_std(double c) {
  const double mass = central_mass(c);
  const auto integrand = [](double x) {
    const double x2 = x * x;
    return x2 * x2 * std_normal_pdf(x);
  };
  // scale-aware absolute tolerance: the integral is below 3*mass
  const double raw = integrate(integrand, 0.0, c, 1e-13 * (1.0 + c * c * c));
  return 2.0 * raw / mass;
}

}  // namespace

double effective_truncation_factor(double cutoff) {
  if (!(cutoff > 0.0)) throw std::invalid_argument("effective_truncation_factor: cutoff must be > 0");
  const double z = central_mass(cutoff);
  return 1.0 - 2.0 * cutoff * std_normal_pdf(cutoff) / z;
}

MomentSet moments(const DistributionSpec& d) {
  MomentSet m;
  m.mu2 = d.variance;
  switch (d.kind) {
    case Kind::normal:
      m.mu4 = 3.0 * d.variance * d.variance;
      break;
    case Kind::uniform:
      m.mu4 = 1.8 * d.variance * d.variance;
      break;
    case Kind::rademacher:
      m.mu4 = d.variance * d.variance;
      break;
    case Kind::truncated_normal: {
      // variance is post-truncation; recover the pre-truncation scale first
      const double r = effective_truncation_factor(d.cutoff);
      const double pre_var = d.variance / r;
      m.mu4 = truncated_fourth_moment_std(d.cutoff) * pre_var * pre_var;
      break;
    }
    case Kind::point_mass_zero:
      m.mu2 = 0.0;
      m.mu4 = 0.0;
      break;
  }
  m.kurt = m.mu2 > 0.0 ? m.mu4 / (m.mu2 * m.mu2) : 3.0;
  return m;
}

LayerInit resolve_layer(const InitScheme& s, int fan_in, int fan_out) {
  if (fan_in < 1 || fan_out < 1)
    throw std::invalid_argument("resolve_layer: fan_in and fan_out must be positive");
  const double n = static_cast<double>(fan_in);
  LayerInit out;
  out.biases = s.bias;
  switch (s.name) {
    case SchemeName::he_normal:
      out.weights = {Kind::normal, 2.0 / n, 0.0};
      break;
    case SchemeName::he_uniform:
      out.weights = {Kind::uniform, 2.0 / n, 0.0};
      break;
    case SchemeName::he_normal_truncated2:
      out.weights = {Kind::truncated_normal, effective_truncation_factor(2.0) * 2.0 / n, 2.0};
      break;
    case SchemeName::lecun_normal:
      out.weights = {Kind::normal, 1.0 / n, 0.0};
      break;
    case SchemeName::lecun_uniform:
      out.weights = {Kind::uniform, 1.0 / n, 0.0};
      break;
    case SchemeName::glorot_normal:
      out.weights = {Kind::normal, 2.0 / (n + static_cast<double>(fan_out)), 0.0};
      break;
    case SchemeName::glorot_uniform:
      out.weights = {Kind::uniform, 2.0 / (n + static_cast<double>(fan_out)), 0.0};
      break;
    case SchemeName::scaled:
      if (!(s.kappa > 0.0)) throw std::invalid_argument("resolve_layer: kappa must be > 0");
      out.weights = {s.base, s.kappa * 2.0 / n, 0.0};
      break;
  }
  return out;
}

double scheme_kappa(const InitScheme& s, int fan_in, int fan_out) {
  if (fan_in < 1 || fan_out < 1)
    throw std::invalid_argument("scheme_kappa: fan_in and fan_out must be positive");
  switch (s.name) {
    case SchemeName::he_normal:
    case SchemeName::he_uniform:
      return 1.0;
    case SchemeName::he_normal_truncated2:
      return effective_truncation_factor(2.0);
    case SchemeName::lecun_normal:
    case SchemeName::lecun_uniform:
      return 0.5;
    case SchemeName::glorot_normal:
    case SchemeName::glorot_uniform:
      return static_cast<double>(fan_in) / static_cast<double>(fan_in + fan_out);
    case SchemeName::scaled:
      if (!(s.kappa > 0.0)) throw std::invalid_argument("scheme_kappa: kappa must be > 0");
      return s.kappa;
  }
  throw std::logic_error("scheme_kappa: unreachable");
}

double sample(const DistributionSpec& d, rng::Stream& rs) {
  switch (d.kind) {
    case Kind::normal:
      return rng::normal(rs) * std::sqrt(d.variance);
    case Kind::uniform:
      return (2.0 * rng::uniform_unit(rs) - 1.0) * std::sqrt(3.0 * d.variance);
    case Kind::rademacher: {
      const double s = std::sqrt(d.variance);
      return rng::uniform_unit(rs) < 0.5 ? -s : s;
    }
    case Kind::truncated_normal: {
      const double pre_sigma = std::sqrt(d.variance / effective_truncation_factor(d.cutoff));
      double x;
      do {
        x = rng::normal(rs);
      } while (std::abs(x) > d.cutoff);
      return x * pre_sigma;
    }
    case Kind::point_mass_zero:
      return 0.0;
  }
  throw std::logic_error("sample: unreachable");
}

InitScheme parse_scheme(const std::string& text) {
  InitScheme s;
  if (text == "he-normal") {
    s.name = SchemeName::he_normal;
  } else if (text == "he-uniform") {
    s.name = SchemeName::he_uniform;
  } else if (text == "he-normal-trunc2") {
    s.name = SchemeName::he_normal_truncated2;
  } else if (text == "lecun-normal") {
    s.name = SchemeName::lecun_normal;
  } else if (text == "lecun-uniform") {
    s.name = SchemeName::lecun_uniform;
  } else if (text == "glorot-normal") {
    s.name = SchemeName::glorot_normal;
  } else if (text == "glorot-uniform") {
    s.name = SchemeName::glorot_uniform;
  } else if (text.rfind("scaled:", 0) == 0) {
    const auto rest = text.substr(7);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("scheme: expected scaled:KAPPA:BASE, got '" + text + "'");
    std::size_t used = 0;
    double kappa;
    try {
      kappa = std::stod(rest.substr(0, colon), &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("scheme: bad kappa in '" + text + "'");
    }
    if (used != colon || !(kappa > 0.0))
      throw std::invalid_argument("scheme: bad kappa in '" + text + "'");
    const auto base = rest.substr(colon + 1);
    s.name = SchemeName::scaled;
    s.kappa = kappa;
    if (base == "normal") {
      s.base = Kind::normal;
    } else if (base == "uniform") {
      s.base = Kind::uniform;
    } else if (base == "rademacher") {
      s.base = Kind::rademacher;
    } else {
      throw std::invalid_argument("scheme: unknown base '" + base + "'");
    }
  } else {
    throw std::invalid_argument("scheme: unknown scheme '" + text + "'");
  }
  return s;
}

std::string scheme_name(const InitScheme& s) {
  switch (s.name) {
    case SchemeName::he_normal: return "he-normal";
    case SchemeName::he_uniform: return "he-uniform";
    case SchemeName::he_normal_truncated2: return "he-normal-trunc2";
    case SchemeName::lecun_normal: return "lecun-normal";
    case SchemeName::lecun_uniform: return "lecun-uniform";
    case SchemeName::glorot_normal: return "glorot-normal";
    case SchemeName::glorot_uniform: return "glorot-uniform";
    case SchemeName::scaled: {
      std::string base = s.base == Kind::normal    ? "normal"
                         : s.base == Kind::uniform ? "uniform"
                                                   : "rademacher";
      char buf[40];
      const auto res = std::to_chars(buf, buf + sizeof(buf), s.kappa);
      return "scaled:" + std::string(buf, res.ptr) + ":" + base;
    }
  }
  return "?";
}

}  // namespace lsl::dists
