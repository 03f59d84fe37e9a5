#include "lsl/verify.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "lsl/audit.hpp"
#include "lsl/forward.hpp"
#include "lsl/mc.hpp"
#include "lsl/netgen.hpp"
#include "lsl/rng.hpp"
#include "lsl/theory.hpp"

namespace lsl::verify {
namespace {

std::string fmtg(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::string(buf);
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t row) {
  return rng::hash64(seed ^ rng::hash64(0xABCD0000ULL + tag * 257 + row));
}

CheckRow z_row(const std::string& name, double estimate, double se, double expected,
               double zmax) {
  CheckRow r;
  r.name = name;
  const double z = se > 0.0 ? (estimate - expected) / se : (estimate == expected ? 0.0 : 1e18);
  r.pass = std::abs(z) <= zmax;
  r.detail = "est " + fmtg(estimate) + "  expected " + fmtg(expected) + "  se " + fmtg(se) +
             "  z " + fmtg(z);
  return r;
}

CheckRow interval_row(const std::string& name, double estimate, double se, double lo, double hi,
                      double zmax) {
  CheckRow r;
  r.name = name;
  const double slack = zmax * se;
  r.pass = estimate + slack >= lo && estimate - slack <= hi;
  r.detail = "est " + fmtg(estimate) + " +- " + fmtg(slack) + "  bounds [" + fmtg(lo) + ", " +
             fmtg(hi) + "]";
  return r;
}

CheckRow exact_row(const std::string& name, double value, double expected, double tol) {
  CheckRow r;
  r.name = name;
  r.pass = std::abs(value - expected) <= tol;
  r.detail = "value " + fmtg(value) + "  expected " + fmtg(expected) + "  tol " + fmtg(tol);
  return r;
}

dists::InitScheme scheme_with_bias(const std::string& name, double bias_var) {
  dists::InitScheme s = dists::parse_scheme(name);
  if (bias_var > 0.0) s.bias = dists::DistributionSpec{dists::Kind::normal, bias_var, 0.0};
  return s;
}

mc::EnsembleStats run_fc(const std::vector<int>& widths, const dists::InitScheme& s,
                         std::uint64_t master, std::uint64_t trials, int threads) {
  mc::TrialPlan p;
  p.arch = netgen::FcArch{widths};
  p.scheme = s;
  p.input.kind = forward::InputKind::all_ones;
  p.input.norm = forward::Norm::m0_equals_1;
  p.trials = trials;
  p.master_seed = master;
  p.threads = threads;
  return mc::run_ensemble(p);
}

mc::EnsembleStats run_residual(const netgen::ScaleSchedule& schedule, int width,
                               const dists::InitScheme& s, std::uint64_t master,
                               std::uint64_t trials, int threads) {
  netgen::ResidualArch arch;
  arch.width = width;
  arch.module_depth = 1;
  arch.schedule = schedule;
  mc::TrialPlan p;
  p.arch = arch;
  p.scheme = s;
  p.input.kind = forward::InputKind::all_ones;
  p.input.norm = forward::Norm::m0_equals_1;
  p.trials = trials;
  p.master_seed = master;
  p.threads = threads;
  return mc::run_ensemble(p);
}

double vec_m(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s / static_cast<double>(a.size());
}

double vec_l4(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v * v * v;
  const double n = static_cast<double>(a.size());
  return s / (n * n);
}

SuiteResult suite_mean(const SuiteOptions& o) {
  SuiteResult res;
  res.suite = "mean";
  const std::uint64_t trials = o.trials ? o.trials : 10000;
  struct Case {
    const char* name;
    std::vector<int> widths;
    const char* scheme;
    double bias_var;
  };
  const std::vector<Case> cases = {
      {"fc-20x20-he-normal", std::vector<int>(21, 20), "he-normal", 0.0},
      {"fc-20x20-he-uniform", std::vector<int>(21, 20), "he-uniform", 0.0},
      {"fc-20x10-scaled-half", std::vector<int>(11, 20), "scaled:0.5:normal", 0.0},
      {"fc-20x4-bias-0.1", std::vector<int>(5, 20), "he-normal", 0.1},
      {"fc-30x12-trunc2", std::vector<int>(13, 30), "he-normal-trunc2", 0.0},
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const dists::InitScheme s = scheme_with_bias(c.scheme, c.bias_var);
    const netgen::Architecture arch = netgen::FcArch{c.widths};
    const theory::MeanPrediction mp = theory::predict_mean_fc(arch, s, 1.0);
    const mc::EnsembleStats es = run_fc(c.widths, s, sub_seed(o.seed, 1, i), trials, o.threads);
    const mc::LayerStats& last = es.layers.back();
    res.rows.push_back(z_row(c.name, last.m.mean, last.m.se_mean(), mp.mean.back(), 5.0));
  }
  return res;
}

SuiteResult suite_variance(const SuiteOptions& o) {
  SuiteResult res;
  res.suite = "variance";
  const std::uint64_t trials = o.trials ? o.trials : 100000;
  const dists::InitScheme s = dists::parse_scheme("he-normal");
  const std::vector<std::vector<int>> archs = {std::vector<int>(21, 20), std::vector<int>(9, 15)};
  const char* names[] = {"fc-20x20-msq-bounds", "fc-15x8-msq-bounds"};
  for (std::size_t i = 0; i < archs.size(); ++i) {
    const netgen::Architecture arch = netgen::FcArch{archs[i]};
    const theory::VarianceBounds vb = theory::variance_bounds_fc(arch, s, 1.0);
    const mc::EnsembleStats es = run_fc(archs[i], s, sub_seed(o.seed, 2, i), trials, o.threads);
    const mc::LayerStats& last = es.layers.back();
    res.rows.push_back(interval_row(names[i], last.m.mean_sq(), last.m.se_mean_sq(),
                                    vb.lower.back(), vb.upper.back(), 5.0));
    if (i == 0) {
      res.rows.push_back(exact_row("gaussian-constants-c1", vb.c1, 5.0, 0.0));
      res.rows.push_back(exact_row("gaussian-constants-c2", vb.c2, 4.0, 0.0));
    }
  }
  return res;
}

SuiteResult suite_empvar(const SuiteOptions& o) {
  SuiteResult res;
  res.suite = "empvar";
  const std::uint64_t trials = o.trials ? o.trials : 100000;
  const dists::InitScheme s = dists::parse_scheme("he-normal");

  const std::vector<int> base(9, 15);
  const netgen::Architecture base_arch = netgen::FcArch{base};
  const theory::EmpVarBounds eb = theory::empvar_bounds_fc(base_arch, s);
  const mc::EnsembleStats es = run_fc(base, s, sub_seed(o.seed, 3, 0), trials, o.threads);
  res.rows.push_back(interval_row("fc-15x8-empvar-bounds", es.emp_var.mean, es.emp_var.se_mean(),
                                  eb.lower, eb.upper, 5.0));

  // same beta, same depth: alternating 30/10 versus constant 15
  const std::vector<int> alt = {15, 30, 10, 30, 10, 15};
  const std::vector<int> cst = {15, 15, 15, 15, 15, 15};
  const mc::EnsembleStats ea = run_fc(alt, s, sub_seed(o.seed, 3, 1), trials, o.threads);
  const mc::EnsembleStats ec = run_fc(cst, s, sub_seed(o.seed, 3, 2), trials, o.threads);
  const double dse = std::sqrt(ea.emp_var.se_mean() * ea.emp_var.se_mean() +
                               ec.emp_var.se_mean() * ec.emp_var.se_mean());
  res.rows.push_back(
      z_row("equal-beta-30/10-vs-15", ea.emp_var.mean - ec.emp_var.mean, dse, 0.0, 5.0));
  res.rows.push_back(exact_row("equal-beta-exact",
                               theory::sum_reciprocal_widths(netgen::Architecture{netgen::FcArch{alt}}) -
                                   theory::sum_reciprocal_widths(netgen::Architecture{netgen::FcArch{cst}}),
                               0.0, 1e-15));
  return res;
}

SuiteResult suite_martingale(const SuiteOptions& o) {
  SuiteResult res;
  res.suite = "martingale";
  const std::uint64_t samples = o.trials ? o.trials : 100000;
  const std::vector<double> ones10(10, 1.0);
  std::vector<double> ramp10(10);
  for (int i = 0; i < 10; ++i) ramp10[static_cast<std::size_t>(i)] = 0.1 * (i + 1);
  std::vector<double> spike9(9, 0.0);
  spike9[0] = 3.0;
  struct Case {
    const char* name;
    const std::vector<double>* a;
    int n_next;
    double bias_var;
  };
  const std::vector<Case> cases = {
      {"ones10-to-1", &ones10, 1, 0.0},    {"ones10-to-50", &ones10, 50, 0.0},
      {"ramp10-to-5", &ramp10, 5, 0.0},    {"ramp10-to-50", &ramp10, 50, 0.0},
      {"spike9-to-1", &spike9, 1, 0.0},    {"spike9-to-5", &spike9, 5, 0.0},
      {"ones10-bias-0.1", &ones10, 5, 0.1}, {"ramp10-bias-0.2", &ramp10, 5, 0.2},
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const dists::InitScheme s = scheme_with_bias("he-normal", c.bias_var);
    const mc::ConditionalStats cs =
        mc::conditional_step_stats(*c.a, c.n_next, s, samples, sub_seed(o.seed, 4, i));
    const double expected = vec_m(*c.a) + 0.5 * c.bias_var;
    res.rows.push_back(z_row(c.name, cs.mean, cs.se_mean, expected, 5.0));
  }
  return res;
}

SuiteResult suite_condvar(const SuiteOptions& o) {
  SuiteResult res;
  res.suite = "condvar";
  const std::uint64_t samples = o.trials ? o.trials : 100000;
  const std::vector<double> ones9(9, 1.0);
  std::vector<double> ramp9(9);
  for (int i = 0; i < 9; ++i) ramp9[static_cast<std::size_t>(i)] = 0.25 * (i + 1);
  struct Case {
    const char* name;
    const char* scheme;
    double bias_var;
    const std::vector<double>* a;
  };
  const std::vector<Case> cases = {
      {"gauss-zero-ones", "he-normal", 0.0, &ones9},
      {"gauss-bias-ramp", "he-normal", 0.2, &ramp9},
      {"uniform-zero-ramp", "he-uniform", 0.0, &ramp9},
      {"uniform-bias-ones", "he-uniform", 0.2, &ones9},
      {"rademacher-zero-ones", "scaled:1.0:rademacher", 0.0, &ones9},
      {"rademacher-bias-ramp", "scaled:1.0:rademacher", 0.2, &ramp9},
  };
  const int n_next = 7;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const dists::InitScheme s = scheme_with_bias(c.scheme, c.bias_var);
    const dists::LayerInit init =
        dists::resolve_layer(s, static_cast<int>(c.a->size()), n_next);
    const double exact = theory::conditional_variance_exact(
        vec_m(*c.a), vec_l4(*c.a), n_next, dists::moments(init.weights),
        dists::moments(init.biases));
    const mc::ConditionalStats cs =
        mc::conditional_step_stats(*c.a, n_next, s, samples, sub_seed(o.seed, 5, i));
    res.rows.push_back(z_row(c.name, cs.variance, cs.se_variance, exact, 5.0));
  }
  const dists::MomentSet gauss_w{2.0 / 9.0, 3.0 * (2.0 / 9.0) * (2.0 / 9.0), 3.0};
  const dists::MomentSet zero_b{0.0, 0.0, 3.0};
  res.rows.push_back(exact_row("gauss-reduction-5Msq",
                               theory::conditional_variance_exact(1.0, 0.5, 4, gauss_w, zero_b),
                               1.25, 1e-12));
  const dists::MomentSet rad_w{1.0, 1.0, 1.0};
  res.rows.push_back(exact_row("rademacher-unit",
                               theory::conditional_variance_exact(1.0, 1.0, 1, rad_w, zero_b),
                               1.0, 1e-12));
  return res;
}

SuiteResult suite_resnet(const SuiteOptions& o) {
  SuiteResult res;
  res.suite = "resnet";
  const std::uint64_t trials = o.trials ? o.trials : 10000;
  const dists::InitScheme s = dists::parse_scheme("he-normal");

  netgen::ScaleSchedule geom;
  geom.kind = netgen::ScaleKind::geometric;
  geom.value = 0.5;
  geom.count = 20;
  const theory::ResnetBounds gb = theory::resnet_growth_bounds(geom, 5);
  const mc::EnsembleStats ge = run_residual(geom, 5, s, sub_seed(o.seed, 6, 0), trials, o.threads);
  res.rows.push_back(interval_row("geometric-b0.5-L20", ge.layers.back().m.mean,
                                  ge.layers.back().m.se_mean(), gb.lower.back(), gb.upper.back(),
                                  5.0));
  res.rows.push_back(exact_row("geometric-scale-sum", gb.scale_sum,
                               1.0 - std::ldexp(1.0, -20), 1e-15));

  netgen::ScaleSchedule cst;
  cst.kind = netgen::ScaleKind::constant;
  cst.value = 0.9;
  cst.count = 15;
  const theory::ResnetBounds cb = theory::resnet_growth_bounds(cst, 5);
  const mc::EnsembleStats ce = run_residual(cst, 5, s, sub_seed(o.seed, 6, 1), trials, o.threads);
  res.rows.push_back(interval_row("constant-0.9-L15", ce.layers.back().m.mean,
                                  ce.layers.back().m.se_mean(), cb.lower.back(), cb.upper.back(),
                                  5.0));
  return res;
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"mean", "variance", "empvar", "martingale", "condvar", "resnet"};
}

bool is_suite(const std::string& name) {
  if (name == "all") return true;
  for (const std::string& s : suite_names())
    if (s == name) return true;
  return false;
}

std::vector<SuiteResult> run_suites(const std::string& name, const SuiteOptions& opts) {
  std::vector<SuiteResult> out;
  auto run_one = [&](const std::string& s) {
    SuiteResult r;
    if (s == "mean")
      r = suite_mean(opts);
    else if (s == "variance")
      r = suite_variance(opts);
    else if (s == "empvar")
      r = suite_empvar(opts);
    else if (s == "martingale")
      r = suite_martingale(opts);
    else if (s == "condvar")
      r = suite_condvar(opts);
    else if (s == "resnet")
      r = suite_resnet(opts);
    else
      throw std::invalid_argument("verify: unknown suite '" + s + "'");
    r.pass = true;
    for (const CheckRow& row : r.rows) r.pass = r.pass && row.pass;
    out.push_back(std::move(r));
  };
  if (name == "all") {
    for (const std::string& s : suite_names()) run_one(s);
  } else {
    run_one(name);
  }
  return out;
}

std::string table(const SuiteResult& r) {
  std::string out = "suite " + r.suite + "\n";
  for (const CheckRow& row : r.rows) {
    out += row.pass ? "  [PASS] " : "  [FAIL] ";
    std::string name = row.name;
    if (name.size() < 26) name.resize(26, ' ');
    out += name + " " + row.detail + "\n";
  }
  out += "suite " + r.suite + ": ";
  out += r.pass ? "PASS" : "FAIL";
  out += "\n";
  return out;
}

}  // namespace lsl::verify
