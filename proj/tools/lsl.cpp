#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lsl/audit.hpp"
#include "lsl/dists.hpp"
#include "lsl/forward.hpp"
#include "lsl/mc.hpp"
#include "lsl/netgen.hpp"
#include "lsl/theory.hpp"
#include "lsl/verify.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

struct CommonArgs {
  std::string arch_path;
  std::string init = "he-normal";
  double bias_var = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 1;
  std::string precision = "f64";
  std::string input = "ones";
  std::string norm = "m0";
  std::string out;
  std::string format = "csv";
  std::string suite = "all";
  bool resample = false;
};

lsl::dists::InitScheme make_scheme(const CommonArgs& a) {
  lsl::dists::InitScheme s = lsl::dists::parse_scheme(a.init);
  if (a.bias_var < 0.0) throw std::invalid_argument("--bias-var must be >= 0");
  if (a.bias_var > 0.0)
    s.bias = lsl::dists::DistributionSpec{lsl::dists::Kind::normal, a.bias_var, 0.0};
  return s;
}

lsl::forward::InputSpec make_input_spec(const CommonArgs& a) {
  lsl::forward::InputSpec spec;
  if (a.norm == "m0")
    spec.norm = lsl::forward::Norm::m0_equals_1;
  else if (a.norm == "unit")
    spec.norm = lsl::forward::Norm::unit_norm;
  else
    throw std::invalid_argument("--norm must be 'm0' or 'unit'");
  if (a.input == "ones") {
    spec.kind = lsl::forward::InputKind::all_ones;
  } else if (a.input == "sphere") {
    spec.kind = lsl::forward::InputKind::unit_sphere_random;
  } else if (a.input.rfind("file:", 0) == 0) {
    spec.kind = lsl::forward::InputKind::explicit_vec;
    std::istringstream ss(read_file(a.input.substr(5)));
    double v;
    while (ss >> v) spec.data.push_back(v);
    if (!ss.eof()) throw std::invalid_argument("--input file: non-numeric data");
    if (spec.data.empty()) throw std::invalid_argument("--input file: no values");
  } else {
    throw std::invalid_argument("--input must be 'ones', 'sphere', or 'file:PATH'");
  }
  return spec;
}

int run_simulate(const CommonArgs& a) {
  lsl::mc::TrialPlan plan;
  plan.arch = lsl::netgen::arch_from_json(read_file(a.arch_path));
  plan.scheme = make_scheme(a);
  plan.input = make_input_spec(a);
  plan.trials = a.trials ? a.trials : 1000;
  plan.master_seed = a.seed;
  plan.precision = a.precision == "f32" ? lsl::mc::Precision::f32 : lsl::mc::Precision::f64;
  plan.resample_input = a.resample;
  const lsl::mc::EnsembleStats es = lsl::mc::run_ensemble(plan);
  write_output(a.out, a.format == "json" ? lsl::mc::to_json(es) : lsl::mc::to_csv(es));
  return 0;
}

int run_predict(const CommonArgs& a) {
  const lsl::netgen::Architecture arch = lsl::netgen::arch_from_json(read_file(a.arch_path));
  const lsl::dists::InitScheme scheme = make_scheme(a);
  const double m0 =
      a.norm == "unit" ? 1.0 / static_cast<double>(lsl::netgen::layer_units(arch, 0)) : 1.0;
  const lsl::theory::MeanPrediction mp = lsl::theory::predict_mean_fc(arch, scheme, m0);
  const lsl::theory::VarianceBounds* vbp = nullptr;
  lsl::theory::VarianceBounds vb;
  try {
    vb = lsl::theory::variance_bounds_fc(arch, scheme, m0);
    vbp = &vb;
  } catch (const std::domain_error&) {
    // bounds need kappa = 1 and M0 = 1; emit blank bound columns otherwise
  }
  write_output(a.out, a.format == "json" ? lsl::theory::prediction_to_json(arch, mp, vbp)
                                         : lsl::theory::prediction_to_csv(arch, mp, vbp));
  return 0;
}

int run_audit(const CommonArgs& a) {
  const lsl::netgen::Architecture arch = lsl::netgen::arch_from_json(read_file(a.arch_path));
  const lsl::audit::AuditReport r = lsl::audit::audit(arch, make_scheme(a));
  write_output(a.out, a.format == "json" ? lsl::audit::report_to_json(r)
                                         : lsl::audit::report_to_text(r));
  return 0;
}

int run_verify(const CommonArgs& a) {
  if (!lsl::verify::is_suite(a.suite))
    throw std::invalid_argument("--suite must be one of mean, variance, empvar, martingale, "
                                "condvar, resnet, all");
  lsl::verify::SuiteOptions opts;
  opts.seed = a.seed;
  opts.trials = a.trials;
  const std::vector<lsl::verify::SuiteResult> results = lsl::verify::run_suites(a.suite, opts);
  std::string text;
  bool pass = true;
  for (const auto& r : results) {
    text += lsl::verify::table(r);
    pass = pass && r.pass;
  }
  write_output(a.out, text);
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"activation length-scale laboratory"};
  app.require_subcommand(1);
  CommonArgs a;

  auto add_output_flags = [&](CLI::App* c) {
    c->add_option("--out", a.out, "output path (default: stdout)");
    c->add_option("--format", a.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  };
  auto add_model_flags = [&](CLI::App* c) {
    c->add_option("--arch", a.arch_path, "architecture JSON path")->required();
    c->add_option("--init", a.init, "init scheme (default he-normal)");
    c->add_option("--bias-var", a.bias_var, "Gaussian bias variance (default 0, exact zero)");
  };

  CLI::App* sim = app.add_subcommand("simulate", "run a Monte Carlo ensemble");
  add_model_flags(sim);
  sim->add_option("--trials", a.trials, "trial count (default 1000)")
      ->check(CLI::PositiveNumber);
  sim->add_option("--seed", a.seed, "master seed (unsigned 64-bit)");
  sim->add_option("--precision", a.precision, "f32 or f64")
      ->check(CLI::IsMember({"f32", "f64"}));
  sim->add_option("--input", a.input, "ones, sphere, or file:PATH");
  sim->add_option("--norm", a.norm, "m0 (M0 = 1) or unit (norm 1)");
  sim->add_flag("--resample-input", a.resample, "redraw the input each trial");
  add_output_flags(sim);

  CLI::App* pred = app.add_subcommand("predict", "closed-form mean and bound predictions");
  add_model_flags(pred);
  pred->add_option("--norm", a.norm, "m0 (M0 = 1) or unit (norm 1)");
  add_output_flags(pred);

  CLI::App* aud = app.add_subcommand("audit", "FM1/FM2 risk audit");
  add_model_flags(aud);
  add_output_flags(aud);

  CLI::App* ver = app.add_subcommand("verify", "statistical self-check suites");
  ver->add_option("--suite", a.suite, "mean|variance|empvar|martingale|condvar|resnet|all");
  ver->add_option("--seed", a.seed, "suite seed");
  ver->add_option("--trials", a.trials, "override per-run trials/samples")
      ->check(CLI::PositiveNumber);
  ver->add_option("--out", a.out, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return run_simulate(a);
    if (pred->parsed()) return run_predict(a);
    if (aud->parsed()) return run_audit(a);
    return run_verify(a);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
