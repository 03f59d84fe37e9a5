#include "lsl/mc.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace lsl::mc {
namespace {

// Input draws come from a stream family disjoint from the weight streams so
// the fixed-input and resampled protocols see identical weights per trial.
constexpr std::uint64_t kInputTag = 0x13579BDF2468ACE0ULL;

// Trials are processed in fixed blocks; workers claim blocks through an atomic
// counter and the partials are folded in block order, so the result does not
// depend on the thread count.
constexpr std::uint64_t kBlockTrials = 1024;

std::string fmt(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string plan_signature(const TrialPlan& p) {
  std::string s = netgen::arch_to_json(p.arch);
  s += "|scheme=" + dists::scheme_name(p.scheme);
  s += "|bias=" + std::to_string(static_cast<int>(p.scheme.bias.kind)) + ":" +
       fmt(p.scheme.bias.variance) + ":" + fmt(p.scheme.bias.cutoff);
  s += "|input=" + std::to_string(static_cast<int>(p.input.kind)) + ":" +
       std::to_string(static_cast<int>(p.input.norm));
  for (double v : p.input.data) s += "," + fmt(v);
  s += "|prec=";
  s += p.precision == Precision::f32 ? "f32" : "f64";
  s += "|resample=";
  s += p.resample_input ? "1" : "0";
  return s;
}

struct Partial {
  std::vector<stats::Moments> layer_m;
  std::vector<std::uint64_t> overflow;
  stats::Moments emp_var;
  std::uint64_t emp_var_overflow = 0;
};

}  // namespace

int thread_count(int requested) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("LSL_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end != env && v > 0 && v <= 512) n = static_cast<int>(v);
    }
  }
  return n > 0 ? n : 1;
}

EnsembleStats run_ensemble(const TrialPlan& plan) {
  netgen::validate(plan.arch);
  if (plan.trials < 1) throw std::invalid_argument("mc: trials must be >= 1");
  const int d = netgen::num_layers(plan.arch);
  const std::size_t n_entries = static_cast<std::size_t>(d) + 1;

  std::vector<double> fixed_input;
  if (!plan.resample_input) {
    rng::Stream irs = rng::derive_stream(plan.master_seed ^ kInputTag, 0);
    fixed_input = forward::make_input(plan.input, plan.arch, &irs);
  } else {
    // validate the plan up front so workers cannot race on the first throw
    rng::Stream irs = rng::derive_stream(plan.master_seed ^ kInputTag, plan.first_trial);
    (void)forward::make_input(plan.input, plan.arch, &irs);
  }

  const std::uint64_t nblocks = (plan.trials + kBlockTrials - 1) / kBlockTrials;
  std::vector<Partial> partials(nblocks);
  std::atomic<std::uint64_t> next_block{0};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto work = [&]() {
    try {
      netgen::NetInstance net;
      std::vector<double> trial_input;
      for (;;) {
        const std::uint64_t b = next_block.fetch_add(1);
        if (b >= nblocks) break;
        Partial& part = partials[b];
        part.layer_m.assign(n_entries, {});
        part.overflow.assign(n_entries, 0);
        const std::uint64_t lo = b * kBlockTrials;
        const std::uint64_t hi = std::min(plan.trials, lo + kBlockTrials);
        for (std::uint64_t t = lo; t < hi; ++t) {
          const std::uint64_t g = plan.first_trial + t;
          rng::Stream rs = rng::derive_stream(plan.master_seed, g);
          netgen::sample_net_into(net, plan.arch, plan.scheme, rs);
          const std::vector<double>* in = &fixed_input;
          if (plan.resample_input) {
            rng::Stream irs = rng::derive_stream(plan.master_seed ^ kInputTag, g);
            trial_input = forward::make_input(plan.input, plan.arch, &irs);
            in = &trial_input;
          }
          const forward::LengthTrace tr = plan.precision == Precision::f32
                                              ? forward::run_forward<float>(net, *in)
                                              : forward::run_forward<double>(net, *in);
          for (std::size_t j = 0; j < n_entries; ++j) {
            if (tr.overflow[j])
              part.overflow[j] += 1;
            else
              part.layer_m[j].push(tr.m[j]);
          }
          if (tr.emp_var_overflow)
            part.emp_var_overflow += 1;
          else
            part.emp_var.push(tr.emp_var);
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mu);
      if (!first_error) first_error = std::current_exception();
      next_block.store(nblocks);
    }
  };

  const int nthreads =
      static_cast<int>(std::min<std::uint64_t>(thread_count(plan.threads), nblocks));
  if (nthreads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  EnsembleStats out;
  out.layers.resize(n_entries);
  for (std::size_t j = 0; j < n_entries; ++j)
    out.layers[j].n_units = netgen::layer_units(plan.arch, static_cast<int>(j));
  for (const Partial& part : partials) {
    for (std::size_t j = 0; j < n_entries; ++j) {
      out.layers[j].m.merge(part.layer_m[j]);
      out.layers[j].overflow_count += part.overflow[j];
    }
    out.emp_var.merge(part.emp_var);
    out.emp_var_overflow += part.emp_var_overflow;
  }
  out.master_seed = plan.master_seed;
  out.trials = plan.trials;
  out.signature = plan_signature(plan);
  return out;
}

ConditionalStats conditional_step_stats(const std::vector<double>& activations, int n_next,
                                        const dists::InitScheme& scheme, std::uint64_t samples,
                                        std::uint64_t seed) {
  if (activations.empty()) throw std::invalid_argument("mc: empty activation vector");
  if (n_next < 1) throw std::invalid_argument("mc: next layer width must be >= 1");
  if (samples < 1000) throw std::invalid_argument("mc: conditional stats need >= 1000 samples");
  const int n = static_cast<int>(activations.size());
  const dists::LayerInit init = dists::resolve_layer(scheme, n, n_next);
  stats::Moments acc;
  std::vector<double> z(static_cast<std::size_t>(n_next));
  for (std::uint64_t s = 0; s < samples; ++s) {
    rng::Stream rs = rng::derive_stream(seed, s);
    std::fill(z.begin(), z.end(), 0.0);
    for (int alpha = 0; alpha < n; ++alpha) {
      const double av = activations[static_cast<std::size_t>(alpha)];
      for (int beta = 0; beta < n_next; ++beta) {
        const double w = dists::sample(init.weights, rs);
        z[static_cast<std::size_t>(beta)] += av * w;
      }
    }
    double sum = 0.0;
    for (int beta = 0; beta < n_next; ++beta) {
      const double v = z[static_cast<std::size_t>(beta)] + dists::sample(init.biases, rs);
      if (v > 0.0) sum += v * v;
    }
    acc.push(sum / static_cast<double>(n_next));
  }
  ConditionalStats out;
  out.mean = acc.mean;
  out.se_mean = acc.se_mean();
  out.variance = acc.variance();
  out.se_variance = acc.se_variance();
  return out;
}

EnsembleStats merge(const EnsembleStats& a, const EnsembleStats& b) {
  if (b.trials == 0 && b.layers.empty()) return a;
  if (a.trials == 0 && a.layers.empty()) return b;
  if (a.signature != b.signature || a.layers.size() != b.layers.size())
    throw std::invalid_argument("mc: merge of mismatched ensembles");
  EnsembleStats out = a;
  for (std::size_t j = 0; j < out.layers.size(); ++j) {
    out.layers[j].m.merge(b.layers[j].m);
    out.layers[j].overflow_count += b.layers[j].overflow_count;
  }
  out.emp_var.merge(b.emp_var);
  out.emp_var_overflow += b.emp_var_overflow;
  out.trials += b.trials;
  return out;
}

std::string to_csv(const EnsembleStats& s) {
  std::string out = "layer,n_layer,mean_M,se_mean,var_M,se_var,mean_Msq,se_Msq,overflow_count\n";
  for (std::size_t j = 0; j < s.layers.size(); ++j) {
    const LayerStats& l = s.layers[j];
    out += std::to_string(j);
    out += ',' + std::to_string(l.n_units);
    out += ',' + fmt(l.m.mean);
    out += ',' + fmt(l.m.se_mean());
    out += ',' + fmt(l.m.variance());
    out += ',' + fmt(l.m.se_variance());
    out += ',' + fmt(l.m.mean_sq());
    out += ',' + fmt(l.m.se_mean_sq());
    out += ',' + std::to_string(l.overflow_count);
    out += '\n';
  }
  return out;
}

std::string to_json(const EnsembleStats& s) {
  nlohmann::ordered_json j;
  j["master_seed"] = s.master_seed;
  j["trials"] = s.trials;
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (std::size_t idx = 0; idx < s.layers.size(); ++idx) {
    const LayerStats& l = s.layers[idx];
    nlohmann::ordered_json row;
    row["layer"] = idx;
    row["n_layer"] = l.n_units;
    row["mean_M"] = l.m.mean;
    row["se_mean"] = l.m.se_mean();
    row["var_M"] = l.m.variance();
    row["se_var"] = l.m.se_variance();
    row["mean_Msq"] = l.m.mean_sq();
    row["se_Msq"] = l.m.se_mean_sq();
    row["overflow_count"] = l.overflow_count;
    layers.push_back(row);
  }
  j["layers"] = layers;
  j["emp_var"] = {{"mean", s.emp_var.mean},
                  {"se", s.emp_var.se_mean()},
                  {"count", s.emp_var.n},
                  {"overflow_count", s.emp_var_overflow}};
  return j.dump(2) + "\n";
}

}  // namespace lsl::mc
