#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "lsl/dists.hpp"
#include "lsl/forward.hpp"
#include "lsl/netgen.hpp"
#include "lsl/stats.hpp"

namespace lsl::mc {

enum class Precision { f32, f64 };

// first_trial offsets the global trial index so a run can be sharded across
// plans and the shards merged back into the unsharded result.
struct TrialPlan {
  netgen::Architecture arch;
  dists::InitScheme scheme;
  forward::InputSpec input;
  std::uint64_t trials = 1;
  std::uint64_t master_seed = 0;
  Precision precision = Precision::f64;
  std::uint64_t first_trial = 0;
  bool resample_input = false;  // redraw the input per trial instead of fixing it
  int threads = 0;              // 0: take LSL_THREADS, default 1
};

struct LayerStats {
  int n_units = 0;
  stats::Moments m;  // accumulates M_j over trials; overflowed trials excluded
  std::uint64_t overflow_count = 0;
};

struct EnsembleStats {
  std::vector<LayerStats> layers;  // index = layer, 0..d
  stats::Moments emp_var;
  std::uint64_t emp_var_overflow = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t trials = 0;
  std::string signature;  // plan shape key; merge() requires equality
};

// Deterministic for a given plan, independent of threads and scheduling.
EnsembleStats run_ensemble(const TrialPlan& plan);

struct ConditionalStats {
  double mean = 0.0;
  double se_mean = 0.0;
  double variance = 0.0;
  double se_variance = 0.0;
};

// (mean, variance) of M_{j+1} for a fixed activation vector, estimated over
// `samples` fresh layer draws. Sample s uses stream derive(seed, s).
ConditionalStats conditional_step_stats(const std::vector<double>& activations, int n_next,
                                        const dists::InitScheme& scheme, std::uint64_t samples,
                                        std::uint64_t seed);

// Throws std::invalid_argument on signature mismatch; empty operands pass.
EnsembleStats merge(const EnsembleStats& a, const EnsembleStats& b);

// One row per layer: layer,n_layer,mean_M,se_mean,var_M,se_var,mean_Msq,se_Msq,overflow_count
std::string to_csv(const EnsembleStats& s);
std::string to_json(const EnsembleStats& s);

// Resolves a requested thread count (0 consults LSL_THREADS, floor 1).
int thread_count(int requested);

}  // namespace lsl::mc
