#pragma once
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "lsl/dists.hpp"
#include "lsl/rng.hpp"

namespace lsl::netgen {

// widths n0..nd; n0 is the input dimension
struct FcArch {
  std::vector<int> widths;
};

enum class Padding { circular, zero };

struct ConvLayerSpec {
  int out_channels = 1;
  int kernel = 1;  // odd
  Padding padding = Padding::circular;
};

// stride is fixed at 1
struct ConvArch {
  int height = 1;
  int width = 1;
  int channels = 1;
  std::vector<ConvLayerSpec> layers;
};

enum class ScaleKind { constant, geometric, explicit_list };

struct ScaleSchedule {
  ScaleKind kind = ScaleKind::constant;
  double value = 1.0;  // constant: eta; geometric: base b (eta_l = b^l)
  int count = 0;
  std::vector<double> list;  // explicit_list only

  std::vector<double> scales() const;
};

// modules are FC stacks of `module_depth` layers, all of width `width`
struct ResidualArch {
  int width = 1;
  int module_depth = 1;
  ScaleSchedule schedule;
};

using Architecture = std::variant<FcArch, ConvArch, ResidualArch>;

void validate(const Architecture& a);  // throws std::invalid_argument

// number of non-input layers: FC d, conv layer count, residual module count
int num_layers(const Architecture& a);

// units at layer j (0 = input): FC widths[j]; conv h*w*c_j; residual width
int layer_units(const Architecture& a, int layer);

// 1-based layer index
int fan_in(const Architecture& a, int layer);
int fan_out(const Architecture& a, int layer);

// Weights for one FC-like stack. weights[l] is the layer-(l+1) matrix,
// flattened row-major with the input index as the row (FC: [alpha][beta];
// conv: [ky][kx][ci][co]). biases[l] has one entry per output unit/channel.
struct FcInstance {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

struct NetInstance {
  Architecture arch;
  std::vector<FcInstance> parts;  // FC/conv: one; residual: one per module
  std::uint64_t master_seed = 0;  // seed lineage
  std::uint64_t trial_index = 0;
};

// Stream consumption order is fixed: parts in order, layers in order, all
// weights of a layer row-major, then that layer's biases.
NetInstance sample_net(const Architecture& a, const dists::InitScheme& s, rng::Stream& rs);
void sample_net_into(NetInstance& net, const Architecture& a, const dists::InitScheme& s,
                     rng::Stream& rs);

Architecture arch_from_json(const std::string& text);
std::string arch_to_json(const Architecture& a);

}  // namespace lsl::netgen
