#pragma once
#include <cstdint>
#include <vector>

#include "lsl/netgen.hpp"
#include "lsl/rng.hpp"

namespace lsl::forward {

// Per-layer normalized squared activation lengths for one pass.
// m[0] is the input entry; emp_var is taken over m[1..d].
// overflow[j] flags a layer whose M_j or M_j^2 is not finite in the
// computation precision (f32 mode); emp_var_overflow mirrors that for emp_var.
struct LengthTrace {
  std::vector<double> m;
  double emp_var = 0.0;
  std::vector<std::uint8_t> overflow;
  bool emp_var_overflow = false;
};

enum class InputKind { all_ones, unit_sphere_random, explicit_vec, checkerboard };
enum class Norm { m0_equals_1, unit_norm };

// data: explicit input values; for conv an image stored [y][x][c], c fastest.
struct InputSpec {
  InputKind kind = InputKind::all_ones;
  Norm norm = Norm::m0_equals_1;
  std::vector<double> data;
};

// Build the (normalized) input vector for an architecture. rs is consumed
// only by unit_sphere_random.
std::vector<double> make_input(const InputSpec& spec, const netgen::Architecture& a,
                               rng::Stream* rs);

template <typename T>
LengthTrace forward_fc(const netgen::NetInstance& net, const std::vector<double>& input);

template <typename T>
LengthTrace forward_conv(const netgen::NetInstance& net, const std::vector<double>& image);

template <typename T>
LengthTrace forward_residual(const netgen::NetInstance& net, const std::vector<double>& input);

// dispatch on the architecture variant
template <typename T>
LengthTrace run_forward(const netgen::NetInstance& net, const std::vector<double>& input);

// (1/d) sum M_j^2 - ((1/d) sum M_j)^2 over entries 1..d, recomputed from m.
double empirical_variance(const LengthTrace& trace);

}  // namespace lsl::forward
