#include "lsl/forward.hpp"

#include <cmath>
#include <stdexcept>

namespace lsl::forward {
namespace {

// z = W^T a + b accumulated row by row (rows = input index) so the FC and
// 1x1/kernel-1 conv paths execute the identical addition sequence.
template <typename T>
void layer_pass(const std::vector<T>& a, const std::vector<double>& w,
                const std::vector<double>& b, int n_in, int n_out, std::vector<T>& z) {
  z.assign(static_cast<std::size_t>(n_out), T(0));
  for (int alpha = 0; alpha < n_in; ++alpha) {
    const T av = a[static_cast<std::size_t>(alpha)];
    if (av == T(0)) continue;
    const double* row = w.data() + static_cast<std::size_t>(alpha) * static_cast<std::size_t>(n_out);
    for (int beta = 0; beta < n_out; ++beta)
      z[static_cast<std::size_t>(beta)] += av * static_cast<T>(row[beta]);
  }
  for (int beta = 0; beta < n_out; ++beta)
    z[static_cast<std::size_t>(beta)] += static_cast<T>(b[static_cast<std::size_t>(beta)]);
}

template <typename T>
T normalized_sq_length(const std::vector<T>& a, std::size_t units) {
  T s = T(0);
  for (const T v : a) s += v * v;
  return s / static_cast<T>(units);
}

template <typename T>
void record(LengthTrace& t, std::size_t j, T m) {
  const T msq = m * m;
  t.m[j] = static_cast<double>(m);
  t.overflow[j] = !std::isfinite(static_cast<double>(m)) || !std::isfinite(static_cast<double>(msq));
}

// emp_var over entries 1..d, in the computation precision
template <typename T>
void finish_emp_var(LengthTrace& t) {
  const std::size_t d = t.m.size() - 1;
  T sum = T(0), sumsq = T(0);
  for (std::size_t j = 1; j <= d; ++j) {
    const T mj = static_cast<T>(t.m[j]);
    sum += mj;
    sumsq += mj * mj;
  }
  const T mean = sum / static_cast<T>(d);
  T v = sumsq / static_cast<T>(d) - mean * mean;
  if (v < T(0)) v = T(0);  // rounding on near-constant traces
  t.emp_var = static_cast<double>(v);
  t.emp_var_overflow = !std::isfinite(t.emp_var);
}

template <typename T>
std::vector<T> to_precision(const std::vector<double>& x) {
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<T>(x[i]);
  return out;
}

// forward through one FC part, overwriting `a`; traces are optional
template <typename T>
void fc_part_pass(const netgen::FcInstance& part, const std::vector<int>& widths,
                  std::vector<T>& a, std::vector<T>& z) {
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int n_in = widths[l], n_out = widths[l + 1];
    layer_pass(a, part.weights[l], part.biases[l], n_in, n_out, z);
    a.resize(static_cast<std::size_t>(n_out));
    for (int i = 0; i < n_out; ++i) {
      const T v = z[static_cast<std::size_t>(i)];
      a[static_cast<std::size_t>(i)] = v > T(0) ? v : T(0);
    }
  }
}

}  // namespace

template <typename T>
LengthTrace forward_fc(const netgen::NetInstance& net, const std::vector<double>& input) {
  const auto& fc = std::get<netgen::FcArch>(net.arch);
  if (input.size() != static_cast<std::size_t>(fc.widths[0]))
    throw std::invalid_argument("forward_fc: input length mismatch");
  const std::size_t d = fc.widths.size() - 1;
  LengthTrace t;
  t.m.resize(d + 1);
  t.overflow.assign(d + 1, 0);

  std::vector<T> a = to_precision<T>(input), z;
  record(t, 0, normalized_sq_length(a, static_cast<std::size_t>(fc.widths[0])));
  for (std::size_t l = 0; l < d; ++l) {
    const int n_in = fc.widths[l], n_out = fc.widths[l + 1];
    layer_pass(a, net.parts[0].weights[l], net.parts[0].biases[l], n_in, n_out, z);
    a.resize(static_cast<std::size_t>(n_out));
    for (int i = 0; i < n_out; ++i) {
      const T v = z[static_cast<std::size_t>(i)];
      a[static_cast<std::size_t>(i)] = v > T(0) ? v : T(0);
    }
    record(t, l + 1, normalized_sq_length(a, static_cast<std::size_t>(n_out)));
  }
  finish_emp_var<T>(t);
  return t;
}

template <typename T>
LengthTrace forward_conv(const netgen::NetInstance& net, const std::vector<double>& image) {
  const auto& cv = std::get<netgen::ConvArch>(net.arch);
  const int h = cv.height, w = cv.width;
  if (image.size() != static_cast<std::size_t>(h) * static_cast<std::size_t>(w) *
                          static_cast<std::size_t>(cv.channels))
    throw std::invalid_argument("forward_conv: image shape mismatch");
  const std::size_t d = cv.layers.size();
  LengthTrace t;
  t.m.resize(d + 1);
  t.overflow.assign(d + 1, 0);

  std::vector<T> a = to_precision<T>(image), out, zrow;
  record(t, 0, normalized_sq_length(a, a.size()));
  int cin = cv.channels;
  for (std::size_t l = 0; l < d; ++l) {
    const auto& spec = cv.layers[l];
    const int k = spec.kernel, cout = spec.out_channels, half = k / 2;
    const auto& W = net.parts[0].weights[l];
    const auto& B = net.parts[0].biases[l];
    out.assign(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) *
                   static_cast<std::size_t>(cout),
               T(0));
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        zrow.assign(static_cast<std::size_t>(cout), T(0));
        for (int ky = 0; ky < k; ++ky) {
          int sy = y + ky - half;
          if (spec.padding == netgen::Padding::circular) {
            sy = ((sy % h) + h) % h;
          } else if (sy < 0 || sy >= h) {
            continue;
          }
          for (int kx = 0; kx < k; ++kx) {
            int sx = x + kx - half;
            if (spec.padding == netgen::Padding::circular) {
              sx = ((sx % w) + w) % w;
            } else if (sx < 0 || sx >= w) {
              continue;
            }
            const T* av = a.data() + (static_cast<std::size_t>(sy) * static_cast<std::size_t>(w) +
                                      static_cast<std::size_t>(sx)) *
                                         static_cast<std::size_t>(cin);
            const double* wbase =
                W.data() + (static_cast<std::size_t>(ky) * static_cast<std::size_t>(k) +
                            static_cast<std::size_t>(kx)) *
                               static_cast<std::size_t>(cin) * static_cast<std::size_t>(cout);
            for (int ci = 0; ci < cin; ++ci) {
              const T v = av[ci];
              if (v == T(0)) continue;
              const double* wrow = wbase + static_cast<std::size_t>(ci) * static_cast<std::size_t>(cout);
              for (int co = 0; co < cout; ++co)
                zrow[static_cast<std::size_t>(co)] += v * static_cast<T>(wrow[co]);
            }
          }
        }
        T* orow = out.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                                static_cast<std::size_t>(x)) *
                                   static_cast<std::size_t>(cout);
        for (int co = 0; co < cout; ++co) {
          const T z = zrow[static_cast<std::size_t>(co)] + static_cast<T>(B[static_cast<std::size_t>(co)]);
          orow[co] = z > T(0) ? z : T(0);
        }
      }
    }
    a.swap(out);
    cin = cout;
    record(t, l + 1, normalized_sq_length(a, a.size()));
  }
  finish_emp_var<T>(t);
  return t;
}

template <typename T>
LengthTrace forward_residual(const netgen::NetInstance& net, const std::vector<double>& input) {
  const auto& res = std::get<netgen::ResidualArch>(net.arch);
  const int n = res.width;
  if (input.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("forward_residual: input length mismatch");
  const auto etas = res.schedule.scales();
  const std::size_t L = etas.size();
  LengthTrace t;
  t.m.resize(L + 1);
  t.overflow.assign(L + 1, 0);

  std::vector<int> module_widths(static_cast<std::size_t>(res.module_depth) + 1, n);
  std::vector<T> x = to_precision<T>(input), y, z;
  record(t, 0, normalized_sq_length(x, static_cast<std::size_t>(n)));
  for (std::size_t l = 0; l < L; ++l) {
    y = x;
    fc_part_pass(net.parts[l], module_widths, y, z);
    const T eta = static_cast<T>(etas[l]);
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] += eta * y[static_cast<std::size_t>(i)];
    record(t, l + 1, normalized_sq_length(x, static_cast<std::size_t>(n)));
  }
  finish_emp_var<T>(t);
  return t;
}

template <typename T>
LengthTrace run_forward(const netgen::NetInstance& net, const std::vector<double>& input) {
  if (std::holds_alternative<netgen::FcArch>(net.arch)) return forward_fc<T>(net, input);
  if (std::holds_alternative<netgen::ConvArch>(net.arch)) return forward_conv<T>(net, input);
  return forward_residual<T>(net, input);
}

double empirical_variance(const LengthTrace& trace) {
  if (trace.m.size() < 2) throw std::invalid_argument("empirical_variance: empty trace");
  const std::size_t d = trace.m.size() - 1;
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t j = 1; j <= d; ++j) {
    sum += trace.m[j];
    sumsq += trace.m[j] * trace.m[j];
  }
  const double mean = sum / static_cast<double>(d);
  double v = sumsq / static_cast<double>(d) - mean * mean;
  return v < 0.0 ? 0.0 : v;
}

std::vector<double> make_input(const InputSpec& spec, const netgen::Architecture& a,
                               rng::Stream* rs) {
  const std::size_t n = static_cast<std::size_t>(netgen::layer_units(a, 0));
  std::vector<double> x;
  switch (spec.kind) {
    case InputKind::all_ones:
      x.assign(n, 1.0);
      break;
    case InputKind::unit_sphere_random: {
      if (rs == nullptr) throw std::invalid_argument("make_input: sphere input needs a stream");
      x.resize(n);
      for (auto& v : x) v = rng::normal(*rs);
      break;
    }
    case InputKind::explicit_vec:
      if (spec.data.size() != n) throw std::invalid_argument("make_input: explicit input length mismatch");
      x = spec.data;
      break;
    case InputKind::checkerboard: {
      const auto* cv = std::get_if<netgen::ConvArch>(&a);
      if (cv == nullptr) throw std::invalid_argument("make_input: checkerboard input is conv-only");
      x.resize(n);
      for (int y = 0; y < cv->height; ++y)
        for (int xx = 0; xx < cv->width; ++xx)
          for (int c = 0; c < cv->channels; ++c)
            x[(static_cast<std::size_t>(y) * static_cast<std::size_t>(cv->width) +
               static_cast<std::size_t>(xx)) *
                  static_cast<std::size_t>(cv->channels) +
              static_cast<std::size_t>(c)] = ((y + xx) % 2 == 0) ? 1.0 : -1.0;
      break;
    }
  }
  double sq = 0.0;
  for (double v : x) sq += v * v;
  if (sq <= 0.0) throw std::invalid_argument("make_input: cannot normalize a zero input");
  const double target = spec.norm == Norm::m0_equals_1 ? static_cast<double>(n) : 1.0;
  const double scale = std::sqrt(target / sq);
  for (auto& v : x) v *= scale;
  return x;
}

template LengthTrace forward_fc<float>(const netgen::NetInstance&, const std::vector<double>&);
template LengthTrace forward_fc<double>(const netgen::NetInstance&, const std::vector<double>&);
template LengthTrace forward_conv<float>(const netgen::NetInstance&, const std::vector<double>&);
template LengthTrace forward_conv<double>(const netgen::NetInstance&, const std::vector<double>&);
template LengthTrace forward_residual<float>(const netgen::NetInstance&, const std::vector<double>&);
template LengthTrace forward_residual<double>(const netgen::NetInstance&, const std::vector<double>&);
template LengthTrace run_forward<float>(const netgen::NetInstance&, const std::vector<double>&);
template LengthTrace run_forward<double>(const netgen::NetInstance&, const std::vector<double>&);

}  // namespace lsl::forward
