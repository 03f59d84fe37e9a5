#include "lsl/netgen.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace lsl::netgen {

std::vector<double> ScaleSchedule::scales() const {
  switch (kind) {
    case ScaleKind::constant:
      return std::vector<double>(static_cast<std::size_t>(count), value);
    case ScaleKind::geometric: {
      std::vector<double> out(static_cast<std::size_t>(count));
      double e = 1.0;
      for (int l = 0; l < count; ++l) out[static_cast<std::size_t>(l)] = (e *= value);
      return out;
    }
    case ScaleKind::explicit_list:
      return list;
  }
  throw std::logic_error("scales: unreachable");
}

void validate(const Architecture& a) {
  if (const auto* fc = std::get_if<FcArch>(&a)) {
    if (fc->widths.size() < 2) throw std::invalid_argument("fc: need at least input and one layer");
    for (int w : fc->widths)
      if (w < 1) throw std::invalid_argument("fc: widths must be >= 1");
    return;
  }
  if (const auto* cv = std::get_if<ConvArch>(&a)) {
    if (cv->height < 1 || cv->width < 1 || cv->channels < 1)
      throw std::invalid_argument("conv: input dims must be >= 1");
    if (cv->layers.empty()) throw std::invalid_argument("conv: need at least one layer");
    for (const auto& l : cv->layers) {
      if (l.out_channels < 1) throw std::invalid_argument("conv: out_channels must be >= 1");
      if (l.kernel < 1 || l.kernel % 2 == 0)
        throw std::invalid_argument("conv: kernel must be odd and >= 1");
    }
    return;
  }
  const auto& rs = std::get<ResidualArch>(a);
  if (rs.width < 1) throw std::invalid_argument("residual: width must be >= 1");
  if (rs.module_depth < 1) throw std::invalid_argument("residual: module_depth must be >= 1");
  const auto etas = rs.schedule.scales();
  if (etas.empty()) throw std::invalid_argument("residual: need at least one module");
  for (double e : etas)
    if (!(e > 0.0)) throw std::invalid_argument("residual: scales must be > 0");
}

int num_layers(const Architecture& a) {
  if (const auto* fc = std::get_if<FcArch>(&a)) return static_cast<int>(fc->widths.size()) - 1;
  if (const auto* cv = std::get_if<ConvArch>(&a)) return static_cast<int>(cv->layers.size());
  return static_cast<int>(std::get<ResidualArch>(a).schedule.scales().size());
}

int layer_units(const Architecture& a, int layer) {
  if (layer < 0 || layer > num_layers(a)) throw std::out_of_range("layer_units: bad layer");
  if (const auto* fc = std::get_if<FcArch>(&a)) return fc->widths[static_cast<std::size_t>(layer)];
  if (const auto* cv = std::get_if<ConvArch>(&a)) {
    const int c = layer == 0 ? cv->channels
                             : cv->layers[static_cast<std::size_t>(layer - 1)].out_channels;
    return cv->height * cv->width * c;
  }
  return std::get<ResidualArch>(a).width;
}

int fan_in(const Architecture& a, int layer) {
  if (layer < 1 || layer > num_layers(a)) throw std::out_of_range("fan_in: bad layer");
  if (const auto* fc = std::get_if<FcArch>(&a)) return fc->widths[static_cast<std::size_t>(layer - 1)];
  if (const auto* cv = std::get_if<ConvArch>(&a)) {
    const int cin = layer == 1 ? cv->channels
                               : cv->layers[static_cast<std::size_t>(layer - 2)].out_channels;
    const int k = cv->layers[static_cast<std::size_t>(layer - 1)].kernel;
    return cin * k * k;
  }
  return std::get<ResidualArch>(a).width;
}

int fan_out(const Architecture& a, int layer) {
  if (layer < 1 || layer > num_layers(a)) throw std::out_of_range("fan_out: bad layer");
  if (const auto* fc = std::get_if<FcArch>(&a)) return fc->widths[static_cast<std::size_t>(layer)];
  if (const auto* cv = std::get_if<ConvArch>(&a)) {
    const auto& l = cv->layers[static_cast<std::size_t>(layer - 1)];
    return l.out_channels * l.kernel * l.kernel;
  }
  return std::get<ResidualArch>(a).width;
}

namespace {

// Hot path: hoist the per-distribution setup out of the draw loop.
void fill(const dists::DistributionSpec& d, std::vector<double>& out, std::size_t count,
          rng::Stream& rs) {
  out.resize(count);
  switch (d.kind) {
    case dists::Kind::normal: {
      const double s = std::sqrt(d.variance);
      for (std::size_t i = 0; i < count; ++i) out[i] = rng::normal(rs) * s;
      return;
    }
    case dists::Kind::uniform: {
      const double b = std::sqrt(3.0 * d.variance);
      for (std::size_t i = 0; i < count; ++i) out[i] = (2.0 * rng::uniform_unit(rs) - 1.0) * b;
      return;
    }
    case dists::Kind::rademacher: {
      const double s = std::sqrt(d.variance);
      for (std::size_t i = 0; i < count; ++i) out[i] = rng::uniform_unit(rs) < 0.5 ? -s : s;
      return;
    }
    case dists::Kind::truncated_normal: {
      const double pre = std::sqrt(d.variance / dists::effective_truncation_factor(d.cutoff));
      for (std::size_t i = 0; i < count; ++i) {
        double x;
        do {
          x = rng::normal(rs);
        } while (std::abs(x) > d.cutoff);
        out[i] = x * pre;
      }
      return;
    }
    case dists::Kind::point_mass_zero:
      out.assign(count, 0.0);
      return;
  }
}

void sample_part(FcInstance& part, const Architecture& a, const dists::InitScheme& s, int layers,
                 rng::Stream& rs, bool conv) {
  part.weights.resize(static_cast<std::size_t>(layers));
  part.biases.resize(static_cast<std::size_t>(layers));
  for (int l = 1; l <= layers; ++l) {
    const auto init = dists::resolve_layer(s, fan_in(a, l), fan_out(a, l));
    std::size_t wcount, bcount;
    if (conv) {
      const auto& cv = std::get<ConvArch>(a);
      const auto& spec = cv.layers[static_cast<std::size_t>(l - 1)];
      const int cin = l == 1 ? cv.channels : cv.layers[static_cast<std::size_t>(l - 2)].out_channels;
      wcount = static_cast<std::size_t>(spec.kernel) * static_cast<std::size_t>(spec.kernel) *
               static_cast<std::size_t>(cin) * static_cast<std::size_t>(spec.out_channels);
      bcount = static_cast<std::size_t>(spec.out_channels);
    } else {
      wcount = static_cast<std::size_t>(fan_in(a, l)) * static_cast<std::size_t>(fan_out(a, l));
      bcount = static_cast<std::size_t>(fan_out(a, l));
    }
    auto& w = part.weights[static_cast<std::size_t>(l - 1)];
    auto& b = part.biases[static_cast<std::size_t>(l - 1)];
    fill(init.weights, w, wcount, rs);
    fill(init.biases, b, bcount, rs);
  }
}

}  // namespace

void sample_net_into(NetInstance& net, const Architecture& a, const dists::InitScheme& s,
                     rng::Stream& rs) {
  validate(a);
  net.arch = a;
  if (const auto* fc = std::get_if<FcArch>(&a)) {
    (void)fc;
    net.parts.resize(1);
    sample_part(net.parts[0], a, s, num_layers(a), rs, false);
    return;
  }
  if (std::holds_alternative<ConvArch>(a)) {
    net.parts.resize(1);
    sample_part(net.parts[0], a, s, num_layers(a), rs, true);
    return;
  }
  const auto& res = std::get<ResidualArch>(a);
  if (s.bias.kind != dists::Kind::point_mass_zero)
    throw std::invalid_argument("residual nets require zero biases");
  const int L = num_layers(a);
  // each module is an FC stack [width]*(module_depth+1)
  FcArch module;
  module.widths.assign(static_cast<std::size_t>(res.module_depth) + 1, res.width);
  const Architecture module_arch = module;
  net.parts.resize(static_cast<std::size_t>(L));
  for (int m = 0; m < L; ++m)
    sample_part(net.parts[static_cast<std::size_t>(m)], module_arch, s, res.module_depth, rs, false);
}

NetInstance sample_net(const Architecture& a, const dists::InitScheme& s, rng::Stream& rs) {
  NetInstance net;
  sample_net_into(net, a, s, rs);
  return net;
}

Architecture arch_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("architecture: bad JSON: ") + e.what());
  }
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "fc") {
      FcArch fc;
      fc.widths = j.at("widths").get<std::vector<int>>();
      Architecture a = fc;
      validate(a);
      return a;
    }
    if (type == "conv") {
      ConvArch cv;
      const auto in = j.at("input");
      cv.height = in.at(0).get<int>();
      cv.width = in.at(1).get<int>();
      cv.channels = in.at(2).get<int>();
      for (const auto& jl : j.at("layers")) {
        ConvLayerSpec l;
        l.out_channels = jl.at("out").get<int>();
        l.kernel = jl.at("kernel").get<int>();
        if (jl.contains("padding")) {
          const std::string p = jl.at("padding").get<std::string>();
          if (p == "circular") {
            l.padding = Padding::circular;
          } else if (p == "zero") {
            l.padding = Padding::zero;
          } else {
            throw std::invalid_argument("architecture: unknown padding '" + p + "'");
          }
        }
        cv.layers.push_back(l);
      }
      Architecture a = cv;
      validate(a);
      return a;
    }
    if (type == "residual") {
      ResidualArch rs;
      rs.width = j.at("width").get<int>();
      rs.module_depth = j.contains("module_depth") ? j.at("module_depth").get<int>() : 1;
      const auto& sc = j.at("scales");
      if (sc.is_array()) {
        rs.schedule.kind = ScaleKind::explicit_list;
        rs.schedule.list = sc.get<std::vector<double>>();
        rs.schedule.count = static_cast<int>(rs.schedule.list.size());
      } else {
        const std::string kind = sc.at("kind").get<std::string>();
        if (kind == "const") {
          rs.schedule.kind = ScaleKind::constant;
        } else if (kind == "geom") {
          rs.schedule.kind = ScaleKind::geometric;
        } else {
          throw std::invalid_argument("architecture: unknown scale kind '" + kind + "'");
        }
        rs.schedule.value = sc.at("value").get<double>();
        rs.schedule.count = sc.at("count").get<int>();
      }
      Architecture a = rs;
      validate(a);
      return a;
    }
    throw std::invalid_argument("architecture: unknown type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("architecture: bad JSON: ") + e.what());
  }
}

std::string arch_to_json(const Architecture& a) {
  nlohmann::json j;
  if (const auto* fc = std::get_if<FcArch>(&a)) {
    j["type"] = "fc";
    j["widths"] = fc->widths;
  } else if (const auto* cv = std::get_if<ConvArch>(&a)) {
    j["type"] = "conv";
    j["input"] = {cv->height, cv->width, cv->channels};
    auto layers = nlohmann::json::array();
    for (const auto& l : cv->layers)
      layers.push_back({{"out", l.out_channels},
                        {"kernel", l.kernel},
                        {"padding", l.padding == Padding::circular ? "circular" : "zero"}});
    j["layers"] = layers;
  } else {
    const auto& rs = std::get<ResidualArch>(a);
    j["type"] = "residual";
    j["width"] = rs.width;
    j["module_depth"] = rs.module_depth;
    if (rs.schedule.kind == ScaleKind::explicit_list) {
      j["scales"] = rs.schedule.list;
    } else {
      j["scales"] = {{"kind", rs.schedule.kind == ScaleKind::constant ? "const" : "geom"},
                     {"value", rs.schedule.value},
                     {"count", rs.schedule.count}};
    }
  }
  return j.dump();
}

}  // namespace lsl::netgen
