#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "doctest.h"
#include "lsl/dists.hpp"
#include "lsl/netgen.hpp"
#include "lsl/rng.hpp"

using namespace lsl;

namespace {

netgen::FcArch fc(std::vector<int> widths) { return netgen::FcArch{std::move(widths)}; }

}  // namespace

TEST_CASE("validate rejects malformed architectures") {
  CHECK_THROWS_AS(netgen::validate(netgen::Architecture{fc({20})}), std::invalid_argument);
  CHECK_THROWS_AS(netgen::validate(netgen::Architecture{fc({20, 0, 10})}), std::invalid_argument);
  CHECK_NOTHROW(netgen::validate(netgen::Architecture{fc({20, 30, 10})}));

  netgen::ConvArch c;
  c.height = 8;
  c.width = 8;
  c.channels = 3;
  c.layers = {{5, 3, netgen::Padding::circular}};
  CHECK_NOTHROW(netgen::validate(netgen::Architecture{c}));
  c.layers[0].kernel = 4;  // even kernels have no center
  CHECK_THROWS_AS(netgen::validate(netgen::Architecture{c}), std::invalid_argument);
  c.layers[0].kernel = 3;
  c.layers[0].out_channels = 0;
  CHECK_THROWS_AS(netgen::validate(netgen::Architecture{c}), std::invalid_argument);
  c.layers.clear();
  CHECK_THROWS_AS(netgen::validate(netgen::Architecture{c}), std::invalid_argument);

  netgen::ResidualArch r;
  r.width = 5;
  r.module_depth = 2;
  r.schedule.kind = netgen::ScaleKind::constant;
  r.schedule.value = 0.5;
  r.schedule.count = 4;
  CHECK_NOTHROW(netgen::validate(netgen::Architecture{r}));
  r.schedule.count = 0;
  CHECK_THROWS_AS(netgen::validate(netgen::Architecture{r}), std::invalid_argument);
  r.schedule.count = 4;
  r.schedule.value = -0.1;
  CHECK_THROWS_AS(netgen::validate(netgen::Architecture{r}), std::invalid_argument);
}

TEST_CASE("layer bookkeeping: units and fans") {
  const netgen::Architecture a{fc({20, 30, 10})};
  CHECK(netgen::num_layers(a) == 2);
  CHECK(netgen::layer_units(a, 0) == 20);
  CHECK(netgen::layer_units(a, 1) == 30);
  CHECK(netgen::layer_units(a, 2) == 10);
  CHECK(netgen::fan_in(a, 1) == 20);
  CHECK(netgen::fan_out(a, 1) == 30);
  CHECK(netgen::fan_in(a, 2) == 30);
  CHECK(netgen::fan_out(a, 2) == 10);

  netgen::ConvArch c;
  c.height = 8;
  c.width = 8;
  c.channels = 3;
  c.layers = {{5, 3, netgen::Padding::circular}, {7, 1, netgen::Padding::zero}};
  const netgen::Architecture ca{c};
  CHECK(netgen::num_layers(ca) == 2);
  CHECK(netgen::layer_units(ca, 0) == 8 * 8 * 3);
  CHECK(netgen::layer_units(ca, 1) == 8 * 8 * 5);
  CHECK(netgen::layer_units(ca, 2) == 8 * 8 * 7);
  CHECK(netgen::fan_in(ca, 1) == 3 * 3 * 3);
  CHECK(netgen::fan_out(ca, 1) == 3 * 3 * 5);
  CHECK(netgen::fan_in(ca, 2) == 1 * 1 * 5);
  CHECK(netgen::fan_out(ca, 2) == 1 * 1 * 7);

  netgen::ResidualArch r;
  r.width = 6;
  r.module_depth = 3;
  r.schedule.kind = netgen::ScaleKind::geometric;
  r.schedule.value = 0.5;
  r.schedule.count = 4;
  const netgen::Architecture ra{r};
  CHECK(netgen::num_layers(ra) == 4);
  CHECK(netgen::layer_units(ra, 0) == 6);
  CHECK(netgen::layer_units(ra, 4) == 6);
  CHECK(netgen::fan_in(ra, 2) == 6);
}

TEST_CASE("scale schedules expand correctly") {
  netgen::ScaleSchedule s;
  s.kind = netgen::ScaleKind::constant;
  s.value = 0.25;
  s.count = 3;
  CHECK(s.scales() == std::vector<double>{0.25, 0.25, 0.25});

  s.kind = netgen::ScaleKind::geometric;
  s.value = 0.5;
  s.count = 4;
  CHECK(s.scales() == std::vector<double>{0.5, 0.25, 0.125, 0.0625});

  s.kind = netgen::ScaleKind::explicit_list;
  s.list = {1.0, 0.1};
  CHECK(s.scales() == std::vector<double>{1.0, 0.1});
}

TEST_CASE("instance shapes follow the architecture") {
  rng::Stream rs = rng::derive_stream(9, 0);
  dists::InitScheme s;
  s.name = dists::SchemeName::he_normal;

  const netgen::Architecture a{fc({20, 30, 10})};
  auto net = netgen::sample_net(a, s, rs);
  REQUIRE(net.parts.size() == 1);
  REQUIRE(net.parts[0].weights.size() == 2);
  CHECK(net.parts[0].weights[0].size() == 20u * 30u);
  CHECK(net.parts[0].weights[1].size() == 30u * 10u);
  CHECK(net.parts[0].biases[0].size() == 30u);
  CHECK(net.parts[0].biases[1].size() == 10u);
  for (double b : net.parts[0].biases[0]) CHECK(b == 0.0);

  netgen::ConvArch c;
  c.height = 8;
  c.width = 8;
  c.channels = 3;
  c.layers = {{5, 3, netgen::Padding::circular}};
  auto cnet = netgen::sample_net(netgen::Architecture{c}, s, rs);
  REQUIRE(cnet.parts.size() == 1);
  CHECK(cnet.parts[0].weights[0].size() == 3u * 3u * 3u * 5u);
  CHECK(cnet.parts[0].biases[0].size() == 5u);

  netgen::ResidualArch r;
  r.width = 5;
  r.module_depth = 2;
  r.schedule.kind = netgen::ScaleKind::constant;
  r.schedule.value = 0.5;
  r.schedule.count = 3;
  auto rnet = netgen::sample_net(netgen::Architecture{r}, s, rs);
  REQUIRE(rnet.parts.size() == 3);
  for (const auto& part : rnet.parts) {
    REQUIRE(part.weights.size() == 2);  // module_depth layers per module
    CHECK(part.weights[0].size() == 25u);
    CHECK(part.weights[1].size() == 25u);
  }
}

TEST_CASE("residual sampling rejects nonzero bias") {
  netgen::ResidualArch r;
  r.width = 5;
  r.module_depth = 2;
  r.schedule.kind = netgen::ScaleKind::constant;
  r.schedule.value = 0.5;
  r.schedule.count = 3;
  dists::InitScheme s;
  s.name = dists::SchemeName::he_normal;
  s.bias.kind = dists::Kind::normal;
  s.bias.variance = 0.1;
  rng::Stream rs = rng::derive_stream(9, 1);
  CHECK_THROWS_AS(netgen::sample_net(netgen::Architecture{r}, s, rs), std::invalid_argument);
}

TEST_CASE("weight draw order is layer-major, rows by input index, biases after weights") {
  dists::InitScheme s;
  s.name = dists::SchemeName::he_normal;
  s.bias.kind = dists::Kind::normal;
  s.bias.variance = 0.04;

  const netgen::Architecture a{fc({3, 2, 2})};
  rng::Stream rs = rng::derive_stream(77, 0);
  auto net = netgen::sample_net(a, s, rs);

  rng::Stream replay = rng::derive_stream(77, 0);
  const auto layers = {dists::resolve_layer(s, 3, 2), dists::resolve_layer(s, 2, 2)};
  int li = 0;
  for (const auto& l : layers) {
    const auto& w = net.parts[0].weights[li];
    for (std::size_t i = 0; i < w.size(); ++i)
      CHECK(w[i] == dists::sample(l.weights, replay));
    const auto& b = net.parts[0].biases[li];
    for (std::size_t i = 0; i < b.size(); ++i)
      CHECK(b[i] == dists::sample(l.biases, replay));
    ++li;
  }
}

TEST_CASE("sampled weight variance tracks the scheme") {
  dists::InitScheme s;
  s.name = dists::SchemeName::he_normal;
  const netgen::Architecture a{fc({200, 500, 10})};
  rng::Stream rs = rng::derive_stream(9, 2);
  auto net = netgen::sample_net(a, s, rs);
  const auto& w = net.parts[0].weights[0];
  double sumsq = 0.0;
  for (double x : w) sumsq += x * x;
  const double v = sumsq / static_cast<double>(w.size());
  const double target = 2.0 / 200.0;
  // 100k draws, se ~ target * sqrt(2/n)
  CHECK(std::abs(v - target) < 5.0 * target * std::sqrt(2.0 / static_cast<double>(w.size())));
}

TEST_CASE("sample_net_into reuses buffers and reproduces sample_net") {
  dists::InitScheme s;
  s.name = dists::SchemeName::he_uniform;
  const netgen::Architecture a{fc({4, 6, 3})};

  rng::Stream r1 = rng::derive_stream(9, 3);
  auto fresh = netgen::sample_net(a, s, r1);

  netgen::NetInstance reused;
  rng::Stream warm = rng::derive_stream(1234, 0);
  netgen::sample_net_into(reused, a, s, warm);  // populate with other values first
  rng::Stream r2 = rng::derive_stream(9, 3);
  netgen::sample_net_into(reused, a, s, r2);
  CHECK(reused.parts[0].weights == fresh.parts[0].weights);
  CHECK(reused.parts[0].biases == fresh.parts[0].biases);
}

TEST_CASE("architecture JSON round trips") {
  const std::string fc_json = R"({"type":"fc","widths":[20,30,10]})";
  auto a = netgen::arch_from_json(fc_json);
  CHECK(std::holds_alternative<netgen::FcArch>(a));
  CHECK(netgen::arch_to_json(a) == netgen::arch_to_json(netgen::arch_from_json(netgen::arch_to_json(a))));

  const std::string conv_json =
      R"({"type":"conv","input":[8,8,3],"layers":[{"out":5,"kernel":3,"padding":"circular"},{"out":2,"kernel":1,"padding":"zero"}]})";
  auto c = netgen::arch_from_json(conv_json);
  CHECK(std::holds_alternative<netgen::ConvArch>(c));
  const auto& cc = std::get<netgen::ConvArch>(c);
  CHECK(cc.height == 8);
  CHECK(cc.channels == 3);
  CHECK(cc.layers[1].padding == netgen::Padding::zero);
  CHECK(netgen::arch_to_json(c) == netgen::arch_to_json(netgen::arch_from_json(netgen::arch_to_json(c))));

  const std::string res_json =
      R"({"type":"residual","width":5,"module_depth":2,"scales":{"kind":"geom","value":0.5,"count":4}})";
  auto r = netgen::arch_from_json(res_json);
  CHECK(std::holds_alternative<netgen::ResidualArch>(r));
  const auto& rr = std::get<netgen::ResidualArch>(r);
  CHECK(rr.schedule.kind == netgen::ScaleKind::geometric);
  CHECK(rr.schedule.scales() == std::vector<double>{0.5, 0.25, 0.125, 0.0625});
  CHECK(netgen::arch_to_json(r) == netgen::arch_to_json(netgen::arch_from_json(netgen::arch_to_json(r))));

  auto rl = netgen::arch_from_json(R"({"type":"residual","width":3,"scales":[1.0,0.1,0.01]})");
  const auto& rrl = std::get<netgen::ResidualArch>(rl);
  CHECK(rrl.module_depth == 1);
  CHECK(rrl.schedule.kind == netgen::ScaleKind::explicit_list);
  CHECK(rrl.schedule.scales() == std::vector<double>{1.0, 0.1, 0.01});

  CHECK_THROWS_AS(netgen::arch_from_json("{"), std::invalid_argument);
  CHECK_THROWS_AS(netgen::arch_from_json(R"({"type":"rnn"})"), std::invalid_argument);
  CHECK_THROWS_AS(netgen::arch_from_json(R"({"type":"fc","widths":[5]})"), std::invalid_argument);
}
