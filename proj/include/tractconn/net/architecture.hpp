#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tractconn/error.hpp"
#include "tractconn/geometry.hpp"
#include "tractconn/random.hpp"

namespace tractconn::net {

/// Per-point MLP -> max-pool over points -> shared FC trunk -> one affine
/// head per parcellation scheme.
struct Architecture {
  std::size_t input_points = geometry::kDefaultPoints;
  std::vector<std::size_t> point_widths{64, 128, 1024};
  std::vector<std::size_t> trunk_widths{512, 256};
  std::vector<std::size_t> head_classes{3571, 13531};

  void validate() const {
    require(input_points >= 1, Errc::ConfigInvalid, "input_points must be >= 1");
    require(!point_widths.empty(), Errc::ConfigInvalid, "at least one per-point layer is required");
    require(!head_classes.empty(), Errc::ConfigInvalid, "at least one head is required");
    for (auto w : point_widths) require(w >= 1, Errc::ConfigInvalid, "layer widths must be >= 1");
    for (auto w : trunk_widths) require(w >= 1, Errc::ConfigInvalid, "layer widths must be >= 1");
    for (auto k : head_classes) require(k >= 1, Errc::ConfigInvalid, "class counts must be >= 1");
  }

  std::size_t feature_width() const { return point_widths.back(); }
  std::size_t embedding_width() const { return trunk_widths.empty() ? feature_width() : trunk_widths.back(); }
  std::size_t num_heads() const { return head_classes.size(); }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Location of one affine layer inside the flat parameter vector. Weights are
/// stored row-major as out x in, followed by the out biases.
struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;

  std::size_t param_count() const { return in * out + out; }
};

struct ParamLayout {
  std::vector<LayerShape> point;
  std::vector<LayerShape> trunk;
  std::vector<LayerShape> heads;
  std::size_t total = 0;

  static ParamLayout of(const Architecture& arch) {
    arch.validate();
    ParamLayout layout;
    auto add = [&layout](std::vector<LayerShape>& group, std::size_t in, std::size_t out) {
      LayerShape l{in, out, layout.total, layout.total + in * out};
      layout.total += l.param_count();
      group.push_back(l);
    };
    std::size_t width = 3;
    for (auto w : arch.point_widths) {
      add(layout.point, width, w);
      width = w;
    }
    for (auto w : arch.trunk_widths) {
      add(layout.trunk, width, w);
      width = w;
    }
    for (auto k : arch.head_classes) add(layout.heads, width, k);
    return layout;
  }

  /// Every layer in declared order: point, trunk, heads.
  std::vector<LayerShape> all() const {
    std::vector<LayerShape> layers(point);
    layers.insert(layers.end(), trunk.begin(), trunk.end());
    layers.insert(layers.end(), heads.begin(), heads.end());
    return layers;
  }
};

struct ModelParams {
  Architecture arch;
  geometry::Bounds bounds = geometry::Bounds::mni152();
  std::vector<double> values;

  ParamLayout layout() const { return ParamLayout::of(arch); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
inline ModelParams initialize(const Architecture& arch, std::uint64_t seed,
                              const geometry::Bounds& bounds = geometry::Bounds::mni152()) {
  bounds.validate();
  const auto layout = ParamLayout::of(arch);
  ModelParams params{arch, bounds, std::vector<double>(layout.total, 0.0)};
  Rng rng(mix_seed(seed, 0x1417));
  for (const auto& layer : layout.all()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    for (std::size_t i = 0; i < layer.in * layer.out; ++i)
      params.values[layer.weight_offset + i] = rng.uniform(-limit, limit);
  }
  return params;
}

}  // namespace tractconn::net
