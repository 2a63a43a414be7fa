#pragma once

// Model checkpoint container, little-endian throughout:
//
//   char[8]  magic "TCONNMDL"
//   u32      format version (1)
//   u32      input points P
//   u32      number of per-point layers, then u32 width each
//   u32      number of trunk layers, then u32 width each
//   u32      number of heads, then u32 class count each
//   f64 x 6  normalization bounds lo.xyz, hi.xyz
//   u64      parameter count
//   f64 x N  parameters: for each layer (point, trunk, heads) the out x in
//            weights row-major followed by the out biases

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tractconn/error.hpp"
#include "tractconn/io/bytes.hpp"
#include "tractconn/net/architecture.hpp"

namespace tractconn::io {

inline constexpr std::string_view kCheckpointMagic = "TCONNMDL";
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline std::string save_model(const net::ModelParams& params) {
  const auto layout = params.layout();
  require(params.values.size() == layout.total, Errc::ShapeMismatch, "parameter vector does not match architecture");
  std::string out(kCheckpointMagic);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.arch.input_points));
  auto put_list = [&out](const std::vector<std::size_t>& list) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(list.size()));
    for (auto v : list) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v));
  };
  put_list(params.arch.point_widths);
  put_list(params.arch.trunk_widths);
  put_list(params.arch.head_classes);
  for (double v : params.bounds.lo) put_f64(out, v);
  for (double v : params.bounds.hi) put_f64(out, v);
  put_le<std::uint64_t>(out, params.values.size());
  out.reserve(out.size() + 8 * params.values.size());
  for (double v : params.values) put_f64(out, v);
  return out;
}

inline net::ModelParams load_model(std::string_view bytes) {
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (bytes.size() - pos < n) fail(Errc::TruncatedData, "checkpoint ends early");
  };
  auto u32 = [&] {
    need(4);
    const auto v = get_le<std::uint32_t>(bytes, pos);
    pos += 4;
    return v;
  };
  auto f64 = [&] {
    need(8);
    const auto v = get_f64(bytes, pos);
    pos += 8;
    return v;
  };

  need(kCheckpointMagic.size());
  if (bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) fail(Errc::BadMagic, "not a model checkpoint");
  pos = kCheckpointMagic.size();
  const auto version = u32();
  if (version != kCheckpointVersion)
    fail(Errc::VersionMismatch, "checkpoint version " + std::to_string(version) + ", expected " +
                                    std::to_string(kCheckpointVersion));

  net::ModelParams params;
  params.arch.input_points = u32();
  auto get_list = [&] {
    const auto n = u32();
    if (n > 4096) fail(Errc::ShapeMismatch, "implausible layer count");
    std::vector<std::size_t> list(n);
    for (auto& v : list) v = u32();
    return list;
  };
  params.arch.point_widths = get_list();
  params.arch.trunk_widths = get_list();
  params.arch.head_classes = get_list();
  for (auto& v : params.bounds.lo) v = f64();
  for (auto& v : params.bounds.hi) v = f64();

  net::ParamLayout layout;
  try {
    layout = net::ParamLayout::of(params.arch);
  } catch (const Error& e) {
    fail(Errc::ShapeMismatch, e.what());
  }
  need(8);
  const auto declared = get_le<std::uint64_t>(bytes, pos);
  pos += 8;
  if (declared != layout.total)
    fail(Errc::ShapeMismatch, "checkpoint declares " + std::to_string(declared) + " parameters, architecture needs " +
                                  std::to_string(layout.total));
  need(8 * layout.total);
  if (bytes.size() - pos != 8 * layout.total) fail(Errc::ShapeMismatch, "trailing bytes after parameters");
  params.values.resize(layout.total);
  for (auto& v : params.values) v = f64();
  return params;
}

}  // namespace tractconn::io
