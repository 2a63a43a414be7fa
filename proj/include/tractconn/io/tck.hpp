#pragma once

// MRtrix .tck reader/writer, single-file layout ("file: . <offset>") with
// Float32LE data only.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tractconn/error.hpp"
#include "tractconn/io/bytes.hpp"

namespace tractconn {

using Vec3 = std::array<double, 3>;

struct Streamline {
  std::vector<Vec3> points;

  friend bool operator==(const Streamline&, const Streamline&) = default;
};

using Tractogram = std::vector<Streamline>;

}  // namespace tractconn

namespace tractconn::io {

inline constexpr std::string_view kTckMagic = "mrtrix tracks";
inline constexpr std::string_view kTckDatatype = "Float32LE";

/// Header key/value pairs in file order. Keys may repeat (MRtrix writes
/// several command_history lines); unknown keys are carried through.
using HeaderFields = std::vector<std::pair<std::string, std::string>>;

struct TckHeader {
  HeaderFields fields;
  std::size_t data_offset = 0;

  /// First value stored under `key`, or nullptr.
  const std::string* find(std::string_view key) const {
    for (const auto& [k, v] : fields)
      if (k == key) return &v;
    return nullptr;
  }
};

struct TckFile {
  TckHeader header;
  Tractogram tracks;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline bool parse_size(std::string_view text, std::size_t& out) {
  text = trim(text);
  if (text.empty()) return false;
  std::size_t value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
    const std::size_t digit = static_cast<std::size_t>(c - '0');
    if (value > (std::numeric_limits<std::size_t>::max() - digit) / 10) return false;
    value = value * 10 + digit;
  }
  out = value;
  return true;
}

}  // namespace detail

inline TckHeader parse_tck_header(std::string_view bytes) {
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= bytes.size()) return false;
    auto end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    line = bytes.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    return true;
  };

  std::string_view line;
  if (!next_line(line) || line != kTckMagic) fail(Errc::BadMagic, "first line must be \"mrtrix tracks\"");

  TckHeader header;
  bool saw_end = false;
  while (next_line(line)) {
    if (line == "END") {
      saw_end = true;
      break;
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) fail(Errc::MalformedHeader, "header line without ':'");
    header.fields.emplace_back(std::string(detail::trim(line.substr(0, colon))),
                               std::string(detail::trim(line.substr(colon + 1))));
  }
  if (!saw_end) fail(Errc::MalformedHeader, "missing END line");
  const std::size_t header_end = std::min(pos, bytes.size());

  const auto* datatype = header.find("datatype");
  if (datatype == nullptr) fail(Errc::MalformedHeader, "missing datatype");
  if (*datatype != kTckDatatype) fail(Errc::UnsupportedDatatype, "datatype " + *datatype);

  const auto* file = header.find("file");
  if (file == nullptr) fail(Errc::MalformedHeader, "missing file key");
  std::string_view file_value = *file;
  if (file_value.size() < 2 || file_value.substr(0, 2) != ". ")
    fail(Errc::MalformedHeader, "only \"file: . <offset>\" is supported");
  if (!detail::parse_size(file_value.substr(2), header.data_offset))
    fail(Errc::MalformedHeader, "bad data offset");
  if (header.data_offset < header_end) fail(Errc::MalformedHeader, "data offset points inside header");
  return header;
}

inline TckFile read_tck(std::string_view bytes) {
  TckFile file;
  file.header = parse_tck_header(bytes);

  std::size_t pos = file.header.data_offset;
  if (pos > bytes.size()) fail(Errc::TruncatedData, "data offset beyond end of file");

  Streamline current;
  bool finished = false;
  while (pos + 12 <= bytes.size()) {
    const float x = get_f32(bytes, pos);
    const float y = get_f32(bytes, pos + 4);
    const float z = get_f32(bytes, pos + 8);
    pos += 12;
    if (std::isnan(x) && std::isnan(y) && std::isnan(z)) {
      if (current.points.size() < 2)
        fail(Errc::ShortStreamline, "streamline " + std::to_string(file.tracks.size()) + " has fewer than 2 points");
      file.tracks.push_back(std::move(current));
      current = {};
      continue;
    }
    if (std::isinf(x) && std::isinf(y) && std::isinf(z) && x > 0 && y > 0 && z > 0) {
      finished = true;
      break;
    }
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      fail(Errc::NonFinitePoint, "non-finite coordinate in streamline " + std::to_string(file.tracks.size()));
    current.points.push_back({x, y, z});
  }
  if (!finished) fail(Errc::TruncatedData, "end of data before terminating infinity triplet");
  if (!current.points.empty()) fail(Errc::TruncatedData, "last streamline not terminated by NaN triplet");

  if (const auto* count = file.header.find("count")) {
    std::size_t declared = 0;
    if (!detail::parse_size(*count, declared)) fail(Errc::MalformedHeader, "bad count value");
    if (declared != file.tracks.size())
      fail(Errc::CountMismatch,
           "header count " + std::to_string(declared) + " but " + std::to_string(file.tracks.size()) + " decoded");
  }
  return file;
}

/// Encodes `tracks` after a header built from `fields`. datatype, count and
/// file are rewritten in place when present and appended otherwise; every
/// other key keeps its position.
inline std::string write_tck(const Tractogram& tracks, HeaderFields fields = {}) {
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (tracks[i].points.size() < 2)
      fail(Errc::ShortStreamline, "streamline " + std::to_string(i) + " has fewer than 2 points");
    for (const auto& p : tracks[i].points)
      for (double c : p)
        if (!std::isfinite(c) || !std::isfinite(static_cast<float>(c)))
          fail(Errc::NonFinitePoint, "streamline " + std::to_string(i) + " has a non-finite coordinate");
  }

  auto set_field = [&fields](std::string_view key, std::string value) -> std::string* {
    for (auto& [k, v] : fields)
      if (k == key) {
        v = std::move(value);
        return &v;
      }
    fields.emplace_back(std::string(key), std::move(value));
    return &fields.back().second;
  };
  set_field("datatype", std::string(kTckDatatype));
  set_field("count", std::to_string(tracks.size()));
  set_field("file", ". 0");

  auto render = [&fields]() {
    std::string text(kTckMagic);
    text += '\n';
    for (const auto& [k, v] : fields) {
      text += k;
      text += ": ";
      text += v;
      text += '\n';
    }
    text += "END\n";
    return text;
  };

  // The offset appears inside the header it measures; iterate to a fixed point.
  std::string header;
  std::size_t offset = 0;
  for (;;) {
    set_field("file", ". " + std::to_string(offset));
    header = render();
    if (header.size() == offset) break;
    offset = header.size();
  }

  std::size_t total_points = 0;
  for (const auto& t : tracks) total_points += t.points.size() + 1;
  std::string out = std::move(header);
  out.reserve(out.size() + 12 * (total_points + 1));
  const float nan = std::numeric_limits<float>::quiet_NaN();
  const float inf = std::numeric_limits<float>::infinity();
  for (const auto& t : tracks) {
    for (const auto& p : t.points)
      for (double c : p) put_f32(out, static_cast<float>(c));
    for (int i = 0; i < 3; ++i) put_f32(out, nan);
  }
  for (int i = 0; i < 3; ++i) put_f32(out, inf);
  return out;
}

}  // namespace tractconn::io
