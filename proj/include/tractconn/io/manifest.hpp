#pragma once

// Cohort manifest: one "subject split" line per subject, split one of
// train/val/test. Lines starting with '#' are comments; "key value" lines
// before the first subject record generation settings.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tractconn/error.hpp"
#include "tractconn/io/text.hpp"

namespace tractconn::io {

enum class Split { Train, Val, Test };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

struct ManifestEntry {
  std::string subject;
  Split split = Split::Train;
};

struct Manifest {
  std::vector<std::pair<std::string, std::string>> settings;
  std::vector<ManifestEntry> subjects;

  std::vector<std::string> in_split(Split s) const {
    std::vector<std::string> out;
    for (const auto& e : subjects)
      if (e.split == s) out.push_back(e.subject);
    return out;
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    for (const auto& e : subjects) out.push_back(e.subject);
    return out;
  }
};

inline std::string write_manifest(const Manifest& m) {
  std::string out = "# tractconn cohort manifest\n";
  for (const auto& [key, value] : m.settings) out += "# " + key + " " + value + "\n";
  for (const auto& e : m.subjects) out += e.subject + " " + std::string(to_string(e.split)) + "\n";
  return out;
}

inline Manifest read_manifest(std::string_view text) {
  Manifest m;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (!line.empty() && line.front() == '#') {
      const auto parts = detail::split_ws(line.substr(1));
      if (parts.size() == 2) m.settings.emplace_back(std::string(parts[0]), std::string(parts[1]));
      return;
    }
    if (detail::skippable(line)) return;
    const auto parts = detail::split_ws(line);
    if (parts.size() != 2) fail(Errc::ParseError, "manifest line " + std::to_string(line_no) + ": expected 'subject split'");
    ManifestEntry e{std::string(parts[0]), Split::Train};
    if (parts[1] == "train") e.split = Split::Train;
    else if (parts[1] == "val") e.split = Split::Val;
    else if (parts[1] == "test") e.split = Split::Test;
    else fail(Errc::ParseError, "manifest line " + std::to_string(line_no) + ": unknown split '" + std::string(parts[1]) + "'");
    for (const auto& prior : m.subjects)
      require(prior.subject != e.subject, Errc::ParseError, "manifest lists subject '" + e.subject + "' twice");
    m.subjects.push_back(std::move(e));
  });
  require(!m.subjects.empty(), Errc::EmptyInput, "manifest lists no subjects");
  return m;
}

}  // namespace tractconn::io
