#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "support.hpp"
#include "tractconn/io/bytes.hpp"
#include "tractconn/io/checkpoint.hpp"
#include "tractconn/io/manifest.hpp"
#include "tractconn/io/tck.hpp"
#include "tractconn/io/text.hpp"
#include "tractconn/net/architecture.hpp"
#include "tractconn/random.hpp"

using namespace tractconn;
using testing_support::expect_error;

namespace {

std::string f32_triplet(float x, float y, float z) {
  std::string s;
  io::put_f32(s, x);
  io::put_f32(s, y);
  io::put_f32(s, z);
  return s;
}

const float kNaN = std::numeric_limits<float>::quiet_NaN();
const float kInf = std::numeric_limits<float>::infinity();

std::string handmade_tck(const std::string& body, const std::string& extra = "count: 1\n") {
  std::string header = "mrtrix tracks\ndatatype: Float32LE\n" + extra;
  // "file: . NNN\nEND\n" with a three-digit offset.
  const std::size_t offset = header.size() + std::string("file: . 000\nEND\n").size();
  char buf[32];
  std::snprintf(buf, sizeof buf, "file: . %03zu\nEND\n", offset);
  return header + buf + body;
}

Tractogram random_tractogram(Rng& rng) {
  Tractogram t(rng.below(12));
  for (auto& s : t) {
    s.points.resize(2 + rng.below(40));
    for (auto& p : s.points)
      for (auto& c : p) c = static_cast<float>(rng.uniform(-150.0, 150.0));
  }
  return t;
}

}  // namespace

TEST(Tck, EmptyTractogram) {
  const auto bytes = io::write_tck({});
  const auto file = io::read_tck(bytes);
  EXPECT_TRUE(file.tracks.empty());
  ASSERT_NE(file.header.find("count"), nullptr);
  EXPECT_EQ(*file.header.find("count"), "0");
  EXPECT_EQ(bytes.size() - file.header.data_offset, 12u);
}

TEST(Tck, MinimalHandmadeFile) {
  const auto body = f32_triplet(0, 0, 0) + f32_triplet(1, 0, 0) + f32_triplet(kNaN, kNaN, kNaN) +
                    f32_triplet(kInf, kInf, kInf);
  const auto file = io::read_tck(handmade_tck(body));
  ASSERT_EQ(file.tracks.size(), 1u);
  ASSERT_EQ(file.tracks[0].points.size(), 2u);
  EXPECT_EQ(file.tracks[0].points[1], (Vec3{1, 0, 0}));
}

TEST(Tck, CountZeroThenInfinity) {
  const auto file = io::read_tck(handmade_tck(f32_triplet(kInf, kInf, kInf), "count: 0\n"));
  EXPECT_TRUE(file.tracks.empty());
}

TEST(Tck, BodySizeForOneStreamline) {
  Streamline s;
  for (int i = 0; i < 15; ++i) s.points.push_back({static_cast<double>(i), 0, 0});
  const auto bytes = io::write_tck({s});
  const auto header = io::parse_tck_header(bytes);
  EXPECT_EQ(bytes.size() - header.data_offset, (15u + 1 + 1) * 12);
}

TEST(Tck, HeaderOffsetIsSelfConsistent) {
  // Offsets that cross a digit boundary need the fixed-point iteration.
  for (std::size_t pad : {0u, 50u, 60u, 70u, 80u, 900u, 1000u}) {
    io::HeaderFields fields{{"note", std::string(pad, 'x')}};
    const auto bytes = io::write_tck({}, fields);
    const auto header = io::parse_tck_header(bytes);
    EXPECT_EQ(bytes.substr(header.data_offset - 4, 4), "END\n");
  }
}

TEST(Tck, PreservesUnknownKeysInOrder) {
  io::HeaderFields fields{{"timestamp", "1234"}, {"count", "99"}, {"step_size", "0.5"}};
  const auto bytes = io::write_tck({}, fields);
  const auto header = io::read_tck(bytes).header;
  ASSERT_GE(header.fields.size(), 4u);
  EXPECT_EQ(header.fields[0].first, "timestamp");
  EXPECT_EQ(header.fields[1], (std::pair<std::string, std::string>{"count", "0"}));
  EXPECT_EQ(header.fields[2].first, "step_size");
}

TEST(Tck, RoundTripIsBitExact) {
  Rng rng(20240601);
  for (int trial = 0; trial < 200; ++trial) {
    const auto tracks = random_tractogram(rng);
    const auto bytes = io::write_tck(tracks, {{"source", "trial" + std::to_string(trial)}});
    const auto file = io::read_tck(bytes);
    ASSERT_EQ(file.tracks.size(), tracks.size());
    for (std::size_t i = 0; i < tracks.size(); ++i) ASSERT_EQ(file.tracks[i].points, tracks[i].points);
    ASSERT_EQ(io::write_tck(file.tracks, file.header.fields), bytes);
  }
}

TEST(Tck, RefusesNonFinitePoints) {
  Streamline s{{{0, 0, 0}, {std::nan(""), 1, 2}}};
  expect_error(Errc::NonFinitePoint, [&] { io::write_tck({s}); });
  Streamline big{{{0, 0, 0}, {1e300, 1, 2}}};  // overflows float32
  expect_error(Errc::NonFinitePoint, [&] { io::write_tck({big}); });
  Streamline short_line{{{0, 0, 0}}};
  expect_error(Errc::ShortStreamline, [&] { io::write_tck({short_line}); });
}

TEST(Tck, MalformedInputs) {
  const auto good = io::write_tck({Streamline{{{0, 0, 0}, {1, 2, 3}, {4, 5, 6}}}});
  expect_error(Errc::BadMagic, [&] { io::read_tck("mrtrix image\nEND\n"); });
  expect_error(Errc::BadMagic, [&] { io::read_tck(""); });
  expect_error(Errc::TruncatedData, [&] { io::read_tck(good.substr(0, good.size() - 12)); });
  expect_error(Errc::TruncatedData, [&] { io::read_tck(good.substr(0, good.size() - 5)); });
  std::string wrong = good;
  wrong.replace(wrong.find("Float32LE"), 9, "Float64BE");
  expect_error(Errc::UnsupportedDatatype, [&] { io::read_tck(wrong); });
  std::string no_end = "mrtrix tracks\ndatatype: Float32LE\nfile: . 40\n";
  expect_error(Errc::MalformedHeader, [&] { io::read_tck(no_end); });
  expect_error(Errc::MalformedHeader, [&] { io::read_tck("mrtrix tracks\ndatatype: Float32LE\nEND\n"); });
  expect_error(Errc::MalformedHeader, [&] { io::read_tck("mrtrix tracks\nno colon here\nEND\n"); });
  expect_error(Errc::CountMismatch, [&] {
    io::read_tck(handmade_tck(f32_triplet(kInf, kInf, kInf), "count: 3\n"));
  });
  expect_error(Errc::ShortStreamline, [&] {
    io::read_tck(handmade_tck(f32_triplet(1, 1, 1) + f32_triplet(kNaN, kNaN, kNaN) + f32_triplet(kInf, kInf, kInf)));
  });
  expect_error(Errc::NonFinitePoint, [&] {
    io::read_tck(handmade_tck(f32_triplet(1, kNaN, 1) + f32_triplet(2, 2, 2) + f32_triplet(kNaN, kNaN, kNaN) +
                              f32_triplet(kInf, kInf, kInf)));
  });
}

TEST(Tck, FuzzedInputsOnlyRaiseDeclaredErrors) {
  Rng rng(99);
  const auto good = io::write_tck(random_tractogram(rng), {{"k", "v"}});
  for (std::size_t cut = 0; cut < good.size(); ++cut) {
    try {
      io::read_tck(good.substr(0, cut));
    } catch (const Error&) {
    }
  }
  for (int trial = 0; trial < 3000; ++trial) {
    std::string bytes = good;
    const auto flips = 1 + rng.below(4);
    for (std::uint64_t f = 0; f < flips; ++f) bytes[rng.below(bytes.size())] = static_cast<char>(rng.below(256));
    try {
      const auto file = io::read_tck(bytes);
      for (const auto& t : file.tracks)
        for (const auto& p : t.points)
          for (double c : p) ASSERT_TRUE(std::isfinite(c));
    } catch (const Error&) {
    }
  }
}

TEST(Assignments, ParsesPairs) {
  const auto pairs = io::read_assignments("7 76\n# comment\n\n0 5\n", 2, 84);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0], (NodePair{7, 76}));
  EXPECT_EQ(pairs[1], (NodePair{0, 5}));
  EXPECT_EQ(io::write_assignments(pairs), "7 76\n0 5\n");
}

TEST(Assignments, Errors) {
  expect_error(Errc::NodeOutOfRange, [] { io::read_assignments("85 3\n", 1, 84); });
  expect_error(Errc::LineCountMismatch, [] { io::read_assignments("1 2\n", 2, 84); });
  expect_error(Errc::ParseError, [] { io::read_assignments("1\n", 1, 84); });
  expect_error(Errc::ParseError, [] { io::read_assignments("1 x\n", 1, 84); });
  expect_error(Errc::ParseError, [] { io::read_assignments("-1 2\n", 1, 84); });
}

TEST(Classes, RoundTripAndRange) {
  const std::vector<ClassId> labels{0, 5, 3570};
  EXPECT_EQ(io::read_classes(io::write_classes(labels), 3571), labels);
  expect_error(Errc::ClassOutOfRange, [] { io::read_classes("3571\n", 3571); });
}

TEST(MatrixCsv, FormatAndValidation) {
  CountMatrix m(2, 2);
  m(0, 1) = m(1, 0) = 3;
  EXPECT_EQ(io::write_matrix_csv(m), "0,3\n3,0\n");
  EXPECT_EQ(io::read_matrix_csv("0,3\n3,0\n"), m);
  expect_error(Errc::NotSymmetric, [] { io::read_matrix_csv("0,1\n2,0\n"); });
  expect_error(Errc::NotSquare, [] { io::read_matrix_csv("0,1,2\n1,0,2\n"); });
  expect_error(Errc::NegativeEntry, [] { io::read_matrix_csv("0,-1\n-1,0\n"); });
  EXPECT_EQ(io::read_matrix_csv("0,-1\n-1,0\n", true)(0, 1), -1);
}

TEST(MatrixCsv, RandomRoundTrip) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    CountMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = static_cast<std::int64_t>(rng.below(100000));
    ASSERT_EQ(io::read_matrix_csv(io::write_matrix_csv(m)), m);
  }
}

TEST(Checkpoint, RoundTripAndParameterCount) {
  net::Architecture arch;
  arch.point_widths = {4, 8};
  arch.trunk_widths = {6};
  arch.head_classes = {7, 11};
  const auto params = net::initialize(arch, 3);
  const std::size_t expected = (3 * 4 + 4) + (4 * 8 + 8) + (8 * 6 + 6) + (6 * 7 + 7) + (6 * 11 + 11);
  EXPECT_EQ(params.values.size(), expected);
  const auto bytes = io::save_model(params);
  const auto loaded = io::load_model(bytes);
  EXPECT_EQ(loaded, params);
  for (std::size_t i = 0; i < params.values.size(); ++i)
    ASSERT_EQ(std::bit_cast<std::uint64_t>(loaded.values[i]), std::bit_cast<std::uint64_t>(params.values[i]));
  // magic 8, version 4, P 4, three lists of (1 + k) u32, bounds 48, count 8, values.
  EXPECT_EQ(bytes.size(), 8u + 4 + 4 + 4 * 3 + 4 * 2 + 4 * 1 + 4 * 2 + 48 + 8 + 8 * expected);
}

TEST(Checkpoint, RejectsDamage) {
  net::Architecture arch;
  arch.point_widths = {4};
  arch.trunk_widths = {};
  arch.head_classes = {3};
  const auto bytes = io::save_model(net::initialize(arch, 1));
  std::string tampered = bytes;
  tampered[8 + 4 + 4 + 4] = 5;  // first point width 4 -> 5
  expect_error(Errc::ShapeMismatch, [&] { io::load_model(tampered); });
  std::string version = bytes;
  version[8] = 2;
  expect_error(Errc::VersionMismatch, [&] { io::load_model(version); });
  expect_error(Errc::BadMagic, [&] { io::load_model("NOTAMODEL..."); });
  expect_error(Errc::TruncatedData, [&] { io::load_model(bytes.substr(0, bytes.size() - 3)); });
  expect_error(Errc::ShapeMismatch, [&] { io::load_model(bytes + "x"); });
  for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
    try {
      io::load_model(bytes.substr(0, cut));
      ADD_FAILURE() << "truncated checkpoint accepted at " << cut;
    } catch (const Error&) {
    }
  }
}

TEST(Manifest, RoundTrip) {
  io::Manifest m;
  m.settings = {{"seed", "4"}};
  m.subjects = {{"sub-000", io::Split::Train}, {"sub-001", io::Split::Test}, {"sub-002", io::Split::Val}};
  const auto back = io::read_manifest(io::write_manifest(m));
  EXPECT_EQ(back.settings, m.settings);
  ASSERT_EQ(back.subjects.size(), 3u);
  EXPECT_EQ(back.in_split(io::Split::Test), std::vector<std::string>{"sub-001"});
  expect_error(Errc::ParseError, [] { io::read_manifest("sub-0 holdout\n"); });
  expect_error(Errc::ParseError, [] { io::read_manifest("a train\na test\n"); });
  expect_error(Errc::EmptyInput, [] { io::read_manifest("# nothing\n"); });
}

TEST(Files, AtomicWriteLeavesNoTemporary) {
  testing_support::TempDir dir("atomic");
  const auto path = dir.path() / "out.txt";
  io::write_file_atomic(path, "hello");
  EXPECT_EQ(io::read_file(path), "hello");
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  expect_error(Errc::Io, [&] { io::read_file(dir.path() / "missing"); });
}
