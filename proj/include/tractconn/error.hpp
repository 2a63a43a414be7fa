#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tractconn {

/// Every failure the library reports carries one of these codes.
enum class Errc {
  // tract_io
  BadMagic,
  UnsupportedDatatype,
  MalformedHeader,
  TruncatedData,
  CountMismatch,
  NonFinitePoint,
  ShortStreamline,
  LineCountMismatch,
  NodeOutOfRange,
  ParseError,
  NotSquare,
  NotSymmetric,
  NegativeEntry,
  VersionMismatch,
  ShapeMismatch,
  Io,
  // geometry
  DegenerateStreamline,
  ZeroExtentBounds,
  // codec / connectome
  ClassOutOfRange,
  SchemeMismatch,
  // net
  NonFiniteActivation,
  NonFiniteGradient,
  LabelOutOfRange,
  // stats
  EmptyInput,
  LengthMismatch,
  ZeroVariance,
  EigenFailure,
  NotPositiveDefinite,
  AllZeroDifferences,
  TooFewPairs,
  SubjectMismatch,
  // graph
  EmptyGraph,
  NoFinitePaths,
  // misc
  ConfigInvalid,
  InvalidArgument,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnsupportedDatatype: return "UnsupportedDatatype";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::TruncatedData: return "TruncatedData";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::NonFinitePoint: return "NonFinitePoint";
    case Errc::ShortStreamline: return "ShortStreamline";
    case Errc::LineCountMismatch: return "LineCountMismatch";
    case Errc::NodeOutOfRange: return "NodeOutOfRange";
    case Errc::ParseError: return "ParseError";
    case Errc::NotSquare: return "NotSquare";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::NegativeEntry: return "NegativeEntry";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::Io: return "Io";
    case Errc::DegenerateStreamline: return "DegenerateStreamline";
    case Errc::ZeroExtentBounds: return "ZeroExtentBounds";
    case Errc::ClassOutOfRange: return "ClassOutOfRange";
    case Errc::SchemeMismatch: return "SchemeMismatch";
    case Errc::NonFiniteActivation: return "NonFiniteActivation";
    case Errc::NonFiniteGradient: return "NonFiniteGradient";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::EigenFailure: return "EigenFailure";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::AllZeroDifferences: return "AllZeroDifferences";
    case Errc::TooFewPairs: return "TooFewPairs";
    case Errc::SubjectMismatch: return "SubjectMismatch";
    case Errc::EmptyGraph: return "EmptyGraph";
    case Errc::NoFinitePaths: return "NoFinitePaths";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, Errc code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace tractconn
