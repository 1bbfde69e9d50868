// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace deskaid {

// Every failure the library reports is a deskaid::Error carrying one of
// these codes. The CLI maps codes onto process exit statuses.
enum class ErrorCode {
  kConfig,
  kInvalidArgument,
  kIo,
  kParse,
  kHeaderMissing,
  kCountMismatch,
  kMissingColumn,
  kGeometryKindMismatch,
  kEmptyLayer,
  kDegenerateGeometry,
  kKTooLarge,
  kSamplingExhausted,
  kInsufficientNegatives,
  kGridTooSmall,
  kOutOfExtent,
  kNoDataCell,
  kMissingLayer,
  kFeaturizationFailed,
  kTooFewNodes,
  kSingleClassData,
  kNonFinite,
  kDiverged,
  kSchemaMismatch,
  kLengthMismatch,
  kTooFewRows,
  kConstantColumn,
  kUnsupportedModelKind,
  kOutOfRange,
  kEmptyMap,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Parse errors additionally carry the position of the failure.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t offset)
      : Error(ErrorCode::kParse, message + " (line " + std::to_string(line) +
                                     ", byte " + std::to_string(offset) + ")"),
        line_(line),
        offset_(offset) {}

  std::size_t line() const { return line_; }
  std::size_t offset() const { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

// ---------------------------------------------------------------------------
// Randomness. All stochastic stages take a 64-bit master seed and derive
// independent sub-streams from it, so results never depend on scheduling.

using Rng = std::mt19937_64;

// SplitMix64 finalizer applied to (seed, stream).
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

inline Rng MakeRng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(DeriveSeed(seed, stream));
}

// Uniform in [0, 1).
inline double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double UniformIn(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * Uniform01(rng);
}

// Uniform integer in [0, n).
std::uint64_t UniformIndex(Rng& rng, std::uint64_t n);

double StandardNormal(Rng& rng);

// ---------------------------------------------------------------------------
// Parallelism. Worker count is capped by DESKAID_THREADS when set.

int WorkerCount();

// Runs fn(i) for i in [0, n) across WorkerCount() threads using static
// contiguous chunks. fn must only write to per-index state.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Logging.

enum class LogLevel { kInfo, kWarning };

using LogSink = std::function<void(LogLevel, std::string_view)>;

// Replaces the sink; returns the previous one. Default writes to stderr.
LogSink SetLogSink(LogSink sink);
void Log(LogLevel level, std::string_view message);

// ---------------------------------------------------------------------------
// Text helpers.

// Shortest decimal that round-trips to the same double.
std::string FormatDouble(double value);

// Fixed-point with the given number of decimals.
std::string FormatFixed(double value, int decimals);

// Strict full-string parses; return false on any trailing garbage.
bool ParseDouble(std::string_view text, double& out);
bool ParseInt64(std::string_view text, std::int64_t& out);

std::string_view Trim(std::string_view text);

// 64-bit FNV-1a, hex-encoded.
std::string Fingerprint(std::string_view text);

}  // namespace deskaid
