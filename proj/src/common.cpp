// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

#include "deskaid/common.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>
#include <vector>

namespace deskaid {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kHeaderMissing: return "HeaderMissing";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kGeometryKindMismatch: return "GeometryKindMismatch";
    case ErrorCode::kEmptyLayer: return "EmptyLayer";
    case ErrorCode::kDegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kSamplingExhausted: return "SamplingExhausted";
    case ErrorCode::kInsufficientNegatives: return "InsufficientNegatives";
    case ErrorCode::kGridTooSmall: return "GridTooSmall";
    case ErrorCode::kOutOfExtent: return "OutOfExtent";
    case ErrorCode::kNoDataCell: return "NoDataCell";
    case ErrorCode::kMissingLayer: return "MissingLayer";
    case ErrorCode::kFeaturizationFailed: return "FeaturizationFailed";
    case ErrorCode::kTooFewNodes: return "TooFewNodes";
    case ErrorCode::kSingleClassData: return "SingleClassData";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDiverged: return "Diverged";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kTooFewRows: return "TooFewRows";
    case ErrorCode::kConstantColumn: return "ConstantColumn";
    case ErrorCode::kUnsupportedModelKind: return "UnsupportedModelKind";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kEmptyMap: return "EmptyMap";
  }
  return "Error";
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t UniformIndex(Rng& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection on the top of the range removes modulo bias.
  const std::uint64_t limit = Rng::max() - Rng::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

double StandardNormal(Rng& rng) {
  double u1 = Uniform01(rng);
  while (u1 <= 0.0) u1 = Uniform01(rng);
  const double u2 = Uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int WorkerCount() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("DESKAID_THREADS")) {
    std::int64_t cap = 0;
    if (ParseInt64(Trim(env), cap) && cap >= 1) {
      return static_cast<int>(cap);
    }
  }
  return hw;
}

void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(WorkerCount()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

std::mutex& LogMutex() {
  static std::mutex m;
  return m;
}

LogSink& CurrentSink() {
  static LogSink sink = [](LogLevel level, std::string_view message) {
    std::cerr << "[deskaid] " << (level == LogLevel::kWarning ? "warning: " : "")
              << message << '\n';
  };
  return sink;
}

}  // namespace

LogSink SetLogSink(LogSink sink) {
  std::lock_guard lock(LogMutex());
  LogSink previous = std::move(CurrentSink());
  CurrentSink() = std::move(sink);
  return previous;
}

void Log(LogLevel level, std::string_view message) {
  std::lock_guard lock(LogMutex());
  if (CurrentSink()) CurrentSink()(level, message);
}

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string FormatFixed(double value, int decimals) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value,
                           std::chars_format::fixed, decimals);
  std::string out(buf, res.ptr);
  if (out.starts_with("-") &&
      out.find_first_not_of("-0.") == std::string::npos) {
    out.erase(0, 1);  // no "-0.000000"
  }
  return out;
}

bool ParseDouble(std::string_view text, double& out) {
  text = Trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  if (text == "inf") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  if (text == "-inf") {
    out = -std::numeric_limits<double>::infinity();
    return true;
  }
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

bool ParseInt64(std::string_view text, std::int64_t& out) {
  text = Trim(text);
  if (text.empty()) return false;
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

std::string_view Trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::string Fingerprint(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace deskaid
