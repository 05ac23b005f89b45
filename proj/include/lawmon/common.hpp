// Copyright 2026 The lawmon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace lawmon {

using ActorId = std::int64_t;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (files, configuration, CLI arguments).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Text that does not parse. `position` is a 0-based byte offset into the
/// line (or the whole text when `line` is 0).
class ParseError : public InputError {
 public:
  ParseError(std::size_t position, const std::string& what)
      : InputError("at column " + std::to_string(position + 1) + ": " + what), position_(position), detail_(what) {}
  ParseError(std::size_t line, std::size_t position, const std::string& what)
      : InputError("at line " + std::to_string(line) + ", column " + std::to_string(position + 1) + ": " + what),
        line_(line),
        position_(position),
        detail_(what) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t position() const noexcept { return position_; }
  /// The message without the location prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_ = 0;
  std::size_t position_;
  std::string detail_;
};

/// Invalid geometry handed to a geometric predicate.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A monitor was asked to evaluate a frame it cannot judge.
class MonitorError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// km/h only appears at configuration and report boundaries.
constexpr double kmh_to_mps(double kmh) { return kmh / 3.6; }
constexpr double mps_to_kmh(double mps) { return mps * 3.6; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Strict full-string number parse; returns false on any trailing garbage.
inline bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

}  // namespace lawmon
