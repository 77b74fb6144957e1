// Copyright 2026 The rcnqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RCNQA_COMMON_HPP
#define RCNQA_COMMON_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rcnqa {

// Base of the project's exception hierarchy. Subclasses exist so the CLI can
// map failure categories to distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or size mismatch in a numeric kernel.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Malformed input text or data file; messages carry file/line or byte info.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Bad magic, unsupported version, truncated or corrupt binary container.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Deterministic random source. mt19937_64 has a standardized sequence, and all
// derived draws below avoid std::uniform_* distributions (whose outputs are
// implementation-defined), so streams are reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform draw in [lo, hi) with 53-bit resolution.
  double uniform(double lo, double hi) {
    const double unit =
        static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
    return lo + unit * (hi - lo);
  }

  // Uniform index in [0, n). n must be > 0.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(gen_() % static_cast<std::uint64_t>(n));
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// Round-trip-exact decimal rendering of a double ("%.17g").
std::string format_double(double v);

// Fixed four-decimal rendering ("%.4f"), used for report lines.
std::string format_fixed4(double v);

// FNV-1a 64-bit hash.
std::uint64_t fnv1a(std::string_view bytes,
                    std::uint64_t seed = 1469598103934665603ULL);

// Order-insensitive hash of a token set: tokens are sorted, de-duplicated and
// chained through fnv1a with a separator.
std::uint64_t hash_token_set(std::vector<std::string> tokens);

// Order-sensitive hash of a token sequence.
std::uint64_t hash_token_list(const std::vector<std::string>& tokens);

}  // namespace rcnqa

#endif  // RCNQA_COMMON_HPP
