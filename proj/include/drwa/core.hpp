#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <system_error>

namespace drwa {

// Dense index wrapper so node and link ids cannot be mixed up.
template <typename Tag>
struct StrongIndex {
  std::size_t index = 0;

  constexpr StrongIndex() = default;
  constexpr explicit StrongIndex(std::size_t i) : index(i) {}

  constexpr auto operator<=>(const StrongIndex&) const = default;
};

struct NodeTag {};
struct LinkTag {};

using NodeId = StrongIndex<NodeTag>;
using LinkId = StrongIndex<LinkTag>;

using Wavelength = int;
using RequestId = std::uint64_t;

// Error hierarchy. Blocking is an outcome, never an exception.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct ConflictError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct InvariantError : Error {
  using Error::Error;
};

using Rng = std::mt19937_64;

// Monotonic seconds; injected wherever elapsed time is measured.
using Clock = std::function<double()>;

inline double steady_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

// The std:: distributions are implementation-defined, so the few draws the
// simulator needs are written out here to keep streams identical per seed.

/// Uniform on (0, 1].
inline double uniform_half_open(Rng& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

/// Uniform on (0, 1).
inline double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Unbiased integer in [0, n), n > 0 (Lemire's multiply-shift with rejection).
template <typename Gen>
std::uint64_t uniform_below(Gen&& next, std::uint64_t n) {
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  return uniform_below([&rng] { return rng(); }, n);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent sub-seed for one consumer (traffic, router, strategy) of a run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x51ed2701ULL));
}

/// Shortest round-trip decimal form of a double.
inline std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error("number formatting failed");
  return std::string(buf, end);
}

}  // namespace drwa

template <typename Tag>
struct std::hash<drwa::StrongIndex<Tag>> {
  std::size_t operator()(const drwa::StrongIndex<Tag>& id) const noexcept {
    return std::hash<std::size_t>{}(id.index);
  }
};
