#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>

namespace fsmp {

inline std::uint64_t fnv1aBytes(const void* data, std::size_t n,
                                std::uint64_t h = 14695981039346656037ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

template <typename T>
std::uint64_t fnv1aValue(const T& v, std::uint64_t h = 14695981039346656037ull) {
  static_assert(std::is_trivially_copyable_v<T>);
  return fnv1aBytes(&v, sizeof v, h);
}

// Exact bit-level round trip for doubles in text artifacts.
inline std::string doubleBits(double d) {
  std::uint64_t u;
  std::memcpy(&u, &d, sizeof u);
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = hex[u & 0xf];
    u >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

inline double bitsToDouble(const std::string& s) {
  if (s.size() != 16) throw std::runtime_error("doubleBits: expected 16 hex digits");
  std::uint64_t u = 0;
  for (const char c : s) {
    u <<= 4;
    if (c >= '0' && c <= '9')
      u |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f')
      u |= static_cast<std::uint64_t>(c - 'a' + 10);
    else
      throw std::runtime_error("doubleBits: bad hex digit");
  }
  double d;
  std::memcpy(&d, &u, sizeof d);
  return d;
}

// Shortest decimal form that round-trips exactly.
inline std::string doubleText(double d) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, res.ptr);
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = hex[v & 0xf];
    v >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace fsmp
