#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace petrowave {

// Shortest decimal form that round-trips a double (17 significant digits).
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

// FNV-1a, used for config fingerprints and output checksums in manifests.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

}  // namespace petrowave
