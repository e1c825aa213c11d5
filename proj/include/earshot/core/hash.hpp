#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace earshot {

// FNV-1a 64-bit. Used for config hashes and dataset content hashes; these
// guard against accidental mismatches, not adversaries.
class Fnv1a {
 public:
  void update(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ull;
    }
  }
  void update(const std::string& s) { update(s.data(), s.size()); }
  uint64_t digest() const { return h_; }

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h_));
    return std::string(buf);
  }

 private:
  uint64_t h_ = 0xcbf29ce484222325ull;
};

inline std::string fnv1a_hex(const std::string& s) {
  Fnv1a h;
  h.update(s);
  return h.hex();
}

inline std::string fnv1a_hex(const std::vector<unsigned char>& v) {
  Fnv1a h;
  h.update(v.data(), v.size());
  return h.hex();
}

std::string hash_file(const std::string& path);  // core/hash.cpp

}  // namespace earshot
