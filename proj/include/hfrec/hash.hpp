#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace hfrec {

// FNV-1a, used to fingerprint weight blobs and dataset contents.
class Fnv1a64 {
 public:
  void update(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }

  uint64_t digest() const { return h_; }

  std::string hex() const {
    static const char* k = "0123456789abcdef";
    std::string s(16, '0');
    uint64_t v = h_;
    for (int i = 15; i >= 0; --i) {
      s[static_cast<size_t>(i)] = k[v & 0xf];
      v >>= 4;
    }
    return s;
  }

 private:
  uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace hfrec
