#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>

namespace bglr {

/// 64-bit FNV-1a, used for dataset and config provenance tokens (not cryptographic).
class Fnv1a {
 public:
  void update(const void* data, std::size_t size) noexcept {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= bytes[i];
      state_ *= 0x100000001B3ULL;
    }
  }
  void update(std::string_view s) noexcept { update(s.data(), s.size()); }
  void update(std::span<const double> values) noexcept {
    update(values.data(), values.size_bytes());
  }
  void update(std::uint64_t v) noexcept { update(&v, sizeof v); }

  std::uint64_t value() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0xCBF29CE484222325ULL;
};

std::string digest_hex(std::uint64_t digest);

inline std::uint64_t digest_of(std::string_view s) {
  Fnv1a h;
  h.update(s);
  return h.value();
}

}  // namespace bglr
