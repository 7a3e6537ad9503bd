#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace greyant {

// Account name: 1-12 characters from [a-z1-5.], packed 5 bits per character
// into the low 60 bits of a u64 (first character in the highest 5 bits of
// that field). The top 4 bits are slack: well-formed names leave them zero,
// and fuzzer-supplied raw values are normalized by masking wherever a value
// is resolved to an account.
struct Name {
  uint64_t v = 0;

  static constexpr uint64_t kMask = (uint64_t(1) << 60) - 1;

  constexpr Name() = default;
  constexpr explicit Name(uint64_t raw) : v(raw) {}

  // Strict parse: rejects empty, >12 chars, bad characters, trailing '.'.
  static std::optional<Name> parse(std::string_view s);

  // Normalizes an arbitrary 64-bit pattern to a well-formed name value.
  static constexpr Name from_bits(uint64_t raw) { return Name(raw & kMask); }

  Name normalized() const { return from_bits(v); }

  std::string to_string() const;

  friend bool operator==(Name a, Name b) { return a.v == b.v; }
  friend bool operator!=(Name a, Name b) { return a.v != b.v; }
  friend bool operator<(Name a, Name b) { return a.v < b.v; }
};

// Parse-or-throw convenience for literals that are known-good at call sites.
Name name_of(std::string_view s);

}  // namespace greyant
