#include "greyant/name.hpp"

#include "greyant/common.hpp"

namespace greyant {

// Symbol codes: 0 = '.', 1-5 = '1'-'5', 6-31 = 'a'-'z'.
static int char_code(char c) {
  if (c == '.') return 0;
  if (c >= '1' && c <= '5') return c - '1' + 1;
  if (c >= 'a' && c <= 'z') return c - 'a' + 6;
  return -1;
}

static char code_char(int code) {
  if (code == 0) return '.';
  if (code <= 5) return static_cast<char>('1' + code - 1);
  return static_cast<char>('a' + code - 6);
}

std::optional<Name> Name::parse(std::string_view s) {
  if (s.empty() || s.size() > 12) return std::nullopt;
  if (s.back() == '.') return std::nullopt;
  uint64_t v = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    int code = char_code(s[i]);
    if (code < 0) return std::nullopt;
    v |= static_cast<uint64_t>(code) << (55 - 5 * i);
  }
  return Name(v);
}

std::string Name::to_string() const {
  uint64_t bits = v & kMask;
  std::string out(12, '.');
  for (size_t i = 0; i < 12; ++i) {
    out[i] = code_char(static_cast<int>((bits >> (55 - 5 * i)) & 0x1F));
  }
  while (!out.empty() && out.back() == '.') out.pop_back();
  return out;
}

Name name_of(std::string_view s) {
  auto n = Name::parse(s);
  if (!n) throw ChainError("malformed account name: " + std::string(s));
  return *n;
}

}  // namespace greyant
