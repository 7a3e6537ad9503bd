#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "greyant/common.hpp"
#include "greyant/name.hpp"

namespace greyant {

enum class AbiType : uint8_t {
  U8,
  U16,
  U32,
  U64,
  I64,
  NameT,
  Asset,
  PublicKey,  // 264-bit fixed blob
  String,
  Bytes_,
};

bool is_variable(AbiType t);
// Bit width of a fixed-length type; 0 for variable-length types.
size_t bit_width(AbiType t);
const char* abi_type_name(AbiType t);
std::optional<AbiType> parse_abi_type(std::string_view s);

// A decoded parameter value. Fixed-width types up to 64 bits live in `num`;
// PublicKey, String and Bytes_ live in `blob`.
struct AbiValue {
  AbiType type = AbiType::U64;
  uint64_t num = 0;
  Bytes blob;

  friend bool operator==(const AbiValue& a, const AbiValue& b) {
    return a.type == b.type && a.num == b.num && a.blob == b.blob;
  }
};

using ParamVector = std::vector<AbiValue>;

struct AbiEntry {
  std::string fn_name;
  std::vector<AbiType> params;

  friend bool operator==(const AbiEntry& a, const AbiEntry& b) {
    return a.fn_name == b.fn_name && a.params == b.params;
  }
};

struct AbiDescriptor {
  std::vector<AbiEntry> entries;

  const AbiEntry* find(Name action) const;
  const AbiEntry* find(std::string_view fn_name) const;

  friend bool operator==(const AbiDescriptor& a, const AbiDescriptor& b) {
    return a.entries == b.entries;
  }
};

// Stable ordering: fixed-length parameters first by ascending bit width then
// original position, variable-length parameters last in original order.
// index_map[j] is the original position of sorted slot j.
struct SortedParams {
  std::vector<AbiType> sorted;
  std::vector<size_t> index_map;
};
SortedParams sort_params(const std::vector<AbiType>& params);

// Fixed widths + one guaranteed byte per variable-length parameter.
size_t min_input_length(const std::vector<AbiType>& params);
inline size_t min_input_length(const AbiEntry& e) { return min_input_length(e.params); }

// Consumes fixed widths in sorted order (big-endian), splits the remaining
// bytes equally over the variable-length parameters (leftmost parameters take
// the remainder, one extra byte each), then restores original ABI order.
// Throws CodecError when bytes are too short, or when a parameter list with
// no variable-length entry leaves trailing bytes unconsumed.
ParamVector bytes_to_params(std::span<const uint8_t> bytes, const std::vector<AbiType>& params);
inline ParamVector bytes_to_params(const Bytes& b, const std::vector<AbiType>& p) {
  return bytes_to_params(std::span<const uint8_t>(b.data(), b.size()), p);
}

// Inverse of bytes_to_params. Variable-length values whose lengths do not
// form a valid equal split are padded with trailing zero bytes up to the
// canonical split lengths, so decoding the result reproduces the values.
Bytes params_to_bytes(const ParamVector& params);

// Parses a standalone descriptor file: one `<fn> (<type>,<type>,...)` per
// line, '#' comments allowed.
AbiDescriptor parse_abi_file(const std::string& text);

}  // namespace greyant
