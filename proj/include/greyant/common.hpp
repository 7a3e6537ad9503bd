#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace greyant {

using Bytes = std::vector<uint8_t>;

std::string to_hex(const Bytes& data);
Bytes from_hex(const std::string& hex);

// FNV-1a, used for state digests and queue signatures.
uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull);

inline uint64_t fnv1a64(const Bytes& data, uint64_t seed = 0xcbf29ce484222325ull) {
  return fnv1a64(data.data(), data.size(), seed);
}

struct AsmError : std::runtime_error {
  int line;
  AsmError(int line_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CodecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ChainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by the interpreter on traps and failed assertions; a transaction
// catching it rolls back.
struct VmFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace greyant
