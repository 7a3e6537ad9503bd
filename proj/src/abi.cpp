#include "greyant/abi.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace greyant {

bool is_variable(AbiType t) { return t == AbiType::String || t == AbiType::Bytes_; }

size_t bit_width(AbiType t) {
  switch (t) {
    case AbiType::U8: return 8;
    case AbiType::U16: return 16;
    case AbiType::U32: return 32;
    case AbiType::U64: return 64;
    case AbiType::I64: return 64;
    case AbiType::NameT: return 64;
    case AbiType::Asset: return 64;
    case AbiType::PublicKey: return 264;
    case AbiType::String:
    case AbiType::Bytes_: return 0;
  }
  return 0;
}

const char* abi_type_name(AbiType t) {
  switch (t) {
    case AbiType::U8: return "u8";
    case AbiType::U16: return "u16";
    case AbiType::U32: return "u32";
    case AbiType::U64: return "u64";
    case AbiType::I64: return "i64";
    case AbiType::NameT: return "name";
    case AbiType::Asset: return "asset";
    case AbiType::PublicKey: return "public_key";
    case AbiType::String: return "string";
    case AbiType::Bytes_: return "bytes";
  }
  return "?";
}

std::optional<AbiType> parse_abi_type(std::string_view s) {
  if (s == "u8") return AbiType::U8;
  if (s == "u16") return AbiType::U16;
  if (s == "u32") return AbiType::U32;
  if (s == "u64") return AbiType::U64;
  if (s == "i64") return AbiType::I64;
  if (s == "name") return AbiType::NameT;
  if (s == "asset") return AbiType::Asset;
  if (s == "public_key") return AbiType::PublicKey;
  if (s == "string") return AbiType::String;
  if (s == "bytes") return AbiType::Bytes_;
  return std::nullopt;
}

const AbiEntry* AbiDescriptor::find(Name action) const {
  for (const auto& e : entries) {
    auto n = Name::parse(e.fn_name);
    if (n && *n == action) return &e;
  }
  return nullptr;
}

const AbiEntry* AbiDescriptor::find(std::string_view fn_name) const {
  for (const auto& e : entries) {
    if (e.fn_name == fn_name) return &e;
  }
  return nullptr;
}

SortedParams sort_params(const std::vector<AbiType>& params) {
  SortedParams out;
  out.index_map.resize(params.size());
  std::iota(out.index_map.begin(), out.index_map.end(), size_t{0});
  std::stable_sort(out.index_map.begin(), out.index_map.end(), [&](size_t a, size_t b) {
    bool va = is_variable(params[a]);
    bool vb = is_variable(params[b]);
    if (va != vb) return vb;  // fixed before variable
    if (va) return false;     // variable entries keep original order
    return bit_width(params[a]) < bit_width(params[b]);
  });
  out.sorted.reserve(params.size());
  for (size_t idx : out.index_map) out.sorted.push_back(params[idx]);
  return out;
}

size_t min_input_length(const std::vector<AbiType>& params) {
  size_t bits = 0;
  size_t variable = 0;
  for (AbiType t : params) {
    if (is_variable(t)) {
      ++variable;
    } else {
      bits += bit_width(t);
    }
  }
  return (bits + 7) / 8 + variable;
}

static uint64_t read_be(std::span<const uint8_t> bytes, size_t offset, size_t nbytes) {
  uint64_t v = 0;
  for (size_t i = 0; i < nbytes; ++i) v = (v << 8) | bytes[offset + i];
  return v;
}

static void write_be(Bytes& out, uint64_t v, size_t nbytes) {
  for (size_t i = 0; i < nbytes; ++i) {
    out.push_back(static_cast<uint8_t>((v >> (8 * (nbytes - 1 - i))) & 0xFF));
  }
}

// Equal-split lengths for `total` bytes over `n` variable parameters:
// leftmost `total % n` parameters get one extra byte.
static std::vector<size_t> split_lengths(size_t total, size_t n) {
  std::vector<size_t> out(n, total / n);
  for (size_t i = 0; i < total % n; ++i) ++out[i];
  return out;
}

ParamVector bytes_to_params(std::span<const uint8_t> bytes, const std::vector<AbiType>& params) {
  size_t need = min_input_length(params);
  if (bytes.size() < need) {
    throw CodecError("input too short: " + std::to_string(bytes.size()) + " < " +
                     std::to_string(need) + " bytes");
  }

  SortedParams sp = sort_params(params);
  ParamVector out(params.size());
  size_t pos = 0;
  std::vector<size_t> variable_slots;
  for (size_t j = 0; j < sp.sorted.size(); ++j) {
    AbiType t = sp.sorted[j];
    size_t orig = sp.index_map[j];
    if (is_variable(t)) {
      variable_slots.push_back(orig);
      out[orig].type = t;
      continue;
    }
    size_t nbytes = bit_width(t) / 8;
    out[orig].type = t;
    if (t == AbiType::PublicKey) {
      out[orig].blob.assign(bytes.begin() + pos, bytes.begin() + pos + nbytes);
    } else {
      out[orig].num = read_be(bytes, pos, nbytes);
    }
    pos += nbytes;
  }

  size_t remaining = bytes.size() - pos;
  if (variable_slots.empty()) {
    if (remaining != 0) {
      throw CodecError("trailing bytes: " + std::to_string(remaining) +
                       " unconsumed with no variable-length parameter");
    }
    return out;
  }

  auto lens = split_lengths(remaining, variable_slots.size());
  for (size_t k = 0; k < variable_slots.size(); ++k) {
    size_t orig = variable_slots[k];
    out[orig].blob.assign(bytes.begin() + pos, bytes.begin() + pos + lens[k]);
    pos += lens[k];
  }
  return out;
}

Bytes params_to_bytes(const ParamVector& params) {
  std::vector<AbiType> types;
  types.reserve(params.size());
  for (const auto& p : params) types.push_back(p.type);
  SortedParams sp = sort_params(types);

  Bytes out;
  std::vector<const AbiValue*> variable_vals;
  for (size_t j = 0; j < sp.sorted.size(); ++j) {
    const AbiValue& v = params[sp.index_map[j]];
    if (is_variable(v.type)) {
      variable_vals.push_back(&v);
      continue;
    }
    size_t nbytes = bit_width(v.type) / 8;
    if (v.type == AbiType::PublicKey) {
      Bytes blob = v.blob;
      blob.resize(nbytes, 0);
      out.insert(out.end(), blob.begin(), blob.end());
    } else {
      write_be(out, v.num, nbytes);
    }
  }

  if (variable_vals.empty()) return out;

  // Canonical split: the smallest equal-split pattern covering every value,
  // with at least one byte per parameter. Shorter values are zero-padded.
  size_t n = variable_vals.size();
  size_t maxlen = 1;
  for (size_t i = 0; i < n; ++i) maxlen = std::max(maxlen, variable_vals[i]->blob.size());
  size_t last_max = 0;
  for (size_t i = 0; i < n; ++i) {
    if (variable_vals[i]->blob.size() == maxlen) last_max = i;
  }
  std::vector<size_t> lens;
  bool all_at_max_prefix = maxlen > 1 && last_max + 1 < n;
  if (all_at_max_prefix) {
    // lengths [maxlen]*(last_max+1) + [maxlen-1]*(rest) form a valid split
    lens.assign(n, maxlen - 1);
    for (size_t i = 0; i <= last_max; ++i) lens[i] = maxlen;
  } else {
    lens.assign(n, maxlen);
  }
  for (size_t i = 0; i < n; ++i) {
    Bytes blob = variable_vals[i]->blob;
    blob.resize(lens[i], 0);
    out.insert(out.end(), blob.begin(), blob.end());
  }
  return out;
}

AbiDescriptor parse_abi_file(const std::string& text) {
  AbiDescriptor out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string fn;
    if (!(ls >> fn)) continue;
    std::string rest;
    std::getline(ls, rest);
    auto open = rest.find('(');
    auto close = rest.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open) {
      throw AsmError(lineno, "expected '(' type list ')' after function name");
    }
    AbiEntry entry;
    entry.fn_name = fn;
    std::string list = rest.substr(open + 1, close - open - 1);
    std::istringstream ts(list);
    std::string tok;
    while (std::getline(ts, tok, ',')) {
      size_t b = tok.find_first_not_of(" \t");
      size_t e = tok.find_last_not_of(" \t");
      if (b == std::string::npos) continue;
      auto t = parse_abi_type(tok.substr(b, e - b + 1));
      if (!t) throw AsmError(lineno, "unknown abi type '" + tok + "'");
      entry.params.push_back(*t);
    }
    out.entries.push_back(std::move(entry));
  }
  return out;
}

}  // namespace greyant
