#include "greyant/coverage.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>

namespace greyant {

size_t CoverageBitmap::count_nonzero() const {
  size_t n = 0;
  for (uint8_t c : cells) n += c != 0;
  return n;
}

uint64_t mix_pc(uint64_t pc) {
  uint64_t x = pc;
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDull;
  x ^= x >> 33;
  x *= 0xC4CEB9FE1A85EC53ull;
  x ^= x >> 33;
  return x;
}

void record_edge(EdgeState& state, uint64_t pc, CoverageBitmap& bitmap) {
  uint16_t cur = static_cast<uint16_t>(mix_pc(pc) & 0xFFFF);
  uint8_t& cell = bitmap.cells[cur ^ state.prev_location];
  if (cell != 0xFF) ++cell;
  state.prev_location = cur >> 1;
}

uint8_t hit_bucket(uint8_t hits) {
  if (hits == 0) return 0;
  if (hits == 1) return 1;
  if (hits == 2) return 2;
  if (hits == 3) return 3;
  if (hits <= 7) return 4;
  if (hits <= 15) return 5;
  if (hits <= 31) return 6;
  if (hits <= 127) return 7;
  return 8;
}

uint8_t bucket_mask(uint8_t hits) {
  uint8_t b = hit_bucket(hits);
  return b == 0 ? 0 : static_cast<uint8_t>(1u << (b - 1));
}

bool has_new_coverage(const CoverageBitmap& bitmap, GlobalCoverage& global) {
  bool fresh = false;
  const uint8_t* cells = bitmap.cells.data();
  uint8_t* seen = global.seen.data();
  // skip zero regions a word at a time; almost all cells are untouched
  const uint64_t* words = reinterpret_cast<const uint64_t*>(cells);
  for (size_t w = 0; w < kMapSize / 8; ++w) {
    if (words[w] == 0) continue;
    for (size_t i = w * 8; i < w * 8 + 8; ++i) {
      uint8_t mask = bucket_mask(cells[i]);
      if (mask && !(seen[i] & mask)) {
        seen[i] |= mask;
        fresh = true;
      }
    }
  }
  return fresh;
}

void export_bitmap(const CoverageBitmap& bitmap, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw ChainError("cannot open bitmap file for writing: " + path);
  size_t n = std::fwrite(bitmap.cells.data(), 1, kMapSize, f);
  std::fclose(f);
  if (n != kMapSize) throw ChainError("short bitmap write: " + path);
}

CoverageBitmap import_bitmap(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw ChainError("cannot open bitmap file: " + path);
  CoverageBitmap bitmap;
  size_t n = std::fread(bitmap.cells.data(), 1, kMapSize, f);
  uint8_t extra;
  size_t over = std::fread(&extra, 1, 1, f);
  std::fclose(f);
  if (n != kMapSize || over != 0) {
    throw ChainError("bitmap file must be exactly " + std::to_string(kMapSize) + " bytes");
  }
  return bitmap;
}

}  // namespace greyant
