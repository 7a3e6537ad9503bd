#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "greyant/common.hpp"

namespace greyant {

inline constexpr size_t kMapSize = 65536;

// 65,536 one-byte saturating hit counters, the layout exchanged with
// AFL-style engines as a raw 64 KiB file.
struct CoverageBitmap {
  std::vector<uint8_t> cells;

  CoverageBitmap() : cells(kMapSize, 0) {}

  void clear() { std::fill(cells.begin(), cells.end(), 0); }
  size_t count_nonzero() const;

  friend bool operator==(const CoverageBitmap& a, const CoverageBitmap& b) {
    return a.cells == b.cells;
  }
};

struct EdgeState {
  uint16_t prev_location = 0;
};

// 64-bit finalizer used to map an instruction address to a map location.
uint64_t mix_pc(uint64_t pc);

// cur = mix_pc(pc) mod 65536; cells[cur ^ prev] saturating increment;
// prev = cur >> 1.
void record_edge(EdgeState& state, uint64_t pc, CoverageBitmap& bitmap);

// Hit-count bucket index: {0,1,2,3,4-7,8-15,16-31,32-127,128-255} -> 0..8.
uint8_t hit_bucket(uint8_t hits);
// Bit mask with the bucket's bit set, 0 for an empty cell.
uint8_t bucket_mask(uint8_t hits);

// Per-cell bitmask of hit buckets seen so far across a campaign.
struct GlobalCoverage {
  std::vector<uint8_t> seen;

  GlobalCoverage() : seen(kMapSize, 0) {}
};

// True iff some (cell, bucket) pair was unseen; updates the global map.
bool has_new_coverage(const CoverageBitmap& bitmap, GlobalCoverage& global);

// Exact 65,536-byte round trip; import throws ChainError on any other size.
void export_bitmap(const CoverageBitmap& bitmap, const std::string& path);
CoverageBitmap import_bitmap(const std::string& path);

}  // namespace greyant
