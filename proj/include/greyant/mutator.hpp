#pragma once

#include <random>

#include "greyant/common.hpp"

namespace greyant {

using Rng = std::mt19937_64;

inline uint64_t rand_below(Rng& rng, uint64_t n) { return n ? rng() % n : 0; }

// Applies one randomly chosen operator (bit flips, byte flip, 8/16/32-bit
// arithmetic, interesting-value overwrite, random byte, block delete/insert/
// duplicate, splice with `donor`), then re-pads to min_len if shortened.
Bytes mutate(const Bytes& input, const Bytes& donor, Rng& rng, size_t min_len);

}  // namespace greyant
