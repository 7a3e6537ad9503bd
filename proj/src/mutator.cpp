#include "greyant/mutator.hpp"

#include <algorithm>

namespace greyant {

namespace {

uint64_t read_be(const Bytes& b, size_t pos, size_t width) {
  uint64_t v = 0;
  for (size_t i = 0; i < width; ++i) v = (v << 8) | b[pos + i];
  return v;
}

void write_be(Bytes& b, size_t pos, size_t width, uint64_t v) {
  for (size_t i = 0; i < width; ++i) {
    b[pos + i] = static_cast<uint8_t>(v >> (8 * (width - 1 - i)));
  }
}

constexpr int64_t kInteresting[] = {
    0, 1, -1, 127, 128, 255, 32767, 32769, 2147483647LL, 2147483649LL,
};

}  // namespace

Bytes mutate(const Bytes& input, const Bytes& donor, Rng& rng, size_t min_len) {
  Bytes out = input;
  switch (rand_below(rng, 13)) {
    case 0:
    case 1:
    case 2: {  // flip 1/2/4 consecutive bits
      if (out.empty()) break;
      size_t nbits = size_t(1) << rand_below(rng, 3);
      size_t total = out.size() * 8;
      size_t start = rand_below(rng, total);
      for (size_t i = 0; i < nbits && start + i < total; ++i) {
        out[(start + i) / 8] ^= uint8_t(1) << ((start + i) & 7);
      }
      break;
    }
    case 3: {  // byte flip
      if (out.empty()) break;
      out[rand_below(rng, out.size())] ^= 0xFF;
      break;
    }
    case 4:
    case 5:
    case 6: {  // 8/16/32-bit arithmetic +/- [1,35]
      size_t width = size_t(1) << rand_below(rng, 3);
      if (out.size() < width) break;
      size_t pos = rand_below(rng, out.size() - width + 1);
      uint64_t v = read_be(out, pos, width);
      uint64_t delta = 1 + rand_below(rng, 35);
      v = rand_below(rng, 2) ? v + delta : v - delta;
      write_be(out, pos, width, v);
      break;
    }
    case 7: {  // interesting-value overwrite
      size_t width = size_t(1) << rand_below(rng, 3);
      if (out.size() < width) break;
      size_t pos = rand_below(rng, out.size() - width + 1);
      int64_t v = kInteresting[rand_below(rng, std::size(kInteresting))];
      write_be(out, pos, width, static_cast<uint64_t>(v));
      break;
    }
    case 8: {  // random byte
      if (out.empty()) break;
      out[rand_below(rng, out.size())] = static_cast<uint8_t>(rand_below(rng, 256));
      break;
    }
    case 9: {  // block delete
      if (out.size() < 2) break;
      size_t len = 1 + rand_below(rng, std::min(out.size() - 1, size_t(32)));
      size_t pos = rand_below(rng, out.size() - len + 1);
      out.erase(out.begin() + pos, out.begin() + pos + len);
      break;
    }
    case 10: {  // block insert (random bytes)
      size_t len = 1 + rand_below(rng, 32);
      size_t pos = rand_below(rng, out.size() + 1);
      Bytes block(len);
      for (auto& b : block) b = static_cast<uint8_t>(rand_below(rng, 256));
      out.insert(out.begin() + pos, block.begin(), block.end());
      break;
    }
    case 11: {  // block duplicate
      if (out.empty()) break;
      size_t len = 1 + rand_below(rng, std::min(out.size(), size_t(32)));
      size_t pos = rand_below(rng, out.size() - len + 1);
      Bytes block(out.begin() + pos, out.begin() + pos + len);
      out.insert(out.begin() + pos + len, block.begin(), block.end());
      break;
    }
    case 12: {  // splice: head of this input + tail of the donor
      if (donor.empty()) break;
      size_t cut_a = rand_below(rng, out.size() + 1);
      size_t cut_b = rand_below(rng, donor.size() + 1);
      out.resize(cut_a);
      out.insert(out.end(), donor.begin() + cut_b, donor.end());
      break;
    }
  }
  if (out.size() < min_len) out.resize(min_len, 0);
  return out;
}

}  // namespace greyant
