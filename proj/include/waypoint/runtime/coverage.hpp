#pragma once

// Edge coverage in the classic greybox style: every basic block has a stable
// 64-bit key, an executed edge hashes the previous and current key into a
// 16-bit map index. Guard statements contribute separate synthetic edges for
// their true/false outcomes without touching the previous-key register, so
// block-level coverage of an instrumented program stays comparable to the
// original.

#include <bitset>
#include <cstdint>
#include <string>
#include <vector>

#include "waypoint/util.hpp"

namespace waypoint::runtime {

inline constexpr size_t kCoverageSize = 1 << 16;

inline uint16_t edge_index(uint64_t prev_key, uint64_t cur_key) {
  return static_cast<uint16_t>((cur_key ^ (prev_key >> 1)) & 0xffffu);
}

inline uint16_t guard_edge_index(const std::string& guard_id, bool outcome) {
  uint64_t h = splitmix64(fnv1a64(guard_id) ^ (outcome ? 0x51u : 0xa3u));
  return static_cast<uint16_t>(h & 0xffffu);
}

class CoverageMap {
 public:
  bool test(uint16_t i) const { return bits_[i]; }
  void set(uint16_t i) { bits_[i] = true; }
  size_t count() const { return bits_.count(); }

  // Number of edges in `edges` not yet in the map.
  int count_new(const std::vector<uint16_t>& edges) const {
    int n = 0;
    for (uint16_t e : edges)
      if (!bits_[e]) ++n;
    return n;
  }

  // Adds every edge, returning how many were new.
  int merge(const std::vector<uint16_t>& edges) {
    int n = 0;
    for (uint16_t e : edges) {
      if (!bits_[e]) {
        bits_[e] = true;
        ++n;
      }
    }
    return n;
  }

 private:
  std::bitset<kCoverageSize> bits_;
};

}  // namespace waypoint::runtime
