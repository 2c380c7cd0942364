#pragma once

// Byte-level greybox mutators. Each call applies one randomly chosen
// operator; results never exceed max_len. The operator set is the classic
// sextet: bit flip, byte replace, insert, delete, splice with a donor, and
// interesting-constant substitution.

#include <cstdint>
#include <vector>

#include "waypoint/util.hpp"

namespace waypoint::fuzzer {

inline constexpr uint8_t kInterestingBytes[] = {0x00, 0x01, 0x07, 0x10, 0x20,
                                                0x40, 0x7f, 0x80, 0xff};

inline std::vector<uint8_t> mutate(const std::vector<uint8_t>& input,
                                   const std::vector<uint8_t>& donor, Rng& rng,
                                   size_t max_len) {
  std::vector<uint8_t> out = input;
  // Retry until an operator applies; insert always does on non-full inputs,
  // so this terminates quickly even for empty ones.
  for (int attempt = 0; attempt < 8; ++attempt) {
    switch (rng.below(6)) {
      case 0: {  // bit flip
        if (out.empty()) break;
        size_t i = rng.below(out.size());
        out[i] ^= static_cast<uint8_t>(1u << rng.below(8));
        return out;
      }
      case 1: {  // byte replace
        if (out.empty()) break;
        out[rng.below(out.size())] = rng.byte();
        return out;
      }
      case 2: {  // insert
        if (out.size() >= max_len) break;
        out.insert(out.begin() + static_cast<long>(rng.below(out.size() + 1)), rng.byte());
        return out;
      }
      case 3: {  // delete
        if (out.empty()) break;
        out.erase(out.begin() + static_cast<long>(rng.below(out.size())));
        return out;
      }
      case 4: {  // splice: our prefix, donor's suffix
        if (donor.empty()) break;
        size_t cut = rng.below(out.size() + 1);
        size_t from = rng.below(donor.size());
        out.resize(cut);
        out.insert(out.end(), donor.begin() + static_cast<long>(from), donor.end());
        if (out.size() > max_len) out.resize(max_len);
        if (out == input) break;
        return out;
      }
      case 5: {  // interesting constant
        if (out.empty()) break;
        out[rng.below(out.size())] =
            kInterestingBytes[rng.below(sizeof(kInterestingBytes))];
        return out;
      }
    }
    out = input;
  }
  return out;
}

}  // namespace waypoint::fuzzer
