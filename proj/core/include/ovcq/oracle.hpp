#pragma once

// Brute-force validation of coded streams. Deliberately shares nothing with
// the code-derivation paths it checks: prefixes are recomputed column by
// column and expected codes are packed here from the raw bit layout.

#include <cstdint>
#include <string>
#include <vector>

#include "ovcq/stream.hpp"

namespace ovcq {

struct Violation {
  enum class Kind { kCode, kOrder };
  std::size_t index;
  Kind kind;
  Ovc expected;
  Ovc found;

  std::string describe() const;
};

// Empty iff every code equals the code of its row relative to the previous
// row (the first against an empty base) and the rows are nondecreasing.
std::vector<Violation> recompute_codes(const std::vector<CodedRow>& rows, const KeySchema& schema);

// log2(n!) by direct summation.
double stirling_lower_bound(std::uint64_t n);

}  // namespace ovcq
