#include "ovcq/oracle.hpp"

#include <cmath>
#include <sstream>

namespace ovcq {

namespace {

std::uint64_t pack_expected(std::uint32_t offset, Column value, const KeySchema& schema) {
  const std::uint64_t valid = std::uint64_t{1} << 62;
  if (schema.direction == Direction::kAscending) {
    if (offset == schema.arity) return valid;
    return valid | (std::uint64_t{schema.arity - offset} << 32) | value;
  }
  if (offset == schema.arity) return valid | (std::uint64_t{schema.arity} << 32);
  return valid | (std::uint64_t{offset} << 32) | (0xFFFFFFFFull - value);
}

}  // namespace

std::string Violation::describe() const {
  std::ostringstream os;
  os << "row " << index << ": " << (kind == Kind::kOrder ? "sort order violated" : "code mismatch")
     << " expected 0x" << std::hex << expected.raw() << " found 0x" << found.raw();
  return os.str();
}

std::vector<Violation> recompute_codes(const std::vector<CodedRow>& rows, const KeySchema& schema) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& row = rows[i].row;
    std::uint32_t offset = 0;
    bool regress = false;
    if (i > 0) {
      const Row& prev = rows[i - 1].row;
      while (offset < schema.arity && prev[offset] == row[offset]) ++offset;
      regress = offset < schema.arity && row[offset] < prev[offset];
    }
    const Ovc expected = Ovc::from_raw(pack_expected(offset, offset < schema.arity ? row[offset] : 0, schema));
    if (regress) {
      out.push_back(Violation{i, Violation::Kind::kOrder, expected, rows[i].code});
    } else if (expected != rows[i].code) {
      out.push_back(Violation{i, Violation::Kind::kCode, expected, rows[i].code});
    }
  }
  return out;
}

double stirling_lower_bound(std::uint64_t n) {
  double sum = 0.0;
  for (std::uint64_t k = 2; k <= n; ++k) sum += std::log2(static_cast<double>(k));
  return sum;
}

}  // namespace ovcq
