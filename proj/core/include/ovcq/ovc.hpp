#pragma once

// Offset-value codes: bit layout, the compare-and-form-codeword kernel, and
// the code algebra (max-combine, prefix truncation, boundary tests).
//
// Packed layout, 64 bits:
//   63..62  sentinel   0 early fence, 1 current run, 2 next run, 3 late fence
//   61..32  offset     ascending: arity - offset; descending: offset
//   31..0   value      ascending: column value; descending: ~value
//
// Rows are always in ascending key order. "Ascending" codes grow along the
// stream (a smaller code sorts earlier), "descending" codes shrink.

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "ovcq/error.hpp"
#include "ovcq/metrics.hpp"

namespace ovcq {

using Column = std::uint32_t;
using Row = std::vector<Column>;
using RowView = std::span<const Column>;

enum class Direction : std::uint8_t { kAscending = 0, kDescending = 1 };

enum class Sentinel : std::uint8_t {
  kEarlyFence = 0,
  kCurrent = 1,
  kNextRun = 2,
  kLateFence = 3,
};

inline constexpr std::uint32_t kMaxArity = (1u << 30) - 1;

struct KeySchema {
  std::uint32_t arity = 1;
  Direction direction = Direction::kAscending;

  // Throws kInvalidArgument unless 1 <= arity <= kMaxArity.
  void validate() const;
  bool operator==(const KeySchema&) const = default;
};

class Ovc {
 public:
  static constexpr int kSentinelShift = 62;
  static constexpr int kOffsetShift = 32;
  static constexpr std::uint64_t kOffsetMask = (std::uint64_t{1} << 30) - 1;
  static constexpr std::uint64_t kValueMask = 0xFFFFFFFFull;

  constexpr Ovc() = default;

  static constexpr Ovc from_raw(std::uint64_t raw) { return Ovc(raw); }
  static constexpr Ovc pack(Sentinel s, std::uint32_t offset_field, std::uint32_t value_field) {
    return Ovc((std::uint64_t{static_cast<std::uint8_t>(s)} << kSentinelShift) |
               ((offset_field & kOffsetMask) << kOffsetShift) | value_field);
  }
  static constexpr Ovc early_fence() { return Ovc(0); }
  static constexpr Ovc late_fence() { return Ovc(~std::uint64_t{0}); }

  constexpr std::uint64_t raw() const { return raw_; }
  constexpr Sentinel sentinel() const { return static_cast<Sentinel>(raw_ >> kSentinelShift); }
  constexpr std::uint32_t offset_field() const {
    return static_cast<std::uint32_t>((raw_ >> kOffsetShift) & kOffsetMask);
  }
  constexpr std::uint32_t value_field() const { return static_cast<std::uint32_t>(raw_ & kValueMask); }

  constexpr bool is_fence() const {
    return sentinel() == Sentinel::kEarlyFence || sentinel() == Sentinel::kLateFence;
  }
  constexpr bool is_current() const { return sentinel() == Sentinel::kCurrent; }

  constexpr Ovc with_sentinel(Sentinel s) const {
    return Ovc((raw_ & ~(std::uint64_t{3} << kSentinelShift)) |
               (std::uint64_t{static_cast<std::uint8_t>(s)} << kSentinelShift));
  }

  constexpr auto operator<=>(const Ovc&) const = default;

 private:
  constexpr explicit Ovc(std::uint64_t raw) : raw_(raw) {}
  std::uint64_t raw_ = 0;
};

// Field accessors interpreted against a schema. Both require a valid code.
std::uint32_t offset_of(Ovc code, const KeySchema& schema);
Column value_of(Ovc code, const KeySchema& schema);

// Builds a current-run code for (offset, value). offset == arity yields the
// duplicate code and ignores value.
Ovc make_code(std::uint32_t offset, Column value, const KeySchema& schema);
Ovc duplicate_code(const KeySchema& schema);

Ovc encode_first(RowView row, const KeySchema& schema);

// Code of `row` relative to `base`; throws kOrderViolation when row < base.
// When `column_comparisons` is non-null it receives the count of column pairs
// inspected (offset + 1, or arity for duplicates).
Ovc derive_code(RowView base, RowView row, const KeySchema& schema,
                std::uint64_t* column_comparisons = nullptr);

enum class Side : std::uint8_t { kA = 0, kB = 1 };

struct CompareResult {
  Side winner;
  Ovc loser_code;
};

enum class CheckMode : std::uint8_t { kFast, kChecked };

// Decides which of two rows coded against the same base sorts first and
// returns the loser's code relative to the winner. Unequal codes decide
// without touching columns; equal codes compare columns past the shared
// offset. `tie_winner` decides full-key ties. kChecked re-verifies the codes
// against the rows and throws kBaseMismatch on disagreement.
CompareResult compare_form_codeword(RowView a, Ovc code_a, RowView b, Ovc code_b,
                                    const KeySchema& schema, Side tie_winner, MetricsCtx& metrics,
                                    CheckMode mode = CheckMode::kFast);

// Code of the far end of a two-link chain: max for ascending, min for
// descending. Throws kFenceInput on fences.
Ovc max_combine(Ovc a, Ovc b, const KeySchema& schema);

// Re-expresses a code at arity prefix_len (offsets at or past the prefix
// become the duplicate code).
Ovc truncate_to_prefix(Ovc code, std::uint32_t prefix_len, const KeySchema& schema);

// Re-expresses a code at a wider arity with every offset shifted right by
// `shift` (a duplicate stays a duplicate).
Ovc shift_code(Ovc code, std::uint32_t shift, const KeySchema& from, const KeySchema& to);

// Precomputed single-comparison boundary test: offset(code) < prefix_len.
class BoundaryTest {
 public:
  BoundaryTest(std::uint32_t prefix_len, const KeySchema& schema);
  bool operator()(Ovc code) const {
    return ascending_ ? code.raw() > threshold_ : code.raw() < threshold_;
  }

 private:
  std::uint64_t threshold_;
  bool ascending_;
};

bool is_boundary(Ovc code, std::uint32_t prefix_len, const KeySchema& schema);

// Throws kFenceInput on fences.
bool is_duplicate(Ovc code, const KeySchema& schema);

}  // namespace ovcq
