#include "ovcq/ovc.hpp"

#include <algorithm>
#include <string>

namespace ovcq {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kOrderViolation: return "OrderViolation";
    case ErrorKind::kBaseMismatch: return "BaseMismatch";
    case ErrorKind::kFenceInput: return "FenceInput";
    case ErrorKind::kSpillIo: return "SpillIo";
    case ErrorKind::kFormatError: return "FormatError";
    case ErrorKind::kKeyOrderBroken: return "KeyOrderBroken";
    case ErrorKind::kSchemaMismatch: return "SchemaMismatch";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

void KeySchema::validate() const {
  if (arity < 1 || arity > kMaxArity) {
    throw Error(ErrorKind::kInvalidArgument, "key arity must be in [1, 2^30)");
  }
}

namespace {

bool ascending(const KeySchema& schema) { return schema.direction == Direction::kAscending; }

Ovc make_with(Sentinel s, std::uint32_t offset, Column value, const KeySchema& schema) {
  if (ascending(schema)) {
    if (offset >= schema.arity) return Ovc::pack(s, 0, 0);
    return Ovc::pack(s, schema.arity - offset, value);
  }
  if (offset >= schema.arity) return Ovc::pack(s, schema.arity, 0);
  return Ovc::pack(s, offset, ~value);
}

// -1 / 0 / +1 over the first `arity` columns.
int full_compare(RowView a, RowView b, std::uint32_t arity) {
  for (std::uint32_t i = 0; i < arity; ++i) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

[[noreturn]] void base_mismatch(const char* what) { throw Error(ErrorKind::kBaseMismatch, what); }

void check_value(RowView row, Ovc code, const KeySchema& schema) {
  const std::uint32_t offset = offset_of(code, schema);
  if (offset < schema.arity && row[offset] != value_of(code, schema)) {
    base_mismatch("code value disagrees with row");
  }
}

}  // namespace

std::uint32_t offset_of(Ovc code, const KeySchema& schema) {
  return ascending(schema) ? schema.arity - code.offset_field() : code.offset_field();
}

Column value_of(Ovc code, const KeySchema& schema) {
  return ascending(schema) ? code.value_field() : ~code.value_field();
}

Ovc make_code(std::uint32_t offset, Column value, const KeySchema& schema) {
  return make_with(Sentinel::kCurrent, offset, value, schema);
}

Ovc duplicate_code(const KeySchema& schema) { return make_code(schema.arity, 0, schema); }

Ovc encode_first(RowView row, const KeySchema& schema) { return make_code(0, row[0], schema); }

Ovc derive_code(RowView base, RowView row, const KeySchema& schema, std::uint64_t* column_comparisons) {
  std::uint32_t offset = 0;
  while (offset < schema.arity && base[offset] == row[offset]) ++offset;
  if (column_comparisons != nullptr) {
    *column_comparisons += offset < schema.arity ? offset + 1 : schema.arity;
  }
  if (offset == schema.arity) return duplicate_code(schema);
  if (row[offset] < base[offset]) {
    throw Error(ErrorKind::kOrderViolation,
                "row sorts before its base at column " + std::to_string(offset));
  }
  return make_code(offset, row[offset], schema);
}

CompareResult compare_form_codeword(RowView a, Ovc code_a, RowView b, Ovc code_b,
                                    const KeySchema& schema, Side tie_winner, MetricsCtx& metrics,
                                    CheckMode mode) {
  // Fences and run sentinels decide before any row is touched.
  if (code_a.is_fence() || code_b.is_fence() || code_a.sentinel() != code_b.sentinel()) {
    if (code_a.sentinel() != code_b.sentinel()) {
      return code_a.sentinel() < code_b.sentinel() ? CompareResult{Side::kA, code_b}
                                                   : CompareResult{Side::kB, code_a};
    }
    return tie_winner == Side::kA ? CompareResult{Side::kA, code_b} : CompareResult{Side::kB, code_a};
  }

  ++metrics.row_comparisons;
  const bool asc = ascending(schema);
  if (code_a != code_b) {
    ++metrics.code_decisions;
    const bool a_wins = asc ? code_a < code_b : code_a > code_b;
    if (mode == CheckMode::kChecked) {
      check_value(a, code_a, schema);
      check_value(b, code_b, schema);
      const int order = full_compare(a, b, schema.arity);
      if ((a_wins && order > 0) || (!a_wins && order < 0)) {
        base_mismatch("unequal codes disagree with row order");
      }
    }
    return a_wins ? CompareResult{Side::kA, code_b} : CompareResult{Side::kB, code_a};
  }

  const Sentinel sentinel = code_a.sentinel();
  const std::uint32_t offset = offset_of(code_a, schema);
  if (offset >= schema.arity) {
    ++metrics.code_decisions;
    if (mode == CheckMode::kChecked && full_compare(a, b, schema.arity) != 0) {
      base_mismatch("duplicate codes on unequal rows");
    }
    return tie_winner == Side::kA ? CompareResult{Side::kA, code_b} : CompareResult{Side::kB, code_a};
  }
  if (mode == CheckMode::kChecked) {
    const Column v = value_of(code_a, schema);
    if (a[offset] != v || b[offset] != v) base_mismatch("code value disagrees with row");
  }

  for (std::uint32_t i = offset + 1; i < schema.arity; ++i) {
    ++metrics.column_comparisons;
    if (a[i] != b[i]) {
      return a[i] < b[i] ? CompareResult{Side::kA, make_with(sentinel, i, b[i], schema)}
                         : CompareResult{Side::kB, make_with(sentinel, i, a[i], schema)};
    }
  }
  const Ovc dup = make_with(sentinel, schema.arity, 0, schema);
  return CompareResult{tie_winner, dup};
}

Ovc max_combine(Ovc a, Ovc b, const KeySchema& schema) {
  if (a.is_fence() || b.is_fence()) {
    throw Error(ErrorKind::kFenceInput, "max_combine requires valid codes");
  }
  return ascending(schema) ? std::max(a, b) : std::min(a, b);
}

Ovc truncate_to_prefix(Ovc code, std::uint32_t prefix_len, const KeySchema& schema) {
  if (prefix_len < 1 || prefix_len > schema.arity) {
    throw Error(ErrorKind::kInvalidArgument, "prefix length must be in [1, arity]");
  }
  if (prefix_len == schema.arity) return code;
  const KeySchema narrow{prefix_len, schema.direction};
  const std::uint32_t offset = offset_of(code, schema);
  return make_with(code.sentinel(), offset, offset < prefix_len ? value_of(code, schema) : 0, narrow);
}

Ovc shift_code(Ovc code, std::uint32_t shift, const KeySchema& from, const KeySchema& to) {
  if (to.arity != from.arity + shift || to.direction != from.direction) {
    throw Error(ErrorKind::kInvalidArgument, "shift_code target arity must equal source arity + shift");
  }
  const std::uint32_t offset = offset_of(code, from);
  return make_with(code.sentinel(), offset + shift, offset < from.arity ? value_of(code, from) : 0, to);
}

BoundaryTest::BoundaryTest(std::uint32_t prefix_len, const KeySchema& schema)
    : ascending_(ascending(schema)) {
  if (prefix_len < 1 || prefix_len > schema.arity) {
    throw Error(ErrorKind::kInvalidArgument, "prefix length must be in [1, arity]");
  }
  if (ascending_) {
    threshold_ = Ovc::pack(Sentinel::kCurrent, schema.arity - prefix_len, 0xFFFFFFFFu).raw();
  } else {
    threshold_ = Ovc::pack(Sentinel::kCurrent, prefix_len, 0).raw();
  }
}

bool is_boundary(Ovc code, std::uint32_t prefix_len, const KeySchema& schema) {
  return BoundaryTest(prefix_len, schema)(code);
}

bool is_duplicate(Ovc code, const KeySchema& schema) {
  if (code.is_fence()) throw Error(ErrorKind::kFenceInput, "is_duplicate on a fence");
  return offset_of(code, schema) >= schema.arity;
}

}  // namespace ovcq
