#pragma once

#include <cstdint>
#include <string>

namespace ovcq {

// Hardware-independent cost counters. One context per operator instance;
// contexts are combined explicitly with merge().
struct MetricsCtx {
  std::uint64_t row_comparisons = 0;
  std::uint64_t column_comparisons = 0;
  std::uint64_t code_decisions = 0;
  std::uint64_t rows_spilled = 0;
  std::uint64_t bytes_spilled = 0;

  void merge(const MetricsCtx& other) {
    row_comparisons += other.row_comparisons;
    column_comparisons += other.column_comparisons;
    code_decisions += other.code_decisions;
    rows_spilled += other.rows_spilled;
    bytes_spilled += other.bytes_spilled;
  }

  MetricsCtx& operator+=(const MetricsCtx& other) {
    merge(other);
    return *this;
  }

  bool operator==(const MetricsCtx&) const = default;

  // Flat JSON object keyed by the five counter names.
  std::string to_json() const;
  static MetricsCtx from_json(const std::string& text);
};

}  // namespace ovcq
