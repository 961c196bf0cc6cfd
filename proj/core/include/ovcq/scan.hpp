#pragma once

// Run-length encoded tables whose sorted scans produce codes without looking
// at column values, plus the synthetic data generator.
//
// RLE file layout, all little-endian:
//   u32 magic "ORLE" | u32 arity | u32 payload column count | u64 row count
//   per key column: u64 run count, then (u32 value, u64 length) per run
//   per payload column: row count u32 values

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "ovcq/stream.hpp"

namespace ovcq {

inline constexpr std::uint32_t kRleMagic = 0x454C524Fu;  // "ORLE"

struct RleRun {
  Column value;
  std::uint64_t length;
  bool operator==(const RleRun&) const = default;
};

struct RleTable {
  std::uint32_t arity = 1;
  std::uint32_t payload_cols = 0;
  std::uint64_t rows = 0;
  // A run of column i starts wherever column i or any column before it
  // changes, so runs nest inside the runs of the previous column.
  std::vector<std::vector<RleRun>> key_runs;
  std::vector<std::vector<Column>> payload;  // column-major

  std::size_t width() const { return arity + payload_cols; }

  // Rows must be sorted on the first `arity` columns (kOrderViolation otherwise).
  static RleTable encode(const std::vector<Row>& rows, std::uint32_t arity, std::uint32_t payload_cols);
  std::vector<Row> decode() const;

  // Checks run lengths, nesting and key order; throws kFormatError.
  void validate() const;

  bool operator==(const RleTable&) const = default;
};

void write_rle(const RleTable& table, const std::filesystem::path& path);
RleTable read_rle(const std::filesystem::path& path);

// Emits the table's rows in order with codes taken from run starts: the
// offset is the leftmost key column whose run begins at the row.
StreamPtr scan_with_codes(std::shared_ptr<const RleTable> table, MetricsCtx& metrics);

struct GenSpec {
  std::uint64_t rows = 0;
  std::uint32_t key_cols = 1;
  // Rows per distinct key; when > 0 the distinct key count is round(rows / ratio)
  // and distinct_per_col is ignored.
  double ratio = 0.0;
  // Per-column domain sizes (one entry per key column, or a single entry
  // used for all). The distinct key count is min(rows, product).
  std::vector<std::uint64_t> distinct_per_col;
  std::uint32_t payload_cols = 0;
  std::uint64_t seed = 0;
  bool sorted = false;
  // Explicit keys, cycled over the rows; overrides ratio and domains.
  std::vector<Row> key_pool;
};

// Every distinct key of the pool occurs at least once (when rows allow) and
// multiplicities differ by at most one. Payload values are drawn from [0, 1000).
std::vector<Row> generate(const GenSpec& spec);
RowStreamPtr generate_stream(const GenSpec& spec);

}  // namespace ovcq
