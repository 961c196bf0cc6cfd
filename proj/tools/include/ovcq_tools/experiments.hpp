#pragma once

// Experiment drivers behind the ovcq command-line tool. They are plain
// functions over in-memory tables so that tests and the acceptance runner can
// call them without going through argument parsing.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ovcq/hash_ops.hpp"
#include "ovcq/operators.hpp"
#include "ovcq/oracle.hpp"
#include "ovcq/scan.hpp"

namespace ovcq::tools {

enum class DataFormat { kPlain, kRle };

struct Table {
  std::uint32_t key_cols = 1;
  std::uint32_t payload_cols = 0;
  std::vector<Row> rows;
  std::size_t width() const { return std::size_t{key_cols} + payload_cols; }
};

// Detects the format from the file's magic number.
Table load_table(const std::filesystem::path& path);
// RLE output sorts the rows first.
void save_table(const Table& table, const std::filesystem::path& path, DataFormat format);
Table generate_table(const GenSpec& spec);

// Order-insensitive digest of a row multiset.
struct Checksum {
  std::uint64_t rows = 0;
  std::uint64_t sum = 0;
  void add(RowView row);
  bool operator==(const Checksum&) const = default;
  std::string hex() const;
};

struct SortResult {
  MetricsCtx metrics;
  MergeStats merge;
  std::uint64_t rows_out = 0;
  double wall_ms = 0;
  double log2_factorial = 0;
  std::vector<Violation> violations;
};

// Sorts on the table's key columns and validates the output codes.
SortResult run_sort(const Table& table, const SortConfig& cfg, const std::filesystem::path& out = {});

struct GroupBenchResult {
  MetricsCtx metrics;  // boundary detection only
  double wall_ms = 0;  // best of the repeats, grouping loop only
  std::uint64_t rows = 0;
  std::uint64_t groups = 0;
  Checksum checksum;
};

// In-stream count aggregation on the first g key columns over a coded scan of
// a sorted table. Throws kOrderViolation if the rows are not sorted.
GroupBenchResult bench_group(const Table& table, std::uint32_t g, BoundaryMode mode, int repeats = 3);

struct IntersectConfig {
  std::size_t budget_rows = 100000;
  std::size_t hash_partitions = 16;
  std::filesystem::path spill_dir;
};

struct IntersectResult {
  MetricsCtx metrics;
  double wall_ms = 0;
  Checksum checksum;
};

// "select key from t1 intersect select key from t2". The sort engine sorts
// both inputs with in-sort duplicate removal and merges them; the hash engine
// runs two hash aggregations and a hash join.
IntersectResult intersect_sort(const Table& t1, const Table& t2, const IntersectConfig& cfg);
IntersectResult intersect_hash(const Table& t1, const Table& t2, const IntersectConfig& cfg);

struct StageReport {
  std::string stage;
  std::uint64_t rows = 0;
  std::vector<Violation> violations;
  bool result_matches = true;
};

struct VerifyOptions {
  // Index of an output code to corrupt before validation; a test hook.
  std::int64_t corrupt_index = -1;
  std::size_t partitions = 1;
};

// Sorts the table and validates the coded output.
std::vector<StageReport> verify_sort(const Table& table, const VerifyOptions& opts);
// scan -> filter -> group -> merge join on data derived from `seed`, every
// stage materialized, validated and compared with a naive evaluation. With
// more than one partition, grouping runs per exchange partition and the
// partitions are merged again.
std::vector<StageReport> verify_pipeline(std::uint64_t seed, const VerifyOptions& opts);

}  // namespace ovcq::tools
