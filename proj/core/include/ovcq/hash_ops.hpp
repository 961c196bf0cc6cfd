#pragma once

// Hash aggregation and grace hash join with row budgets and spill
// accounting. Results are unordered and carry no codes.
//
// Both operators hash keys with murmur3's 64-bit finalizer and resolve
// collisions by full key comparison, charged to column_comparisons. Overflow
// is spilled to `partitions` plain row files and processed recursively with a
// fresh hash seed per level; past max_depth a partition falls back to sorting.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "ovcq/operators.hpp"
#include "ovcq/stream.hpp"

namespace ovcq {

struct HashOpConfig {
  std::size_t memory_budget_rows = std::size_t{1} << 14;
  std::size_t partitions = 16;
  std::size_t max_depth = 4;
  std::filesystem::path spill_dir;

  void validate() const;
};

// Keeps at most memory_budget_rows groups in memory; rows of groups that do
// not fit are spilled. Output rows: g key columns, then one column per
// aggregate, as in group_aggregate.
RowStreamPtr hash_aggregate(RowStream& in, std::uint32_t g, const std::vector<Aggregate>& aggs,
                            const HashOpConfig& cfg, MetricsCtx& metrics);

// Inner join on the first j columns. When the build side exceeds the budget,
// both inputs are partitioned to disk. Output rows: the build row followed
// by the probe row's columns after j.
RowStreamPtr hash_join(RowStream& build, RowStream& probe, std::uint32_t j, const HashOpConfig& cfg,
                       MetricsCtx& metrics);

std::uint64_t hash_key(RowView key, std::uint64_t seed);

}  // namespace ovcq
