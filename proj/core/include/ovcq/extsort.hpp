#pragma once

// External merge sort producing coded streams.
//
// Run generation merges memory-loads of single-row runs through one loser
// tree (or, optionally, uses replacement selection with next-run sentinels).
// Runs are spilled with their codes and prefix truncation; merging is
// fan-in limited and eagerly merges the lowest-numbered runs first. When the
// whole input fits in memory nothing is spilled and the in-memory tree feeds
// the consumer directly.

#include <cstddef>
#include <filesystem>
#include <vector>

#include "ovcq/run_file.hpp"
#include "ovcq/stream.hpp"

namespace ovcq {

enum class RunGenMode { kMiniRunMerge, kReplacementSelection };

struct SortConfig {
  std::size_t memory_budget_rows = std::size_t{1} << 14;
  std::size_t fan_in = 64;
  RunGenMode run_gen = RunGenMode::kMiniRunMerge;
  // Suppress rows whose output code is the duplicate code while merging.
  bool drop_duplicates = false;
  // Empty selects spill_directory().
  std::filesystem::path spill_dir;

  void validate() const;
};

struct MergeStats {
  std::size_t intermediate_merges = 0;
  std::size_t final_fan_in = 0;
};

std::vector<RunFile> generate_runs(RowStream& input, const KeySchema& schema, const SortConfig& cfg,
                                   MetricsCtx& metrics);

StreamPtr merge_runs(std::vector<RunFile> runs, const KeySchema& schema, std::size_t width,
                     const SortConfig& cfg, MetricsCtx& metrics, MergeStats* stats = nullptr);

StreamPtr sort(RowStream& input, const KeySchema& schema, const SortConfig& cfg, MetricsCtx& metrics,
               MergeStats* stats = nullptr);

// Convenience for in-memory inputs.
StreamPtr sort_rows(std::vector<Row> rows, std::size_t width, const KeySchema& schema,
                    const SortConfig& cfg, MetricsCtx& metrics);

}  // namespace ovcq
