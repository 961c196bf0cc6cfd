#pragma once

// Order-preserving operators over coded streams. Every operator derives its
// output codes from its input codes: rows that are dropped fold their codes
// into a pending maximum that the next surviving row absorbs, truncation caps
// offsets at a shorter key, and repeated outputs for one key carry the
// duplicate code. None of them re-compares output rows.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ovcq/extsort.hpp"
#include "ovcq/stream.hpp"

namespace ovcq {

using RowPredicate = std::function<bool(RowView)>;

// Filter, project, dedup and exchange_split never touch key columns; their
// metrics argument is accepted for a uniform operator signature.
StreamPtr filter(StreamPtr in, RowPredicate pred, MetricsCtx& metrics);

// `keep` must begin with key columns 0..p-1 (p >= 1) and name no other key
// column; anything after the prefix is payload. The output key is the
// surviving prefix. Throws kKeyOrderBroken otherwise.
StreamPtr project(StreamPtr in, std::vector<std::uint32_t> keep, MetricsCtx& metrics);

StreamPtr dedup(StreamPtr in, MetricsCtx& metrics);

// Splits a stream at every code whose offset is below seg_len. Each segment
// is exposed as a stream keyed on the first seg_len columns.
class Segmenter {
 public:
  Segmenter(StreamPtr in, std::uint32_t seg_len);
  ~Segmenter();

  // Skips whatever is left of the current segment and moves to the next one.
  bool next_segment();
  CodedStream& segment();

  std::uint32_t seg_len() const { return seg_len_; }
  const KeySchema& input_schema() const { return in_->schema(); }
  std::size_t width() const { return in_->width(); }

 private:
  class SegmentStream;
  friend class SegmentStream;

  StreamPtr in_;
  std::uint32_t seg_len_;
  BoundaryTest boundary_;
  bool primed_ = false;
  bool done_ = false;
  std::unique_ptr<SegmentStream> current_;
};

// Re-sorts each segment of a stream sorted on (A, B) into (A, C), where A is
// the first seg_len columns and C lists `suffix` columns. Output rows are laid
// out as A, C, then the remaining columns in their original order.
StreamPtr segmented_sort(StreamPtr in, std::uint32_t seg_len, std::vector<std::uint32_t> suffix,
                         const SortConfig& cfg, MetricsCtx& metrics);

enum class AggKind { kCount, kSum, kMin, kMax };

struct Aggregate {
  AggKind kind;
  std::uint32_t column = 0;  // ignored by kCount
};

// How group boundaries are detected. kFullCompare compares the grouping
// columns of every row against the current group key (and charges them); it
// exists as the baseline for benchmarks.
enum class BoundaryMode { kCodes, kFullCompare };

class GroupAggregateStream;

// Output rows: the g grouping columns followed by one column per aggregate.
// Counts and sums saturate at 2^32 - 1 and set overflowed().
std::unique_ptr<GroupAggregateStream> group_aggregate(StreamPtr in, std::uint32_t g,
                                                      std::vector<Aggregate> aggs, MetricsCtx& metrics,
                                                      BoundaryMode mode = BoundaryMode::kCodes);

class GroupAggregateStream final : public CodedStream {
 public:
  GroupAggregateStream(StreamPtr in, std::uint32_t g, std::vector<Aggregate> aggs, MetricsCtx& metrics,
                       BoundaryMode mode);

  bool next() override;
  RowView row() const override { return out_; }
  Ovc code() const override { return code_; }
  bool overflowed() const { return overflowed_; }

 private:
  template <BoundaryMode kMode>
  void consume_group();
  bool differs_from_group(RowView row);
  void begin_group(RowView row, Ovc code);
  void accumulate(RowView row);

  StreamPtr in_;
  std::uint32_t g_;
  std::vector<Aggregate> aggs_;
  MetricsCtx* metrics_;
  BoundaryMode mode_;
  BoundaryTest boundary_;
  std::vector<std::uint64_t> acc_;
  Row out_;
  Ovc code_;
  Ovc next_code_;  // code of the row that opens the next group
  bool primed_ = false;
  bool done_ = false;
  bool overflowed_ = false;
  bool count_only_ = false;
  bool whole_key_ = false;
};

enum class JoinKind { kInner, kLeftSemi, kLeftAnti, kLeftOuter };

// Payload marker for the missing right side of a left outer join.
inline constexpr Column kNull = 0xFFFFFFFFu;

// Joins on the leading j columns of both keys. Output follows the left
// input and is keyed on the left key. Inner and outer outputs append the
// right row's non-join columns; semi and anti joins emit left rows only.
// With CheckMode::kChecked both inputs are verified to be nondecreasing and
// a regression throws kOrderViolation.
StreamPtr merge_join(StreamPtr left, StreamPtr right, std::uint32_t j, JoinKind kind, MetricsCtx& metrics,
                     CheckMode mode = CheckMode::kFast);

// Set operations on whole keys; both inputs must share the key arity.
StreamPtr intersect_distinct(StreamPtr left, StreamPtr right, MetricsCtx& metrics);
StreamPtr except_distinct(StreamPtr left, StreamPtr right, MetricsCtx& metrics);

// Inner side of a lookup (index nested-loops) join.
class LookupSource {
 public:
  virtual ~LookupSource() = default;
  virtual std::size_t width() const = 0;
  // Appends the inner rows matching `outer` in the source's order; codes are
  // filled only when inner_schema() is set.
  virtual void lookup(RowView outer, std::vector<CodedRow>& matches) = 0;
  // Key of the inner rows when lookup results carry codes.
  virtual std::optional<KeySchema> inner_schema() const { return std::nullopt; }
};

// Equality lookup: the first `join_cols` columns of an outer row probe the
// first `join_cols` columns of the inner rows. Matches come back sorted on
// the first `inner_key` inner columns; with `coded`, each match list carries
// a code chain over that key.
class IndexLookup final : public LookupSource {
 public:
  IndexLookup(std::vector<Row> rows, std::size_t width, std::uint32_t join_cols, std::uint32_t inner_key,
              bool coded);

  std::size_t width() const override { return width_; }
  void lookup(RowView outer, std::vector<CodedRow>& matches) override;
  std::optional<KeySchema> inner_schema() const override;

 private:
  std::size_t width_;
  std::uint32_t join_cols_;
  std::uint32_t inner_key_;
  bool coded_;
  std::vector<CodedRow> rows_;  // sorted on the inner key
};

// Arbitrary (not necessarily equality) join predicate over a list of inner rows.
class PredicateLookup final : public LookupSource {
 public:
  using JoinPredicate = std::function<bool(RowView outer, RowView inner)>;
  PredicateLookup(std::vector<Row> rows, std::size_t width, JoinPredicate pred);

  std::size_t width() const override { return width_; }
  void lookup(RowView outer, std::vector<CodedRow>& matches) override;

 private:
  std::vector<Row> rows_;
  std::size_t width_;
  JoinPredicate pred_;
};

// Order-preserving lookup join. Output rows are the outer row followed by
// the inner row (kNull-padded for unmatched outer rows in kLeftOuter).
// When the source is coded and the kind is inner or left outer, the output
// key becomes outer key + inner key, rows are laid out as outer key, inner
// key, outer payload, inner payload, and inner codes shift by the outer
// arity. That composite mode requires distinct outer keys.
StreamPtr lookup_join(StreamPtr outer, std::shared_ptr<LookupSource> inner, JoinKind kind, MetricsCtx& metrics);

using PartitionFn = std::function<std::size_t(RowView)>;

// One-to-many order-preserving shuffle. Every partition is a selection of
// the input, so each keeps its own pending maximum. Partitions may be
// consumed in any order; rows for the others are buffered.
std::vector<StreamPtr> exchange_split(StreamPtr in, std::size_t parts, PartitionFn part_fn,
                                      MetricsCtx& metrics);

// Many-to-one order-preserving shuffle.
StreamPtr exchange_merge(std::vector<StreamPtr> ins, MetricsCtx& metrics);

// Passes a stream through unchanged while verifying that rows never regress;
// throws kOrderViolation at the first regression.
StreamPtr order_checked(StreamPtr in);

}  // namespace ovcq
