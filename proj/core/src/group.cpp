#include <algorithm>
#include <limits>

#include "ovcq/operators.hpp"

namespace ovcq {

namespace {

constexpr std::uint64_t kMax32 = std::numeric_limits<std::uint32_t>::max();

}  // namespace

GroupAggregateStream::GroupAggregateStream(StreamPtr in, std::uint32_t g, std::vector<Aggregate> aggs,
                                           MetricsCtx& metrics, BoundaryMode mode)
    : CodedStream(KeySchema{g, in->schema().direction}, g + aggs.size()),
      in_(std::move(in)),
      g_(g),
      aggs_(std::move(aggs)),
      metrics_(&metrics),
      mode_(mode),
      boundary_(g, in_->schema()),
      acc_(aggs_.size()),
      out_(g + aggs_.size()) {
  for (const auto& a : aggs_) {
    if (a.kind != AggKind::kCount && a.column >= in_->width()) {
      throw Error(ErrorKind::kInvalidArgument, "aggregate column out of range");
    }
  }
  // A lone count needs no column values after the group's first row.
  whole_key_ = g_ == in_->schema().arity;
  count_only_ = aggs_.size() == 1 && aggs_[0].kind == AggKind::kCount;
}

bool GroupAggregateStream::differs_from_group(RowView row) {
  std::uint32_t i = 0;
  while (i < g_ && row[i] == out_[i]) ++i;
  ++metrics_->row_comparisons;
  metrics_->column_comparisons += std::min(i + 1, g_);
  return i < g_;
}

void GroupAggregateStream::begin_group(RowView row, Ovc code) {
  // Keys are short; an inline loop beats a library call per group.
  for (std::uint32_t i = 0; i < g_; ++i) out_[i] = row[i];
  code_ = whole_key_ ? code : truncate_to_prefix(code, g_, in_->schema());
  if (count_only_) {
    acc_[0] = 1;
    return;
  }
  for (std::size_t k = 0; k < aggs_.size(); ++k) {
    acc_[k] = aggs_[k].kind == AggKind::kCount ? 1 : row[aggs_[k].column];
  }
}

void GroupAggregateStream::accumulate(RowView row) {
  for (std::size_t k = 0; k < aggs_.size(); ++k) {
    auto& a = acc_[k];
    switch (aggs_[k].kind) {
      case AggKind::kCount:
        ++a;
        break;
      case AggKind::kSum:
        a += row[aggs_[k].column];
        break;
      case AggKind::kMin:
        a = std::min<std::uint64_t>(a, row[aggs_[k].column]);
        break;
      case AggKind::kMax:
        a = std::max<std::uint64_t>(a, row[aggs_[k].column]);
        break;
    }
    // Counts and sums stay far below 2^64; clamping here keeps them there.
    if (a > kMax32) {
      a = kMax32 + 1;
      overflowed_ = true;
    }
  }
}

template <BoundaryMode kMode>
void GroupAggregateStream::consume_group() {
  CodedStream& in = *in_;
  while (in.next()) {
    if constexpr (kMode == BoundaryMode::kCodes) {
      const Ovc code = in.code();
      if (boundary_(code)) {
        primed_ = true;
        next_code_ = code;
        return;
      }
    } else if (differs_from_group(in.row())) {
      primed_ = true;
      next_code_ = in.code();
      return;
    }
    if (!count_only_) {
      accumulate(in.row());
    } else if (++acc_[0] > kMax32) {
      acc_[0] = kMax32 + 1;
      overflowed_ = true;
    }
  }
  done_ = true;
}

bool GroupAggregateStream::next() {
  if (done_) return false;
  if (!primed_) {
    if (!in_->next()) {
      done_ = true;
      return false;
    }
    next_code_ = in_->code();
  }
  primed_ = false;
  begin_group(in_->row(), next_code_);
  if (mode_ == BoundaryMode::kCodes) {
    consume_group<BoundaryMode::kCodes>();
  } else {
    consume_group<BoundaryMode::kFullCompare>();
  }
  if (count_only_) {
    out_[g_] = static_cast<Column>(std::min(acc_[0], kMax32));
    return true;
  }
  for (std::size_t k = 0; k < aggs_.size(); ++k) {
    out_[g_ + k] = static_cast<Column>(std::min(acc_[k], kMax32));
  }
  return true;
}

std::unique_ptr<GroupAggregateStream> group_aggregate(StreamPtr in, std::uint32_t g, std::vector<Aggregate> aggs,
                                                      MetricsCtx& metrics, BoundaryMode mode) {
  if (g < 1 || g > in->schema().arity) throw Error(ErrorKind::kInvalidArgument, "group prefix must be in [1, arity]");
  return std::make_unique<GroupAggregateStream>(std::move(in), g, std::move(aggs), metrics, mode);
}

}  // namespace ovcq
