#include <algorithm>
#include <deque>

#include "ovcq/merge.hpp"
#include "ovcq/operators.hpp"

namespace ovcq {

namespace {

class FilterStream final : public CodedStream {
 public:
  FilterStream(StreamPtr in, RowPredicate pred)
      : CodedStream(in->schema(), in->width()),
        in_(std::move(in)),
        pred_(std::move(pred)),
        pending_(duplicate_code(schema())) {}

  bool next() override {
    while (in_->next()) {
      const Ovc c = in_->code();
      if (pred_(in_->row())) {
        code_ = max_combine(pending_, c, schema());
        pending_ = duplicate_code(schema());
        return true;
      }
      pending_ = max_combine(pending_, c, schema());
    }
    return false;
  }
  RowView row() const override { return in_->row(); }
  Ovc code() const override { return code_; }

 private:
  StreamPtr in_;
  RowPredicate pred_;
  Ovc pending_;
  Ovc code_;
};

class ProjectStream final : public CodedStream {
 public:
  ProjectStream(StreamPtr in, std::vector<std::uint32_t> keep, std::uint32_t prefix)
      : CodedStream(KeySchema{prefix, in->schema().direction}, keep.size()),
        in_(std::move(in)),
        keep_(std::move(keep)),
        out_(keep_.size()) {}

  bool next() override {
    if (!in_->next()) return false;
    const RowView r = in_->row();
    for (std::size_t i = 0; i < keep_.size(); ++i) out_[i] = r[keep_[i]];
    return true;
  }
  RowView row() const override { return out_; }
  Ovc code() const override { return truncate_to_prefix(in_->code(), schema().arity, in_->schema()); }

 private:
  StreamPtr in_;
  std::vector<std::uint32_t> keep_;
  Row out_;
};

class DedupStream final : public CodedStream {
 public:
  explicit DedupStream(StreamPtr in)
      : CodedStream(in->schema(), in->width()), in_(std::move(in)), dup_(duplicate_code(schema())) {}

  bool next() override {
    while (in_->next()) {
      if (in_->code() != dup_) return true;
    }
    return false;
  }
  RowView row() const override { return in_->row(); }
  Ovc code() const override { return in_->code(); }

 private:
  StreamPtr in_;
  Ovc dup_;
};

class OrderCheckedStream final : public CodedStream {
 public:
  explicit OrderCheckedStream(StreamPtr in) : CodedStream(in->schema(), in->width()), in_(std::move(in)) {}

  bool next() override {
    if (!in_->next()) return false;
    const RowView r = in_->row();
    const auto k = schema().arity;
    if (has_prev_ && std::lexicographical_compare(r.begin(), r.begin() + k, prev_.begin(), prev_.begin() + k)) {
      throw Error(ErrorKind::kOrderViolation, "input stream is not sorted");
    }
    prev_.assign(r.begin(), r.begin() + k);
    has_prev_ = true;
    return true;
  }
  RowView row() const override { return in_->row(); }
  Ovc code() const override { return in_->code(); }

 private:
  StreamPtr in_;
  Row prev_;
  bool has_prev_ = false;
};

struct SplitState {
  StreamPtr in;
  PartitionFn part_fn;
  std::vector<std::deque<CodedRow>> queues;
  std::vector<Ovc> pending;
  bool done = false;

  // Reads input until partition p has a row or the input ends.
  void pull(std::size_t p) {
    const KeySchema& schema = in->schema();
    while (queues[p].empty() && !done) {
      if (!in->next()) {
        done = true;
        break;
      }
      const Ovc c = in->code();
      const RowView r = in->row();
      const std::size_t target = part_fn(r);
      if (target >= queues.size()) throw Error(ErrorKind::kInvalidArgument, "partition index out of range");
      for (std::size_t q = 0; q < queues.size(); ++q) {
        if (q != target) pending[q] = max_combine(pending[q], c, schema);
      }
      queues[target].push_back(CodedRow{Row(r.begin(), r.end()), max_combine(pending[target], c, schema)});
      pending[target] = duplicate_code(schema);
    }
  }
};

class SplitStream final : public CodedStream {
 public:
  SplitStream(std::shared_ptr<SplitState> state, std::size_t part)
      : CodedStream(state->in->schema(), state->in->width()), state_(std::move(state)), part_(part) {}

  bool next() override {
    auto& queue = state_->queues[part_];
    if (queue.empty()) state_->pull(part_);
    if (queue.empty()) return false;
    current_ = std::move(queue.front());
    queue.pop_front();
    return true;
  }
  RowView row() const override { return current_.row; }
  Ovc code() const override { return current_.code; }

 private:
  std::shared_ptr<SplitState> state_;
  std::size_t part_;
  CodedRow current_;
};

}  // namespace

StreamPtr filter(StreamPtr in, RowPredicate pred, MetricsCtx& /*metrics*/) {
  return std::make_unique<FilterStream>(std::move(in), std::move(pred));
}

StreamPtr project(StreamPtr in, std::vector<std::uint32_t> keep, MetricsCtx& /*metrics*/) {
  const std::uint32_t arity = in->schema().arity;
  std::uint32_t prefix = 0;
  while (prefix < keep.size() && keep[prefix] == prefix && prefix < arity) ++prefix;
  if (prefix == 0) throw Error(ErrorKind::kKeyOrderBroken, "projection must keep the leading key column first");
  for (std::size_t i = prefix; i < keep.size(); ++i) {
    if (keep[i] >= in->width()) throw Error(ErrorKind::kInvalidArgument, "projected column out of range");
    if (keep[i] < arity) throw Error(ErrorKind::kKeyOrderBroken, "key column kept out of its key position");
  }
  return std::make_unique<ProjectStream>(std::move(in), std::move(keep), prefix);
}

StreamPtr dedup(StreamPtr in, MetricsCtx& /*metrics*/) { return std::make_unique<DedupStream>(std::move(in)); }

StreamPtr order_checked(StreamPtr in) { return std::make_unique<OrderCheckedStream>(std::move(in)); }

std::vector<StreamPtr> exchange_split(StreamPtr in, std::size_t parts, PartitionFn part_fn,
                                      MetricsCtx& /*metrics*/) {
  if (parts == 0) throw Error(ErrorKind::kInvalidArgument, "exchange needs at least one partition");
  auto state = std::make_shared<SplitState>();
  state->pending.assign(parts, duplicate_code(in->schema()));
  state->queues.resize(parts);
  state->in = std::move(in);
  state->part_fn = std::move(part_fn);
  std::vector<StreamPtr> out;
  for (std::size_t p = 0; p < parts; ++p) out.push_back(std::make_unique<SplitStream>(state, p));
  return out;
}

StreamPtr exchange_merge(std::vector<StreamPtr> ins, MetricsCtx& metrics) {
  if (ins.empty()) throw Error(ErrorKind::kInvalidArgument, "exchange merge needs at least one input");
  const KeySchema schema = ins.front()->schema();
  const std::size_t width = ins.front()->width();
  return std::make_unique<MergingStream>(std::move(ins), schema, width, metrics);
}

}  // namespace ovcq
