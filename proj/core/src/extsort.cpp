#include "ovcq/extsort.hpp"

#include <deque>

#include "ovcq/loser_tree.hpp"
#include "ovcq/merge.hpp"
#include "ovcq/row_block.hpp"

namespace ovcq {

void SortConfig::validate() const {
  if (memory_budget_rows < 2) throw Error(ErrorKind::kInvalidArgument, "memory budget must be >= 2 rows");
  if (fan_in < 2) throw Error(ErrorKind::kInvalidArgument, "fan-in must be >= 2");
}

namespace {

struct BlockRows {
  const RowBlock* block;
  RowView operator()(std::size_t i) const { return (*block)[i]; }
};

// Pulls rows from a RowStream with one row of lookahead so callers can tell
// whether the input ended exactly at a memory boundary.
class InputCursor {
 public:
  explicit InputCursor(RowStream& in) : in_(in) {}

  bool peek() {
    if (!pending_ && !done_) {
      pending_ = in_.next();
      done_ = !pending_;
    }
    return pending_;
  }
  RowView take() {
    pending_ = false;
    return in_.row();
  }

 private:
  RowStream& in_;
  bool pending_ = false;
  bool done_ = false;
};

void fill(InputCursor& in, RowBlock& block, std::size_t budget) {
  while (block.size() < budget && in.peek()) block.push_back(in.take());
}

// Merges a memory-load of single-row runs; each pop is one output row.
class MiniRunStream final : public CodedStream {
 public:
  MiniRunStream(RowBlock block, const KeySchema& schema, MetricsCtx& metrics, bool drop_duplicates)
      : CodedStream(schema, block.width()),
        block_(std::move(block)),
        tree_(block_.size(), schema, metrics, BlockRows{&block_}),
        drop_duplicates_(drop_duplicates) {}

  bool next() override {
    if (!started_) {
      started_ = true;
      std::vector<Ovc> first(block_.size());
      for (std::size_t i = 0; i < block_.size(); ++i) first[i] = encode_first(block_[i], schema());
      tree_.build(first);
    } else if (!tree_.exhausted()) {
      tree_.replace_winner(Ovc::late_fence());
    }
    if (drop_duplicates_) {
      const Ovc dup = duplicate_code(schema());
      while (!tree_.exhausted() && tree_.winner_code() == dup) tree_.replace_winner(Ovc::late_fence());
    }
    return !tree_.exhausted();
  }
  RowView row() const override { return block_[tree_.winner_input()]; }
  Ovc code() const override { return tree_.winner_code(); }

 private:
  RowBlock block_;
  LoserTree<BlockRows> tree_;
  bool drop_duplicates_;
  bool started_ = false;
};

// Keeps the spilled runs alive while their merge streams.
class RunMergeStream final : public CodedStream {
 public:
  RunMergeStream(std::deque<RunFile> runs, StreamPtr merge)
      : CodedStream(merge->schema(), merge->width()), runs_(std::move(runs)), merge_(std::move(merge)) {}

  bool next() override { return merge_->next(); }
  RowView row() const override { return merge_->row(); }
  Ovc code() const override { return merge_->code(); }

 private:
  std::deque<RunFile> runs_;
  StreamPtr merge_;
};

RunFile spill_block(RowBlock block, const KeySchema& schema, const SortConfig& cfg, MetricsCtx& metrics) {
  MiniRunStream stream(std::move(block), schema, metrics, false);
  return spill_run(stream, cfg.spill_dir, metrics);
}

void generate_minirun(InputCursor& in, RowBlock first, const KeySchema& schema, const SortConfig& cfg,
                      MetricsCtx& metrics, std::vector<RunFile>& runs) {
  const std::size_t width = first.width();
  RowBlock block = std::move(first);
  while (!block.empty()) {
    runs.push_back(spill_block(std::move(block), schema, cfg, metrics));
    block = RowBlock(width);
    block.reserve(cfg.memory_budget_rows);
    fill(in, block, cfg.memory_budget_rows);
  }
}

// Replacement selection. Keys smaller than the last emitted key carry the
// next-run sentinel and lose every match against current-run keys by their
// sentinel bits alone. When the current run drains, the tree is rebuilt with
// the waiting keys re-coded against an empty base.
void generate_replacement(InputCursor& in, RowBlock block, const KeySchema& schema, const SortConfig& cfg,
                          MetricsCtx& metrics, std::vector<RunFile>& runs) {
  const std::size_t slots = block.size();
  if (slots == 0) return;
  LoserTree<BlockRows> tree(slots, schema, metrics, BlockRows{&block});
  std::vector<bool> live(slots, true);
  std::vector<Ovc> first(slots);
  for (std::size_t i = 0; i < slots; ++i) first[i] = encode_first(block[i], schema);
  tree.build(first);

  while (!tree.exhausted()) {
    TempFile file("run", cfg.spill_dir);
    RunWriter writer(file.path(), schema, block.width(), &metrics);
    while (tree.winner_code().is_current()) {
      const std::size_t slot = tree.winner_input();
      writer.append(block[slot], tree.winner_code());
      if (!in.peek()) {
        live[slot] = false;
        tree.replace_winner(Ovc::late_fence());
        continue;
      }
      const RowView incoming = in.take();
      const RowView last = block[slot];
      std::uint32_t offset = 0;
      while (offset < schema.arity && incoming[offset] == last[offset]) ++offset;
      ++metrics.row_comparisons;
      metrics.column_comparisons += offset < schema.arity ? offset + 1 : schema.arity;
      Ovc code;
      if (offset == schema.arity) {
        code = duplicate_code(schema);
      } else if (incoming[offset] > last[offset]) {
        code = make_code(offset, incoming[offset], schema);
      } else {
        code = encode_first(incoming, schema).with_sentinel(Sentinel::kNextRun);
      }
      block.assign(slot, incoming);
      tree.replace_winner(code);
    }
    const auto rows = writer.finish();
    runs.emplace_back(std::move(file), schema, block.width(), rows);
    if (tree.exhausted()) break;
    for (std::size_t i = 0; i < slots; ++i) {
      first[i] = live[i] ? encode_first(block[i], schema) : Ovc::late_fence();
    }
    tree.build(first);
  }
}

}  // namespace

std::vector<RunFile> generate_runs(RowStream& input, const KeySchema& schema, const SortConfig& cfg,
                                   MetricsCtx& metrics) {
  cfg.validate();
  schema.validate();
  InputCursor in(input);
  RowBlock block(input.width());
  block.reserve(cfg.memory_budget_rows);
  fill(in, block, cfg.memory_budget_rows);
  std::vector<RunFile> runs;
  if (cfg.run_gen == RunGenMode::kMiniRunMerge) {
    generate_minirun(in, std::move(block), schema, cfg, metrics, runs);
  } else {
    generate_replacement(in, std::move(block), schema, cfg, metrics, runs);
  }
  return runs;
}

StreamPtr merge_runs(std::vector<RunFile> runs, const KeySchema& schema, std::size_t width,
                     const SortConfig& cfg, MetricsCtx& metrics, MergeStats* stats) {
  cfg.validate();
  std::deque<RunFile> queue;
  for (auto& r : runs) {
    if (r.schema() != schema || r.width() != width) {
      throw Error(ErrorKind::kSchemaMismatch, "run does not match the sort schema");
    }
    queue.push_back(std::move(r));
  }
  MergeStats local;
  while (queue.size() > cfg.fan_in) {
    {
      std::vector<StreamPtr> inputs;
      for (std::size_t k = 0; k < cfg.fan_in; ++k) inputs.push_back(std::make_unique<RunReader>(queue[k]));
      MergingStream merge(std::move(inputs), schema, width, metrics, cfg.drop_duplicates);
      queue.push_back(spill_run(merge, cfg.spill_dir, metrics));
    }
    for (std::size_t k = 0; k < cfg.fan_in; ++k) queue.pop_front();
    ++local.intermediate_merges;
  }
  local.final_fan_in = queue.size();
  if (stats != nullptr) *stats = local;
  std::vector<StreamPtr> inputs;
  for (const auto& r : queue) inputs.push_back(std::make_unique<RunReader>(r));
  auto merge = std::make_unique<MergingStream>(std::move(inputs), schema, width, metrics, cfg.drop_duplicates);
  return std::make_unique<RunMergeStream>(std::move(queue), std::move(merge));
}

StreamPtr sort(RowStream& input, const KeySchema& schema, const SortConfig& cfg, MetricsCtx& metrics,
               MergeStats* stats) {
  cfg.validate();
  schema.validate();
  if (input.width() < schema.arity) throw Error(ErrorKind::kInvalidArgument, "row width below key arity");
  InputCursor in(input);
  RowBlock block(input.width());
  block.reserve(cfg.memory_budget_rows);
  fill(in, block, cfg.memory_budget_rows);
  if (!in.peek()) {
    if (stats != nullptr) *stats = MergeStats{0, block.empty() ? std::size_t{0} : std::size_t{1}};
    return std::make_unique<MiniRunStream>(std::move(block), schema, metrics, cfg.drop_duplicates);
  }
  std::vector<RunFile> runs;
  if (cfg.run_gen == RunGenMode::kMiniRunMerge) {
    generate_minirun(in, std::move(block), schema, cfg, metrics, runs);
  } else {
    generate_replacement(in, std::move(block), schema, cfg, metrics, runs);
  }
  return merge_runs(std::move(runs), schema, input.width(), cfg, metrics, stats);
}

StreamPtr sort_rows(std::vector<Row> rows, std::size_t width, const KeySchema& schema,
                    const SortConfig& cfg, MetricsCtx& metrics) {
  VectorRowStream in(std::move(rows), width);
  return sort(in, schema, cfg, metrics);
}

}  // namespace ovcq
