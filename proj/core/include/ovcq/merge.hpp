#pragma once

#include <vector>

#include "ovcq/loser_tree.hpp"
#include "ovcq/stream.hpp"

namespace ovcq {

// F-way merge of coded streams through a LoserTree. Output codes are the
// codes the winners carried to the root, i.e. relative to the previously
// emitted row. Ties go to the lower input index, so the merge is stable.
class MergingStream final : public CodedStream {
 public:
  struct Rows {
    const std::vector<StreamPtr>* inputs;
    RowView operator()(std::size_t i) const { return (*inputs)[i]->row(); }
  };

  // Every input must match (schema, width). With drop_duplicates, rows whose
  // output code is the duplicate code are suppressed (in-sort duplicate
  // removal).
  MergingStream(std::vector<StreamPtr> inputs, KeySchema schema, std::size_t width,
                MetricsCtx& metrics, bool drop_duplicates = false);

  bool next() override;
  RowView row() const override { return inputs_[tree_.winner_input()]->row(); }
  Ovc code() const override { return tree_.winner_code(); }

  const LoserTree<Rows>& tree() const { return tree_; }

 private:
  void advance_winner();

  std::vector<StreamPtr> inputs_;
  LoserTree<Rows> tree_;
  bool drop_duplicates_;
  bool started_ = false;
};

}  // namespace ovcq
