#include "ovcq/merge.hpp"

namespace ovcq {

MergingStream::MergingStream(std::vector<StreamPtr> inputs, KeySchema schema, std::size_t width,
                             MetricsCtx& metrics, bool drop_duplicates)
    : CodedStream(schema, width),
      inputs_(std::move(inputs)),
      tree_(inputs_.size(), schema, metrics, Rows{&inputs_}),
      drop_duplicates_(drop_duplicates) {
  for (const auto& in : inputs_) {
    if (!in || in->schema() != schema || in->width() != width) {
      throw Error(ErrorKind::kSchemaMismatch, "merge inputs must share key schema and row width");
    }
  }
}

void MergingStream::advance_winner() {
  CodedStream& in = *inputs_[tree_.winner_input()];
  tree_.replace_winner(in.next() ? in.code() : Ovc::late_fence());
}

bool MergingStream::next() {
  if (!started_) {
    started_ = true;
    std::vector<Ovc> first(inputs_.size());
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
      // All first rows are coded against the same empty base.
      first[i] = inputs_[i]->next() ? encode_first(inputs_[i]->row(), schema()) : Ovc::late_fence();
    }
    tree_.build(first);
  } else if (!tree_.exhausted()) {
    advance_winner();
  }
  if (drop_duplicates_) {
    const Ovc dup = duplicate_code(schema());
    while (!tree_.exhausted() && tree_.winner_code() == dup) advance_winner();
  }
  return !tree_.exhausted();
}

}  // namespace ovcq
