#include <algorithm>

#include "ovcq/operators.hpp"

namespace ovcq {

class Segmenter::SegmentStream final : public CodedStream {
 public:
  explicit SegmentStream(Segmenter& owner)
      : CodedStream(KeySchema{owner.seg_len_, owner.in_->schema().direction}, owner.in_->width()),
        owner_(owner) {}

  bool next() override {
    if (ended_) return false;
    if (!started_) {
      started_ = true;
      owner_.primed_ = false;
      return true;
    }
    if (!owner_.in_->next()) {
      owner_.done_ = true;
      ended_ = true;
      return false;
    }
    if (owner_.boundary_(owner_.in_->code())) {
      owner_.primed_ = true;
      ended_ = true;
      return false;
    }
    return true;
  }
  RowView row() const override { return owner_.in_->row(); }
  Ovc code() const override { return truncate_to_prefix(owner_.in_->code(), seg_len(), owner_.in_->schema()); }

  bool ended() const { return ended_; }

 private:
  std::uint32_t seg_len() const { return schema().arity; }

  Segmenter& owner_;
  bool started_ = false;
  bool ended_ = false;
};

Segmenter::Segmenter(StreamPtr in, std::uint32_t seg_len)
    : in_(std::move(in)), seg_len_(seg_len), boundary_(seg_len, in_->schema()) {}

Segmenter::~Segmenter() = default;

bool Segmenter::next_segment() {
  if (current_) {
    while (current_->next()) {
    }
  }
  current_.reset();
  if (!primed_) {
    if (done_ || !in_->next()) {
      done_ = true;
      return false;
    }
    primed_ = true;
  }
  current_ = std::make_unique<SegmentStream>(*this);
  return true;
}

CodedStream& Segmenter::segment() {
  if (!current_) throw Error(ErrorKind::kInvalidArgument, "no current segment");
  return *current_;
}

namespace {

class SegmentedSortStream final : public CodedStream {
 public:
  SegmentedSortStream(StreamPtr in, std::uint32_t seg_len, std::vector<std::uint32_t> suffix,
                      const SortConfig& cfg, MetricsCtx& metrics)
      : CodedStream(KeySchema{seg_len + static_cast<std::uint32_t>(suffix.size()), in->schema().direction},
                    in->width()),
        segmenter_(std::move(in), seg_len),
        suffix_(std::move(suffix)),
        cfg_(cfg),
        metrics_(metrics),
        sort_schema_{static_cast<std::uint32_t>(suffix_.size()), schema().direction},
        out_(width()) {
    // Sort rows are laid out suffix, prefix, rest; output rows prefix, suffix, rest.
    std::vector<bool> used(width(), false);
    for (auto c : suffix_) used[c] = true;
    layout_ = suffix_;
    for (std::uint32_t c = 0; c < seg_len; ++c) layout_.push_back(c);
    for (std::uint32_t c = seg_len; c < width(); ++c) {
      if (!used[c]) layout_.push_back(c);
    }
  }

  bool next() override {
    while (true) {
      if (sorted_ && sorted_->next()) {
        const RowView r = sorted_->row();
        const std::size_t s = segmenter_.seg_len();
        const std::size_t m = suffix_.size();
        std::copy_n(r.begin() + m, s, out_.begin());
        std::copy_n(r.begin(), m, out_.begin() + s);
        std::copy(r.begin() + m + s, r.end(), out_.begin() + s + m);
        if (first_) {
          first_ = false;
          code_ = boundary_code_;
        } else {
          code_ = shift_code(sorted_->code(), segmenter_.seg_len(), sort_schema_, schema());
        }
        return true;
      }
      sorted_.reset();
      if (!segmenter_.next_segment()) return false;
      CodedStream& seg = segmenter_.segment();
      std::vector<Row> rows;
      Row buf(width());
      while (seg.next()) {
        const RowView r = seg.row();
        if (rows.empty()) {
          const Ovc c = seg.code();
          boundary_code_ = make_code(offset_of(c, seg.schema()), value_of(c, seg.schema()), schema());
        }
        for (std::size_t i = 0; i < layout_.size(); ++i) buf[i] = r[layout_[i]];
        rows.push_back(buf);
      }
      first_ = true;
      sorted_ = sort_rows(std::move(rows), width(), sort_schema_, cfg_, metrics_);
    }
  }
  RowView row() const override { return out_; }
  Ovc code() const override { return code_; }

 private:
  Segmenter segmenter_;
  std::vector<std::uint32_t> suffix_;
  SortConfig cfg_;
  MetricsCtx& metrics_;
  KeySchema sort_schema_;
  std::vector<std::uint32_t> layout_;
  StreamPtr sorted_;
  Row out_;
  Ovc code_;
  Ovc boundary_code_;
  bool first_ = false;
};

}  // namespace

StreamPtr segmented_sort(StreamPtr in, std::uint32_t seg_len, std::vector<std::uint32_t> suffix,
                         const SortConfig& cfg, MetricsCtx& metrics) {
  if (seg_len < 1 || seg_len > in->schema().arity) {
    throw Error(ErrorKind::kInvalidArgument, "segment length must be in [1, arity]");
  }
  if (suffix.empty()) throw Error(ErrorKind::kInvalidArgument, "segmented sort needs at least one suffix column");
  std::vector<bool> seen(in->width(), false);
  for (auto c : suffix) {
    if (c < seg_len || c >= in->width() || seen[c]) {
      throw Error(ErrorKind::kInvalidArgument, "suffix columns must be distinct columns past the segment prefix");
    }
    seen[c] = true;
  }
  return std::make_unique<SegmentedSortStream>(std::move(in), seg_len, std::move(suffix), cfg, metrics);
}

}  // namespace ovcq
