#include <algorithm>

#include "ovcq/operators.hpp"

namespace ovcq {

namespace {

bool emits_matches(JoinKind kind) { return kind == JoinKind::kInner || kind == JoinKind::kLeftOuter; }

// Output-code bookkeeping shared by the join operators: codes of left rows
// that produce no output accumulate until the next emitted row absorbs them.
class PendingMax {
 public:
  explicit PendingMax(const KeySchema& schema) : schema_(schema), acc_(duplicate_code(schema)) {}

  void drop(Ovc code) { acc_ = max_combine(acc_, code, schema_); }
  Ovc emit(Ovc code) {
    const Ovc out = max_combine(acc_, code, schema_);
    acc_ = duplicate_code(schema_);
    return out;
  }

 private:
  KeySchema schema_;
  Ovc acc_;
};

// Both cursors' join-prefix codes are kept relative to one common base, the
// winner of their latest comparison, so equality on the join columns is
// usually decided by codes alone.
class MergeJoinStream final : public CodedStream {
 public:
  MergeJoinStream(StreamPtr left, StreamPtr right, std::uint32_t j, JoinKind kind, MetricsCtx& metrics)
      : CodedStream(left->schema(),
                    emits_matches(kind) ? left->width() + right->width() - j : left->width()),
        left_(std::move(left)),
        right_(std::move(right)),
        j_(j),
        kind_(kind),
        metrics_(metrics),
        join_schema_{j, Direction::kAscending},
        join_dup_(duplicate_code(join_schema_)),
        pending_(schema()),
        out_(width()) {}

  bool next() override {
    if (!started_) {
      started_ = true;
      advance_right();
      advance_left();
    }
    while (true) {
      if (emitting_) {
        if (emit_index_ < group_.size()) {
          compose(group_[emit_index_]);
          code_ = emit_index_ == 0 ? pending_.emit(left_->code()) : duplicate_code(schema());
          ++emit_index_;
          return true;
        }
        emitting_ = false;
        consumed_left_ = true;
      }
      if (consumed_left_) {
        consumed_left_ = false;
        advance_left();
      }
      if (!l_has_) return false;

      const bool matched = match_current_left();
      switch (kind_) {
        case JoinKind::kInner:
          if (matched) {
            start_emitting();
            continue;
          }
          pending_.drop(left_->code());
          consumed_left_ = true;
          continue;
        case JoinKind::kLeftOuter:
          if (matched) {
            start_emitting();
            continue;
          }
          compose_unmatched();
          code_ = pending_.emit(left_->code());
          consumed_left_ = true;
          return true;
        case JoinKind::kLeftSemi:
        case JoinKind::kLeftAnti:
          consumed_left_ = true;
          if (matched == (kind_ == JoinKind::kLeftSemi)) {
            compose_left_only();
            code_ = pending_.emit(left_->code());
            return true;
          }
          pending_.drop(left_->code());
          continue;
      }
    }
  }

  RowView row() const override { return out_; }
  Ovc code() const override { return code_; }

 private:
  void advance_left() {
    l_has_ = left_->next();
    if (!l_has_) return;
    lj_ = truncate_to_prefix(left_->code(), j_, left_->schema());
    group_valid_ = group_valid_ && lj_ == join_dup_;
  }

  void start_emitting() {
    emitting_ = true;
    emit_index_ = 0;
  }

  void advance_right() {
    r_has_ = right_->next();
    if (r_has_) rj_ = truncate_to_prefix(right_->code(), j_, right_->schema());
  }

  // Positions the right cursor past every row below the current left row's
  // join key and buffers the equal ones.
  bool match_current_left() {
    if (group_valid_) return true;
    while (r_has_) {
      const auto res = compare_form_codeword(left_->row(), lj_, right_->row(), rj_, join_schema_, Side::kA, metrics_);
      if (res.winner == Side::kB) {
        lj_ = res.loser_code;
        advance_right();
        continue;
      }
      rj_ = res.loser_code;
      if (rj_ != join_dup_) return false;
      group_.clear();
      do {
        const RowView r = right_->row();
        group_.emplace_back(r.begin(), r.end());
        advance_right();
      } while (r_has_ && rj_ == join_dup_);
      group_valid_ = true;
      return true;
    }
    return false;
  }

  void compose(const Row& right) {
    const RowView l = left_->row();
    std::copy(l.begin(), l.end(), out_.begin());
    std::copy(right.begin() + j_, right.end(), out_.begin() + l.size());
  }
  void compose_unmatched() {
    const RowView l = left_->row();
    std::copy(l.begin(), l.end(), out_.begin());
    std::fill(out_.begin() + l.size(), out_.end(), kNull);
  }
  void compose_left_only() {
    const RowView l = left_->row();
    std::copy(l.begin(), l.end(), out_.begin());
  }

  StreamPtr left_;
  StreamPtr right_;
  std::uint32_t j_;
  JoinKind kind_;
  MetricsCtx& metrics_;
  KeySchema join_schema_;
  Ovc join_dup_;
  PendingMax pending_;

  bool started_ = false;
  bool l_has_ = false;
  bool r_has_ = false;
  Ovc lj_;
  Ovc rj_;
  std::vector<Row> group_;
  bool group_valid_ = false;
  bool emitting_ = false;
  std::size_t emit_index_ = 0;
  bool consumed_left_ = false;

  Row out_;
  Ovc code_;
};

class LookupJoinStream final : public CodedStream {
 public:
  LookupJoinStream(StreamPtr outer, std::shared_ptr<LookupSource> inner, JoinKind kind, KeySchema out_schema,
                   std::size_t out_width, bool composite)
      : CodedStream(out_schema, out_width),
        outer_(std::move(outer)),
        inner_(std::move(inner)),
        kind_(kind),
        composite_(composite),
        pending_(outer_->schema()),
        out_(out_width) {
    if (composite_) inner_schema_ = *inner_->inner_schema();
  }

  bool next() override {
    while (true) {
      if (index_ < matches_.size()) {
        compose(matches_[index_].row);
        code_ = index_ == 0 ? first_code_ : later_code(matches_[index_].code);
        ++index_;
        return true;
      }
      if (!outer_->next()) return false;
      matches_.clear();
      index_ = 0;
      inner_->lookup(outer_->row(), matches_);
      const bool matched = !matches_.empty();
      const Ovc own = outer_->code();
      switch (kind_) {
        case JoinKind::kInner:
          if (matched) {
            first_code_ = widen(pending_.emit(own));
          } else {
            pending_.drop(own);
          }
          continue;
        case JoinKind::kLeftOuter:
          first_code_ = widen(pending_.emit(own));
          if (matched) continue;
          compose_unmatched();
          code_ = first_code_;
          return true;
        case JoinKind::kLeftSemi:
        case JoinKind::kLeftAnti: {
          const bool keep = matched == (kind_ == JoinKind::kLeftSemi);
          matches_.clear();
          if (!keep) {
            pending_.drop(own);
            continue;
          }
          const RowView o = outer_->row();
          std::copy(o.begin(), o.end(), out_.begin());
          code_ = pending_.emit(own);
          return true;
        }
      }
    }
  }

  RowView row() const override { return out_; }
  Ovc code() const override { return code_; }

 private:
  // Re-expresses an outer-key code at the output arity.
  Ovc widen(Ovc code) const {
    if (!composite_) return code;
    const KeySchema& os = outer_->schema();
    const std::uint32_t offset = offset_of(code, os);
    if (offset >= os.arity) {
      throw Error(ErrorKind::kInvalidArgument, "composite lookup join requires distinct outer keys");
    }
    return make_code(offset, value_of(code, os), schema());
  }

  Ovc later_code(Ovc inner_code) const {
    if (!composite_) return duplicate_code(schema());
    return shift_code(inner_code, outer_->schema().arity, inner_schema_, schema());
  }

  void compose(const Row& inner) {
    const RowView o = outer_->row();
    if (!composite_) {
      std::copy(o.begin(), o.end(), out_.begin());
      std::copy(inner.begin(), inner.end(), out_.begin() + o.size());
      return;
    }
    const std::size_t ko = outer_->schema().arity;
    const std::size_t ki = inner_schema_.arity;
    auto it = std::copy_n(o.begin(), ko, out_.begin());
    it = std::copy_n(inner.begin(), ki, it);
    it = std::copy(o.begin() + ko, o.end(), it);
    std::copy(inner.begin() + ki, inner.end(), it);
  }

  void compose_unmatched() {
    const RowView o = outer_->row();
    if (!composite_) {
      std::copy(o.begin(), o.end(), out_.begin());
      std::fill(out_.begin() + o.size(), out_.end(), kNull);
      return;
    }
    const std::size_t ko = outer_->schema().arity;
    const std::size_t ki = inner_schema_.arity;
    std::fill(out_.begin(), out_.end(), kNull);
    std::copy_n(o.begin(), ko, out_.begin());
    std::copy(o.begin() + ko, o.end(), out_.begin() + ko + ki);
  }

  StreamPtr outer_;
  std::shared_ptr<LookupSource> inner_;
  JoinKind kind_;
  bool composite_;
  KeySchema inner_schema_;
  PendingMax pending_;
  std::vector<CodedRow> matches_;
  std::size_t index_ = 0;
  Ovc first_code_;
  Row out_;
  Ovc code_;
};

}  // namespace

StreamPtr merge_join(StreamPtr left, StreamPtr right, std::uint32_t j, JoinKind kind, MetricsCtx& metrics,
                     CheckMode mode) {
  if (left->schema().direction != Direction::kAscending || right->schema().direction != Direction::kAscending) {
    throw Error(ErrorKind::kInvalidArgument, "merge join requires ascending codes");
  }
  if (j < 1 || j > left->schema().arity || j > right->schema().arity) {
    throw Error(ErrorKind::kInvalidArgument, "join prefix must be in [1, min(arity)]");
  }
  if (mode == CheckMode::kChecked) {
    left = order_checked(std::move(left));
    right = order_checked(std::move(right));
  }
  return std::make_unique<MergeJoinStream>(std::move(left), std::move(right), j, kind, metrics);
}

StreamPtr intersect_distinct(StreamPtr left, StreamPtr right, MetricsCtx& metrics) {
  if (left->schema() != right->schema()) throw Error(ErrorKind::kSchemaMismatch, "set operands differ in key");
  const auto j = left->schema().arity;
  return merge_join(dedup(std::move(left), metrics), dedup(std::move(right), metrics), j, JoinKind::kLeftSemi,
                    metrics);
}

StreamPtr except_distinct(StreamPtr left, StreamPtr right, MetricsCtx& metrics) {
  if (left->schema() != right->schema()) throw Error(ErrorKind::kSchemaMismatch, "set operands differ in key");
  const auto j = left->schema().arity;
  return merge_join(dedup(std::move(left), metrics), dedup(std::move(right), metrics), j, JoinKind::kLeftAnti,
                    metrics);
}

IndexLookup::IndexLookup(std::vector<Row> rows, std::size_t width, std::uint32_t join_cols, std::uint32_t inner_key,
                         bool coded)
    : width_(width), join_cols_(join_cols), inner_key_(inner_key), coded_(coded) {
  if (join_cols < 1 || inner_key < join_cols || inner_key > width) {
    throw Error(ErrorKind::kInvalidArgument, "index lookup needs 1 <= join columns <= inner key <= width");
  }
  for (const auto& r : rows) {
    if (r.size() != width) throw Error(ErrorKind::kInvalidArgument, "inner row width mismatch");
  }
  const auto key_less = [k = inner_key](const Row& a, const Row& b) {
    return std::lexicographical_compare(a.begin(), a.begin() + k, b.begin(), b.begin() + k);
  };
  std::stable_sort(rows.begin(), rows.end(), key_less);
  const KeySchema schema{inner_key, Direction::kAscending};
  rows_.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Ovc code;
    if (coded_) code = i == 0 ? encode_first(rows[i], schema) : derive_code(rows_.back().row, rows[i], schema);
    rows_.push_back(CodedRow{std::move(rows[i]), code});
  }
}

std::optional<KeySchema> IndexLookup::inner_schema() const {
  if (!coded_) return std::nullopt;
  return KeySchema{inner_key_, Direction::kAscending};
}

void IndexLookup::lookup(RowView outer, std::vector<CodedRow>& matches) {
  const std::size_t j = join_cols_;
  const auto lo = std::lower_bound(rows_.begin(), rows_.end(), outer, [j](const CodedRow& r, RowView key) {
    return std::lexicographical_compare(r.row.begin(), r.row.begin() + j, key.begin(), key.begin() + j);
  });
  const auto hi = std::upper_bound(lo, rows_.end(), outer, [j](RowView key, const CodedRow& r) {
    return std::lexicographical_compare(key.begin(), key.begin() + j, r.row.begin(), r.row.begin() + j);
  });
  matches.insert(matches.end(), lo, hi);
}

PredicateLookup::PredicateLookup(std::vector<Row> rows, std::size_t width, JoinPredicate pred)
    : rows_(std::move(rows)), width_(width), pred_(std::move(pred)) {
  for (const auto& r : rows_) {
    if (r.size() != width_) throw Error(ErrorKind::kInvalidArgument, "inner row width mismatch");
  }
}

void PredicateLookup::lookup(RowView outer, std::vector<CodedRow>& matches) {
  for (const auto& r : rows_) {
    if (pred_(outer, r)) matches.push_back(CodedRow{r, Ovc()});
  }
}

StreamPtr lookup_join(StreamPtr outer, std::shared_ptr<LookupSource> inner, JoinKind kind, MetricsCtx& /*metrics*/) {
  const KeySchema os = outer->schema();
  const bool composite = emits_matches(kind) && inner->inner_schema().has_value();
  KeySchema out_schema = os;
  std::size_t out_width = outer->width();
  if (emits_matches(kind)) out_width += inner->width();
  if (composite) {
    if (os.direction != Direction::kAscending) {
      throw Error(ErrorKind::kInvalidArgument, "composite lookup join requires ascending codes");
    }
    out_schema.arity = os.arity + inner->inner_schema()->arity;
  }
  return std::make_unique<LookupJoinStream>(std::move(outer), std::move(inner), kind, out_schema, out_width,
                                            composite);
}

}  // namespace ovcq
