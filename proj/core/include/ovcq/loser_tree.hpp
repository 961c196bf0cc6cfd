#pragma once

// Tree-of-losers priority queue with offset-value codes.
//
// The tree is embedded in an array of capacity P = bit_ceil(F): slot 0 holds
// the overall winner, slots 1..P-1 hold the loser of each match. Leaf i (input
// i) sits virtually at P + i. Nodes carry only (code, input); rows stay with
// the inputs and are fetched through RowAccess when codes tie.
//
// Invariant: along the current winner's leaf-to-root path every stored code is
// relative to the winner's key, so the winner's successor (coded relative to
// the winner by its own input) can be compared against the path directly.

#include <bit>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ovcq/metrics.hpp"
#include "ovcq/ovc.hpp"

namespace ovcq {

template <class RowAccess>
class LoserTree {
 public:
  struct Node {
    Ovc code;
    std::uint32_t input;
  };

  LoserTree(std::size_t fan_in, KeySchema schema, MetricsCtx& metrics, RowAccess rows)
      : fan_in_(fan_in),
        capacity_(std::bit_ceil(fan_in == 0 ? std::size_t{1} : fan_in)),
        schema_(schema),
        dup_(duplicate_code(schema)),
        metrics_(&metrics),
        rows_(std::move(rows)) {
    schema_.validate();
    if (schema_.direction != Direction::kAscending) {
      throw Error(ErrorKind::kInvalidArgument, "loser tree requires ascending codes");
    }
  }

  // Primes the tree. first_codes[i] is input i's first code, relative to the
  // same (empty) base for all inputs, or a late fence for an empty input.
  // Unfilled slots start as early fences and are pushed out by the inserts.
  void build(std::span<const Ovc> first_codes) {
    nodes_.assign(capacity_, Node{Ovc::early_fence(), static_cast<std::uint32_t>(capacity_)});
    for (std::size_t i = 0; i < capacity_; ++i) {
      const Ovc code = i < fan_in_ && i < first_codes.size() ? first_codes[i] : Ovc::late_fence();
      pass(static_cast<std::uint32_t>(i), code);
    }
  }

  bool exhausted() const { return nodes_[0].code.sentinel() == Sentinel::kLateFence; }
  Ovc winner_code() const { return nodes_[0].code; }
  std::size_t winner_input() const { return nodes_[0].input; }

  // Replaces the winner by its successor from the same input (a late fence
  // once that input is exhausted) with one leaf-to-root pass. A successor
  // that duplicates the winner beats everything on the path and is promoted
  // directly.
  void replace_winner(Ovc successor) {
    if (successor == dup_) {
      nodes_[0].code = successor;
      return;
    }
    pass(nodes_[0].input, successor);
  }

  std::size_t fan_in() const { return fan_in_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t height() const { return static_cast<std::size_t>(std::countr_zero(capacity_)); }
  const Node& node(std::size_t slot) const { return nodes_[slot]; }
  RowAccess& rows() { return rows_; }

 private:
  void pass(std::uint32_t input, Ovc code) {
    Node candidate{code, input};
    for (std::size_t slot = (capacity_ + input) >> 1; slot > 0; slot >>= 1) {
      play(candidate, nodes_[slot]);
    }
    nodes_[0] = candidate;
  }

  // Leaves the loser in `stored` and the winner in `candidate`.
  void play(Node& candidate, Node& stored) {
    if (candidate.code.is_current() && stored.code.is_current()) {
      const Side tie = candidate.input < stored.input ? Side::kA : Side::kB;
      const CompareResult r = compare_form_codeword(rows_(candidate.input), candidate.code,
                                                    rows_(stored.input), stored.code, schema_, tie,
                                                    *metrics_);
      if (r.winner == Side::kA) {
        stored.code = r.loser_code;
      } else {
        candidate.code = r.loser_code;
        std::swap(candidate, stored);
      }
      return;
    }
    // Fences and next-run entries order by sentinel bits (and raw code) alone.
    const bool stored_wins = stored.code < candidate.code ||
                             (stored.code == candidate.code && stored.input < candidate.input);
    if (stored_wins) std::swap(candidate, stored);
  }

  std::size_t fan_in_;
  std::size_t capacity_;
  KeySchema schema_;
  Ovc dup_;
  MetricsCtx* metrics_;
  RowAccess rows_;
  std::vector<Node> nodes_;
};

}  // namespace ovcq
