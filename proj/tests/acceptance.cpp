// Acceptance runner: one PASS/FAIL line per criterion. Exits nonzero when any
// criterion fails. Optional arguments select criteria by number.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ovcq/hash_ops.hpp"
#include "ovcq/operators.hpp"
#include "ovcq/oracle.hpp"
#include "ovcq/run_file.hpp"
#include "ovcq/scan.hpp"
#include "ovcq_tools/experiments.hpp"
#include "support/reference.hpp"

namespace ovcq {
namespace {

namespace fs = std::filesystem;
using testing::rows_of;
using testing::sorted_copy;
using testing::with_codes;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("ovcq_acceptance_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

Row key_of(RowView r, std::uint32_t k) { return Row(r.begin(), r.begin() + k); }

// 1. Worked examples

Outcome worked_examples() {
  Outcome o;
  int matched = 0;
  const auto& rows = testing::sample_rows();
  for (auto dir : {Direction::kAscending, Direction::kDescending}) {
    const KeySchema s{4, dir};
    const auto& expected = dir == Direction::kAscending ? testing::sample_ascending() : testing::sample_descending();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Ovc c = i == 0 ? encode_first(rows[0], s) : derive_code(rows[i - 1], rows[i], s);
      if (testing::render(c, s) == expected[i]) ++matched;
    }
  }

  struct Case {
    Row a, b;
    int code_a, code_b;
    Side winner;
    int loser_code;
  };
  const KeySchema s{4, Direction::kAscending};
  const Row base{3, 4, 2, 5};
  const std::vector<Case> cases = {
      {{3, 5, 8, 2}, {3, 4, 6, 1}, 305, 206, Side::kB, 305},
      {{3, 4, 3, 8}, {3, 4, 9, 1}, 203, 209, Side::kA, 209},
      {{3, 7, 4, 7}, {3, 7, 4, 9}, 307, 307, Side::kA, 109},
  };
  int cases_ok = 0;
  for (const auto& c : cases) {
    const Ovc ca = derive_code(base, c.a, s);
    const Ovc cb = derive_code(base, c.b, s);
    MetricsCtx m;
    const auto r = compare_form_codeword(c.a, ca, c.b, cb, s, Side::kA, m, CheckMode::kChecked);
    if (testing::render(ca, s) == c.code_a && testing::render(cb, s) == c.code_b && r.winner == c.winner &&
        testing::render(r.loser_code, s) == c.loser_code) {
      ++cases_ok;
    }
  }
  o.pass = matched == 14 && cases_ok == 3;
  o.detail = std::to_string(matched) + "/14 sample-row codes, " + std::to_string(cases_ok) + "/3 compare cases";
  return o;
}

// 2. Chain rule over random triples

Outcome chain_rule_suite() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::uint32_t> arity_pick(1, 8);
  std::uniform_int_distribution<Column> value(0, 3);
  std::uint64_t combine_bad = 0, equal_codes_bad = 0, checks = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    const std::uint32_t k = arity_pick(rng);
    std::vector<Row> t(3, Row(k));
    for (auto& r : t) {
      for (auto& v : r) v = value(rng);
    }
    std::sort(t.begin(), t.end());
    for (auto dir : {Direction::kAscending, Direction::kDescending}) {
      const KeySchema s{k, dir};
      const Ovc first = encode_first(t[0], s);
      const Ovc ab = derive_code(t[0], t[1], s);
      const Ovc bc = derive_code(t[1], t[2], s);
      const Ovc ac = max_combine(ab, bc, s);
      // The oracle recomputes every code column by column.
      const bool chain_ok = recompute_codes({{t[0], first}, {t[1], ab}, {t[2], bc}}, s).empty();
      const bool ac_ok = recompute_codes({{t[0], first}, {t[2], ac}}, s).empty();
      if (!chain_ok || !ac_ok) ++combine_bad;
      if (ab == bc && !(t[0] == t[1] && t[1] == t[2])) ++equal_codes_bad;
      ++checks;
    }
  }
  Outcome o;
  o.pass = combine_bad == 0 && equal_codes_bad == 0;
  o.detail = std::to_string(checks) + " triples x directions, " + std::to_string(combine_bad) +
             " combine counterexamples, " + std::to_string(equal_codes_bad) + " equal-code counterexamples";
  return o;
}

// 3 and 7. Oracle equivalence over randomized trials, with zero-comparison
// counters gathered on the same trials.

// Counts row() accesses so that code-only consumers can prove they never
// looked at column values.
class CountingStream final : public CodedStream {
 public:
  explicit CountingStream(StreamPtr in, std::uint64_t& reads)
      : CodedStream(in->schema(), in->width()), in_(std::move(in)), reads_(&reads) {}
  bool next() override { return in_->next(); }
  RowView row() const override {
    ++*reads_;
    return in_->row();
  }
  Ovc code() const override { return in_->code(); }

 private:
  StreamPtr in_;
  std::uint64_t* reads_;
};

struct OpTally {
  std::uint64_t trials = 0;
  std::uint64_t rows_out = 0;
  std::uint64_t violations = 0;
  std::uint64_t mismatches = 0;
  std::string first_failure;
};

struct ZeroTally {
  std::uint64_t dedup = 0;
  std::uint64_t group = 0;
  std::uint64_t segment_row_reads = 0;
  std::uint64_t filter = 0;
};

class Trials {
 public:
  Trials() = default;

  void run(int trials) {
    for (int t = 0; t < trials; ++t) run_trial(t);
    trials_ += trials;
  }

  Outcome equivalence() const {
    Outcome o;
    std::ostringstream d;
    std::uint64_t bad = 0;
    for (const auto& [name, tally] : ops_) {
      bad += tally.violations + tally.mismatches;
      if (tally.violations + tally.mismatches > 0) {
        d << name << ": " << tally.violations << " violations, " << tally.mismatches << " mismatches ("
          << tally.first_failure << "); ";
      }
    }
    o.pass = bad == 0 && ops_.size() == 18 && trials_ == 200;
    d << ops_.size() << " operator checks x " << trials_ << " trials, " << bad << " failures";
    o.detail = d.str();
    return o;
  }

  Outcome zero_comparisons() const {
    Outcome o;
    o.pass = zero_.dedup == 0 && zero_.group == 0 && zero_.segment_row_reads == 0 && zero_.filter == 0 &&
             !ops_.empty();
    o.detail = "column comparisons: dedup " + std::to_string(zero_.dedup) + ", group boundaries " +
               std::to_string(zero_.group) + ", filter " + std::to_string(zero_.filter) +
               "; segment boundary row reads " + std::to_string(zero_.segment_row_reads);
    return o;
  }

 private:
  struct Input {
    std::uint32_t k;
    std::size_t width;
    KeySchema schema;
    std::vector<Row> rows;  // sorted on the key
  };

  void record(const std::string& op, const std::vector<CodedRow>& out, const KeySchema& schema,
              const std::vector<Row>& expected, int trial) {
    auto& tally = ops_[op];
    ++tally.trials;
    tally.rows_out += out.size();
    const auto vs = recompute_codes(out, schema);
    const bool same = sorted_copy(rows_of(out)) == sorted_copy(expected);
    tally.violations += vs.size();
    if (!same) ++tally.mismatches;
    if ((!vs.empty() || !same) && tally.first_failure.empty()) {
      tally.first_failure = "trial " + std::to_string(trial) + (vs.empty() ? "" : ": " + vs.front().describe());
    }
  }

  StreamPtr coded(const std::vector<Row>& rows, const KeySchema& schema, std::size_t width) {
    return std::make_unique<VectorCodedStream>(with_codes(rows, schema), schema, width);
  }

  // Rows for the other side of a join: the first `j` columns usually come
  // from a row of `left`, the remaining key columns and one payload column are
  // random.
  std::vector<Row> partner_rows(const std::vector<Row>& left, std::uint32_t j, std::uint32_t k, bool payload,
                                std::size_t n) {
    std::uniform_int_distribution<Column> small(0, 5);
    std::vector<Row> out;
    for (std::size_t i = 0; i < n; ++i) {
      Row r(k + (payload ? 1 : 0));
      if (!left.empty() && rng_() % 4 != 0) {
        const Row& l = left[rng_() % left.size()];
        std::copy(l.begin(), l.begin() + j, r.begin());
      } else {
        for (std::uint32_t c = 0; c < j; ++c) r[c] = small(rng_);
      }
      for (std::uint32_t c = j; c < k; ++c) r[c] = small(rng_);
      if (payload) r[k] = static_cast<Column>(rng_() % 1000);
      out.push_back(std::move(r));
    }
    testing::sort_by_key(out, k);
    return out;
  }

  void run_trial(int t) {
    static constexpr double kRatios[] = {1, 4, 64};
    Input in;
    in.k = 1 + static_cast<std::uint32_t>(t % 6);
    const std::uint32_t payload_cols = 1 + static_cast<std::uint32_t>(t % 2);
    in.width = in.k + payload_cols;
    in.schema = KeySchema{in.k, Direction::kAscending};
    GenSpec spec;
    // Sizes spread over [0, 10^4], with small inputs well represented.
    spec.rows = t % 4 == 0 ? rng_() % 50 : rng_() % 10001;
    spec.key_cols = in.k;
    spec.ratio = kRatios[(t / 6) % 3];
    spec.payload_cols = payload_cols;
    spec.seed = rng_();
    spec.sorted = true;
    in.rows = generate(spec);

    check_filter(in, t);
    check_project(in, t);
    check_segments(in, t);
    check_dedup(in, t);
    check_group(in, t);
    check_merge_join(in, t);
    check_set_ops(in, t);
    check_lookup_join(in, t);
    check_exchange(in, t);
    check_scan(in, t);
    check_sort(in, t);
  }

  void check_filter(const Input& in, int t) {
    const std::uint32_t k = in.k;
    auto keep = [k](RowView r) { return (r[0] + r[k]) % 3 != 0; };
    std::vector<Row> expected;
    std::copy_if(in.rows.begin(), in.rows.end(), std::back_inserter(expected), keep);
    MetricsCtx m;
    const auto out = materialize(*filter(coded(in.rows, in.schema, in.width), keep, m));
    zero_.filter += m.column_comparisons;
    record("filter", out, in.schema, expected, t);
  }

  void check_project(const Input& in, int t) {
    const std::uint32_t p = 1 + static_cast<std::uint32_t>(rng_() % in.k);
    std::vector<std::uint32_t> keep;
    for (std::uint32_t c = 0; c < p; ++c) keep.push_back(c);
    if (t % 2 == 0) keep.push_back(in.k);
    std::vector<Row> expected;
    for (const auto& r : in.rows) {
      Row o;
      for (auto c : keep) o.push_back(r[c]);
      expected.push_back(std::move(o));
    }
    MetricsCtx m;
    const auto out = materialize(*project(coded(in.rows, in.schema, in.width), keep, m));
    record("project", out, KeySchema{p, Direction::kAscending}, expected, t);
  }

  void check_segments(const Input& in, int t) {
    const std::uint32_t p = 1 + static_cast<std::uint32_t>(rng_() % in.k);

    // Boundaries alone: only codes are read.
    std::vector<std::size_t> sizes;
    {
      std::uint64_t reads = 0;
      Segmenter seg(std::make_unique<CountingStream>(coded(in.rows, in.schema, in.width), reads), p);
      while (seg.next_segment()) {
        std::size_t n = 0;
        while (seg.segment().next()) {
          (void)seg.segment().code();
          ++n;
        }
        sizes.push_back(n);
      }
      zero_.segment_row_reads += reads;
    }
    std::vector<std::size_t> expected_sizes;
    for (std::size_t i = 0; i < in.rows.size(); ++i) {
      if (i == 0 || key_of(in.rows[i], p) != key_of(in.rows[i - 1], p)) expected_sizes.push_back(0);
      ++expected_sizes.back();
    }
    auto& seg_tally = ops_["segment"];
    ++seg_tally.trials;
    if (sizes != expected_sizes) {
      ++seg_tally.mismatches;
      if (seg_tally.first_failure.empty()) seg_tally.first_failure = "trial " + std::to_string(t);
    }

    // Re-sort each segment on a payload column.
    const std::uint32_t c = in.k;
    std::vector<Row> expected;
    for (const auto& r : in.rows) {
      Row o(r.begin(), r.begin() + p);
      o.push_back(r[c]);
      for (std::size_t i = p; i < in.width; ++i) {
        if (i != c) o.push_back(r[i]);
      }
      expected.push_back(std::move(o));
    }
    SortConfig cfg;
    cfg.memory_budget_rows = 32 + rng_() % 2000;
    MetricsCtx m;
    const auto out = materialize(*segmented_sort(coded(in.rows, in.schema, in.width), p, {c}, cfg, m));
    record("segmented_sort", out, KeySchema{p + 1, Direction::kAscending}, expected, t);
  }

  void check_dedup(const Input& in, int t) {
    std::vector<Row> expected;
    for (const auto& r : in.rows) {
      if (expected.empty() || key_of(expected.back(), in.k) != key_of(r, in.k)) expected.push_back(r);
    }
    MetricsCtx m;
    const auto out = materialize(*dedup(coded(in.rows, in.schema, in.width), m));
    zero_.dedup += m.column_comparisons;
    // Dedup keeps the first row of each key, so the sequence is exact.
    record("dedup", out, in.schema, expected, t);
    if (rows_of(out) != expected) ++ops_["dedup"].mismatches;
  }

  void check_group(const Input& in, int t) {
    const std::uint32_t g = 1 + static_cast<std::uint32_t>(rng_() % in.k);
    const std::uint32_t v = in.k;
    const std::vector<Aggregate> aggs = {
        {AggKind::kCount}, {AggKind::kSum, v}, {AggKind::kMin, v}, {AggKind::kMax, v}};
    const auto expected = testing::ref_group_by(in.rows, g, {{0, 0}, {1, v}, {2, v}, {3, v}});
    MetricsCtx m;
    const auto out = materialize(*group_aggregate(coded(in.rows, in.schema, in.width), g, aggs, m));
    zero_.group += m.column_comparisons;
    record("group_aggregate", out, KeySchema{g, Direction::kAscending}, expected, t);
  }

  void check_merge_join(const Input& in, int t) {
    const std::uint32_t kr = 1 + static_cast<std::uint32_t>(rng_() % 6);
    const std::uint32_t j = 1 + static_cast<std::uint32_t>(rng_() % std::min(in.k, kr));
    const auto right = partner_rows(in.rows, j, kr, true, rng_() % 301);
    const KeySchema rs{kr, Direction::kAscending};
    std::map<Row, std::vector<const Row*>> by_key;
    for (const auto& r : right) by_key[key_of(r, j)].push_back(&r);

    static const char* kNames[] = {"merge_join_inner", "merge_join_semi", "merge_join_anti", "merge_join_outer"};
    for (int kind = 0; kind < 4; ++kind) {
      std::vector<Row> expected;
      for (const auto& l : in.rows) {
        const auto it = by_key.find(key_of(l, j));
        const bool hit = it != by_key.end();
        if (kind == 1 && hit) expected.push_back(l);
        if (kind == 2 && !hit) expected.push_back(l);
        if (kind == 0 || kind == 3) {
          if (hit) {
            for (const Row* r : it->second) {
              Row o = l;
              o.insert(o.end(), r->begin() + j, r->end());
              expected.push_back(std::move(o));
            }
          } else if (kind == 3) {
            Row o = l;
            o.resize(l.size() + kr + 1 - j, kNull);
            expected.push_back(std::move(o));
          }
        }
      }
      MetricsCtx m;
      const auto out = materialize(*merge_join(coded(in.rows, in.schema, in.width), coded(right, rs, kr + 1), j,
                                               static_cast<JoinKind>(kind), m));
      record(kNames[kind], out, in.schema, expected, t);
    }
  }

  void check_set_ops(const Input& in, int t) {
    std::vector<Row> left;
    for (const auto& r : in.rows) left.push_back(key_of(r, in.k));
    const auto right = partner_rows(left, in.k, in.k, false, rng_() % 2001);
    const std::set<Row> lset(left.begin(), left.end());
    const std::set<Row> rset(right.begin(), right.end());
    std::vector<Row> both, only;
    std::set_intersection(lset.begin(), lset.end(), rset.begin(), rset.end(), std::back_inserter(both));
    std::set_difference(lset.begin(), lset.end(), rset.begin(), rset.end(), std::back_inserter(only));
    MetricsCtx m;
    record("intersect", materialize(*intersect_distinct(coded(left, in.schema, in.k), coded(right, in.schema, in.k), m)),
           in.schema, both, t);
    record("except", materialize(*except_distinct(coded(left, in.schema, in.k), coded(right, in.schema, in.k), m)),
           in.schema, only, t);
  }

  void check_lookup_join(const Input& in, int t) {
    const std::uint32_t jc = 1 + static_cast<std::uint32_t>(rng_() % in.k);
    const std::uint32_t extra = static_cast<std::uint32_t>(rng_() % 3);
    const std::uint32_t inner_key = jc + static_cast<std::uint32_t>(rng_() % (extra + 1));
    const std::size_t inner_width = jc + extra + 1;
    const auto inner = partner_rows(in.rows, jc, jc + extra, true, rng_() % 201);
    const JoinKind kind = static_cast<JoinKind>(t % 4);
    // Composite keys need distinct outer keys; those trials drop the payload.
    const bool composite = (kind == JoinKind::kInner || kind == JoinKind::kLeftOuter) && t % 8 < 4;

    std::vector<Row> outer = in.rows;
    std::size_t outer_width = in.width;
    if (composite) {
      outer.clear();
      for (const auto& r : in.rows) {
        Row key = key_of(r, in.k);
        if (outer.empty() || outer.back() != key) outer.push_back(std::move(key));
      }
      outer_width = in.k;
    }
    std::map<Row, std::vector<const Row*>> by_key;
    for (const auto& r : inner) by_key[key_of(r, jc)].push_back(&r);
    std::vector<Row> expected;
    for (const auto& o : outer) {
      const auto it = by_key.find(key_of(o, jc));
      const bool hit = it != by_key.end();
      if ((kind == JoinKind::kLeftSemi && hit) || (kind == JoinKind::kLeftAnti && !hit)) expected.push_back(o);
      if (kind == JoinKind::kInner || kind == JoinKind::kLeftOuter) {
        if (hit) {
          for (const Row* r : it->second) {
            Row x = o;
            x.insert(x.end(), r->begin(), r->end());
            expected.push_back(std::move(x));
          }
        } else if (kind == JoinKind::kLeftOuter) {
          Row x = o;
          x.resize(o.size() + inner_width, kNull);
          expected.push_back(std::move(x));
        }
      }
    }
    auto src = std::make_shared<IndexLookup>(inner, inner_width, jc, inner_key, composite);
    MetricsCtx m;
    auto j = lookup_join(coded(outer, in.schema, outer_width), src, kind, m);
    const KeySchema out_schema = j->schema();
    const KeySchema want = composite ? KeySchema{in.k + inner_key, Direction::kAscending} : in.schema;
    const auto out = materialize(*j);
    record(composite ? "lookup_join_composite" : "lookup_join", out, want, expected, t);
    if (!(out_schema == want)) ++ops_[composite ? "lookup_join_composite" : "lookup_join"].mismatches;
  }

  void check_exchange(const Input& in, int t) {
    const std::size_t parts = 1 + static_cast<std::size_t>(t % 4);
    const std::uint32_t hk = std::min<std::uint32_t>(in.k, 2);
    const std::uint64_t seed = rng_();
    auto part_of = [=](RowView r) { return hash_key(r.first(hk), seed) % parts; };
    MetricsCtx m;
    auto split = exchange_split(coded(in.rows, in.schema, in.width), parts, part_of, m);
    std::vector<StreamPtr> merged_in;
    // Drain partitions back to front so that the splitter buffers.
    std::vector<std::vector<CodedRow>> outs(parts);
    for (std::size_t p = parts; p-- > 0;) outs[p] = materialize(*split[p]);
    for (std::size_t p = 0; p < parts; ++p) {
      std::vector<Row> expected;
      for (const auto& r : in.rows) {
        if (part_of(r) == p) expected.push_back(r);
      }
      record("exchange_split", outs[p], in.schema, expected, t);
      merged_in.push_back(std::make_unique<VectorCodedStream>(outs[p], in.schema, in.width));
    }
    record("exchange_merge", materialize(*exchange_merge(std::move(merged_in), m)), in.schema, in.rows, t);
  }

  void check_scan(const Input& in, int t) {
    const auto table = std::make_shared<const RleTable>(
        RleTable::encode(in.rows, in.k, static_cast<std::uint32_t>(in.width - in.k)));
    MetricsCtx m;
    const auto out = materialize(*scan_with_codes(table, m));
    record("scan_with_codes", out, in.schema, in.rows, t);
    if (rows_of(out) != in.rows) ++ops_["scan_with_codes"].mismatches;
  }

  void check_sort(const Input& in, int t) {
    std::vector<Row> shuffled = in.rows;
    std::shuffle(shuffled.begin(), shuffled.end(), rng_);
    SortConfig cfg;
    cfg.memory_budget_rows = 16 + rng_() % 4000;
    cfg.fan_in = 2 + rng_() % 15;
    cfg.run_gen = t % 3 == 0 ? RunGenMode::kReplacementSelection : RunGenMode::kMiniRunMerge;
    cfg.drop_duplicates = t % 5 == 0;
    MetricsCtx m;
    auto out = materialize(*sort_rows(shuffled, in.width, in.schema, cfg, m));
    if (!cfg.drop_duplicates) {
      record("sort", out, in.schema, in.rows, t);
      return;
    }
    // Which row of a key survives is unspecified: compare keys, and check
    // that every output row is an input row.
    std::vector<Row> keys, expected;
    for (auto& c : out) keys.push_back(key_of(c.row, in.k));
    for (const auto& r : testing::distinct_keys(in.rows, in.k)) expected.push_back(key_of(r, in.k));
    std::vector<CodedRow> keyed;
    for (std::size_t i = 0; i < out.size(); ++i) keyed.push_back({keys[i], out[i].code});
    record("sort", keyed, in.schema, expected, t);
    std::multiset<Row> pool(in.rows.begin(), in.rows.end());
    for (const auto& c : out) {
      const auto it = pool.find(c.row);
      if (it == pool.end()) {
        ++ops_["sort"].mismatches;
        break;
      }
      pool.erase(it);
    }
  }

  std::mt19937_64 rng_{3};
  int trials_ = 0;
  std::map<std::string, OpTally> ops_;
  ZeroTally zero_;
};

// 4. Comparison bounds for a sort of 10^5 rows

Outcome sort_bounds(const fs::path& dir) {
  GenSpec spec;
  spec.rows = 100000;
  spec.key_cols = 4;
  spec.ratio = 1;
  spec.seed = 4;
  const auto table = tools::generate_table(spec);
  SortConfig cfg;
  cfg.spill_dir = dir;
  const auto r = tools::run_sort(table, cfg);
  const double bound = 1.1 * stirling_lower_bound(spec.rows);
  Outcome o;
  o.pass = r.violations.empty() && r.rows_out == spec.rows && r.metrics.column_comparisons <= spec.rows * 4 &&
           static_cast<double>(r.metrics.row_comparisons) <= bound;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "column_comparisons %llu <= N*K %llu; row_comparisons %llu = %.4f x log2(N!) (limit 1.1); "
                "%zu violations",
                static_cast<unsigned long long>(r.metrics.column_comparisons),
                static_cast<unsigned long long>(spec.rows * 4),
                static_cast<unsigned long long>(r.metrics.row_comparisons),
                static_cast<double>(r.metrics.row_comparisons) / stirling_lower_bound(spec.rows), r.violations.size());
  o.detail = buf;
  return o;
}

// 5. Group-boundary benchmark

Outcome group_benchmark() {
  Outcome o;
  std::ostringstream d;
  for (double ratio : {1.0, 10.0, 100.0}) {
    GenSpec spec;
    spec.rows = 1000000;
    spec.key_cols = 4;
    spec.ratio = ratio;
    spec.seed = 5;
    spec.sorted = true;
    const auto table = tools::generate_table(spec);
    // Alternate the modes so that drift on a shared machine hits both alike.
    auto ovc = tools::bench_group(table, 4, BoundaryMode::kCodes, 3);
    auto full = tools::bench_group(table, 4, BoundaryMode::kFullCompare, 3);
    for (int round = 0; round < 4; ++round) {
      ovc.wall_ms = std::min(ovc.wall_ms, tools::bench_group(table, 4, BoundaryMode::kCodes, 3).wall_ms);
      full.wall_ms = std::min(full.wall_ms, tools::bench_group(table, 4, BoundaryMode::kFullCompare, 3).wall_ms);
    }
    const double time_ratio = ovc.wall_ms / full.wall_ms;
    const bool ok = ovc.metrics.column_comparisons == 0 && full.metrics.column_comparisons >= spec.rows &&
                    time_ratio <= 0.75 && ovc.checksum == full.checksum;
    o.pass = o.pass && ok;
    char buf[200];
    std::snprintf(buf, sizeof buf, "ratio %g: ovc %llu cc %.2f ms, full %llu cc %.2f ms, time ratio %.3f; ", ratio,
                  static_cast<unsigned long long>(ovc.metrics.column_comparisons), ovc.wall_ms,
                  static_cast<unsigned long long>(full.metrics.column_comparisons), full.wall_ms, time_ratio);
    d << buf;
  }
  d << "limit 0.75";
  o.detail = d.str();
  return o;
}

// 6. Intersect: sort-based versus hash-based spill volume

Outcome intersect_spill(const fs::path& dir) {
  GenSpec spec;
  spec.rows = 1000000;
  spec.key_cols = 4;
  spec.ratio = 1.25;
  spec.seed = 6;
  const auto t1 = tools::generate_table(spec);
  spec.seed = 7;
  const auto t2 = tools::generate_table(spec);
  tools::IntersectConfig cfg;
  cfg.budget_rows = 100000;
  cfg.spill_dir = dir;
  const auto s = tools::intersect_sort(t1, t2, cfg);
  const auto h = tools::intersect_hash(t1, t2, cfg);
  const double n = static_cast<double>(spec.rows);
  const double sort_spill = static_cast<double>(s.metrics.rows_spilled);
  const double hash_spill = static_cast<double>(h.metrics.rows_spilled);
  Outcome o;
  o.pass = sort_spill >= 2 * n && sort_spill <= 2.1 * n && hash_spill >= 1.5 * sort_spill && s.checksum == h.checksum &&
           s.checksum.rows > 0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "sort spilled %.0f = %.3f N (limit [2, 2.1]), hash spilled %.0f = %.3f x sort (limit 1.5), "
                "%llu result rows, checksums %s",
                sort_spill, sort_spill / n, hash_spill, hash_spill / sort_spill,
                static_cast<unsigned long long>(s.checksum.rows), s.checksum == h.checksum ? "equal" : "differ");
  o.detail = buf;
  return o;
}

// 8. Byte-exact round trips

Outcome round_trips(const fs::path& dir) {
  std::mt19937_64 rng(8);
  int run_ok = 0, rle_ok = 0;
  for (int i = 0; i < 50; ++i) {
    GenSpec spec;
    spec.rows = i % 10 == 0 ? 0 : rng() % 3000;
    spec.key_cols = 1 + static_cast<std::uint32_t>(i % 6);
    spec.ratio = std::vector<double>{1, 4, 64}[i % 3];
    spec.payload_cols = static_cast<std::uint32_t>(i % 3);
    spec.seed = rng();
    spec.sorted = true;
    const auto rows = generate(spec);
    const std::size_t width = spec.key_cols + spec.payload_cols;

    const KeySchema s{spec.key_cols, i % 2 ? Direction::kDescending : Direction::kAscending};
    const fs::path r1 = dir / ("rt" + std::to_string(i) + "a.run");
    const fs::path r2 = dir / ("rt" + std::to_string(i) + "b.run");
    VectorCodedStream src(with_codes(rows, s), s, width);
    write_run(src, r1);
    RunReader reader(r1);
    write_run(reader, r2);
    const bool run_same = slurp(r1) == slurp(r2) && !slurp(r1).empty();
    RunReader check(r2);
    if (run_same && materialize(check) == with_codes(rows, s)) ++run_ok;

    const auto table = RleTable::encode(rows, spec.key_cols, spec.payload_cols);
    const fs::path t1 = dir / ("rt" + std::to_string(i) + "a.rle");
    const fs::path t2 = dir / ("rt" + std::to_string(i) + "b.rle");
    write_rle(table, t1);
    const auto back = read_rle(t1);
    write_rle(back, t2);
    if (slurp(t1) == slurp(t2) && back == table && back.decode() == rows) ++rle_ok;
  }
  Outcome o;
  o.pass = run_ok == 50 && rle_ok == 50;
  o.detail = std::to_string(run_ok) + "/50 run files, " + std::to_string(rle_ok) + "/50 RLE tables identical";
  return o;
}

}  // namespace
}  // namespace ovcq

int main(int argc, char** argv) {
  using namespace ovcq;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto wanted = [&](int c) { return only.empty() || only.count(c) > 0; };

  TempDir dir;
  bool all = true;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && o.pass;
    std::printf("%s %d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  if (wanted(1)) report(1, "worked examples", worked_examples);
  if (wanted(2)) report(2, "chain rule property suite", chain_rule_suite);
  Trials trials;
  if (wanted(3) || wanted(7)) {
    const auto start = std::chrono::steady_clock::now();
    try {
      trials.run(200);
    } catch (const std::exception& e) {
      std::printf("FAIL 3 oracle equivalence: exception: %s\n", e.what());
      return 1;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (wanted(3)) {
      const auto o = trials.equivalence();
      all = all && o.pass;
      std::printf("%s 3 oracle equivalence: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    }
  }
  if (wanted(4)) report(4, "sort comparison bounds", [&] { return sort_bounds(dir.path()); });
  if (wanted(5)) report(5, "group boundary benchmark", group_benchmark);
  if (wanted(6)) report(6, "intersect spill volume", [&] { return intersect_spill(dir.path()); });
  if (wanted(7)) report(7, "zero-comparison operators", [&] { return trials.zero_comparisons(); });
  if (wanted(8)) report(8, "file round trips", [&] { return round_trips(dir.path()); });
  return all ? 0 : 1;
}
