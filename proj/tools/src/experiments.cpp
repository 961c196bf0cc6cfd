#include "ovcq_tools/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>

#include "ovcq/extsort.hpp"
#include "ovcq/row_block.hpp"
#include "ovcq/row_file.hpp"
#include "ovcq/run_file.hpp"

namespace ovcq::tools {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint32_t read_magic(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kFormatError, "cannot open " + path.string());
  unsigned char b[4] = {};
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorKind::kFormatError, "file too short: " + path.string());
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
}

bool key_less(const Row& a, const Row& b, std::uint32_t k) {
  return std::lexicographical_compare(a.begin(), a.begin() + k, b.begin(), b.begin() + k);
}

// Rows stored back to back, as a scan buffer would hold them.
class BlockCodedStream final : public CodedStream {
 public:
  BlockCodedStream(const RowBlock& rows, const std::vector<Ovc>& codes, KeySchema schema)
      : CodedStream(schema, rows.width()), rows_(rows), codes_(codes) {}

  bool next() override { return ++pos_ < codes_.size(); }
  RowView row() const override { return rows_[pos_]; }
  Ovc code() const override { return codes_[pos_]; }

 private:
  const RowBlock& rows_;
  const std::vector<Ovc>& codes_;
  std::size_t pos_ = static_cast<std::size_t>(-1);
};

std::vector<Row> key_columns(const Table& t) {
  std::vector<Row> keys;
  keys.reserve(t.rows.size());
  for (const auto& r : t.rows) keys.emplace_back(r.begin(), r.begin() + t.key_cols);
  return keys;
}

void check_same_key(const Table& t1, const Table& t2) {
  if (t1.key_cols != t2.key_cols) throw Error(ErrorKind::kSchemaMismatch, "inputs have different key arities");
}

StreamPtr replay(const std::vector<CodedRow>& rows, const KeySchema& schema, std::size_t width) {
  return std::make_unique<VectorCodedStream>(rows, schema, width);
}

StageReport check_stage(std::string name, const std::vector<CodedRow>& out, const KeySchema& schema,
                        const std::vector<Row>* expected) {
  StageReport r;
  r.stage = std::move(name);
  r.rows = out.size();
  r.violations = recompute_codes(out, schema);
  if (expected) {
    std::vector<Row> got;
    got.reserve(out.size());
    for (const auto& c : out) got.push_back(c.row);
    r.result_matches = got == *expected;
  }
  return r;
}

void corrupt(std::vector<CodedRow>& rows, std::int64_t index) {
  if (index < 0 || static_cast<std::size_t>(index) >= rows.size()) return;
  auto& c = rows[static_cast<std::size_t>(index)].code;
  c = Ovc::from_raw(c.raw() ^ 1);
}

}  // namespace

Table load_table(const fs::path& path) {
  const auto magic = read_magic(path);
  if (magic == kRleMagic) {
    const auto rle = read_rle(path);
    return Table{rle.arity, rle.payload_cols, rle.decode()};
  }
  if (magic == kRowFileMagic) {
    auto t = read_row_file(path);
    return Table{t.key_cols, t.payload_cols, std::move(t.rows)};
  }
  throw Error(ErrorKind::kFormatError, "unknown file format: " + path.string());
}

void save_table(const Table& table, const fs::path& path, DataFormat format) {
  if (format == DataFormat::kPlain) {
    write_row_file(path, RowTable{table.key_cols, table.payload_cols, table.rows});
    return;
  }
  std::vector<Row> rows = table.rows;
  const auto k = table.key_cols;
  std::stable_sort(rows.begin(), rows.end(), [k](const Row& a, const Row& b) { return key_less(a, b, k); });
  write_rle(RleTable::encode(rows, table.key_cols, table.payload_cols), path);
}

Table generate_table(const GenSpec& spec) { return Table{spec.key_cols, spec.payload_cols, generate(spec)}; }

void Checksum::add(RowView row) {
  ++rows;
  sum += hash_key(row, 0x0C0FFEE5u);
}

std::string Checksum::hex() const {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(sum));
  return buf;
}

SortResult run_sort(const Table& table, const SortConfig& cfg, const fs::path& out) {
  SortResult result;
  const KeySchema schema{table.key_cols, Direction::kAscending};
  VectorRowStream in(table.rows, table.width());
  const auto start = Clock::now();
  auto sorted = sort(in, schema, cfg, result.metrics, &result.merge);
  auto rows = materialize(*sorted);
  result.wall_ms = ms_since(start);
  result.rows_out = rows.size();
  result.log2_factorial = stirling_lower_bound(std::max<std::uint64_t>(1, table.rows.size()));
  result.violations = recompute_codes(rows, schema);
  if (!out.empty()) {
    VectorCodedStream s(std::move(rows), schema, table.width());
    write_run(s, out);
  }
  return result;
}

GroupBenchResult bench_group(const Table& table, std::uint32_t g, BoundaryMode mode, int repeats) {
  const auto rle = std::make_shared<const RleTable>(RleTable::encode(table.rows, table.key_cols, table.payload_cols));
  MetricsCtx scan_metrics;
  auto scan = scan_with_codes(rle, scan_metrics);
  RowBlock rows(table.width());
  rows.reserve(table.rows.size());
  std::vector<Ovc> codes;
  codes.reserve(table.rows.size());
  while (scan->next()) {
    rows.push_back(scan->row());
    codes.push_back(scan->code());
  }
  const KeySchema schema{table.key_cols, Direction::kAscending};

  GroupBenchResult result;
  result.rows = codes.size();
  {
    MetricsCtx m;
    auto groups = group_aggregate(std::make_unique<BlockCodedStream>(rows, codes, schema), g,
                                  {Aggregate{AggKind::kCount}}, m, mode);
    while (groups->next()) result.checksum.add(groups->row());
    result.groups = result.checksum.rows;
    result.metrics = m;
  }
  result.wall_ms = -1;
  for (int rep = 0; rep < std::max(1, repeats); ++rep) {
    MetricsCtx m;
    auto groups = group_aggregate(std::make_unique<BlockCodedStream>(rows, codes, schema), g,
                                  {Aggregate{AggKind::kCount}}, m, mode);
    std::uint64_t n = 0;
    const auto start = Clock::now();
    while (groups->next()) n += groups->row()[g];
    const double ms = ms_since(start);
    if (n != result.rows) throw Error(ErrorKind::kInvalidArgument, "group counts do not add up");
    if (result.wall_ms < 0 || ms < result.wall_ms) result.wall_ms = ms;
  }
  return result;
}

IntersectResult intersect_sort(const Table& t1, const Table& t2, const IntersectConfig& cfg) {
  check_same_key(t1, t2);
  IntersectResult result;
  const KeySchema schema{t1.key_cols, Direction::kAscending};
  SortConfig sc;
  sc.memory_budget_rows = cfg.budget_rows;
  sc.drop_duplicates = true;
  sc.spill_dir = cfg.spill_dir;
  VectorRowStream in1(key_columns(t1), t1.key_cols);
  VectorRowStream in2(key_columns(t2), t2.key_cols);
  const auto start = Clock::now();
  auto s1 = sort(in1, schema, sc, result.metrics);
  auto s2 = sort(in2, schema, sc, result.metrics);
  auto out = intersect_distinct(std::move(s1), std::move(s2), result.metrics);
  while (out->next()) result.checksum.add(out->row());
  result.wall_ms = ms_since(start);
  return result;
}

IntersectResult intersect_hash(const Table& t1, const Table& t2, const IntersectConfig& cfg) {
  check_same_key(t1, t2);
  IntersectResult result;
  HashOpConfig hc;
  hc.memory_budget_rows = cfg.budget_rows;
  hc.partitions = cfg.hash_partitions;
  hc.spill_dir = cfg.spill_dir;
  VectorRowStream in1(key_columns(t1), t1.key_cols);
  VectorRowStream in2(key_columns(t2), t2.key_cols);
  const auto start = Clock::now();
  auto d1 = hash_aggregate(in1, t1.key_cols, {}, hc, result.metrics);
  auto d2 = hash_aggregate(in2, t2.key_cols, {}, hc, result.metrics);
  auto out = hash_join(*d1, *d2, t1.key_cols, hc, result.metrics);
  while (out->next()) result.checksum.add(out->row());
  result.wall_ms = ms_since(start);
  return result;
}

std::vector<StageReport> verify_sort(const Table& table, const VerifyOptions& opts) {
  const KeySchema schema{table.key_cols, Direction::kAscending};
  MetricsCtx m;
  auto out = materialize(*sort_rows(table.rows, table.width(), schema, SortConfig{}, m));
  corrupt(out, opts.corrupt_index);
  // Stability is not promised, so rows are compared as multisets.
  std::vector<Row> expected = table.rows;
  std::vector<Row> got;
  for (const auto& c : out) got.push_back(c.row);
  std::sort(got.begin(), got.end());
  std::sort(expected.begin(), expected.end());
  StageReport r = check_stage("sort", out, schema, nullptr);
  r.result_matches = got == expected;
  return {r};
}

std::vector<StageReport> verify_pipeline(std::uint64_t seed, const VerifyOptions& opts) {
  std::vector<StageReport> reports;
  const double ratios[] = {1, 4, 64};
  std::mt19937_64 rng(seed);

  GenSpec left;
  left.rows = 200 + rng() % 3000;
  left.key_cols = 3;
  left.ratio = ratios[seed % 3];
  left.payload_cols = 1;
  left.seed = rng();
  left.sorted = true;
  const auto rows = generate(left);
  const KeySchema k3{3, Direction::kAscending};
  const KeySchema k2{2, Direction::kAscending};

  MetricsCtx m;
  const auto table = std::make_shared<const RleTable>(RleTable::encode(rows, 3, 1));
  const auto scanned = materialize(*scan_with_codes(table, m));
  reports.push_back(check_stage("scan", scanned, k3, &rows));

  auto keep = [](RowView r) { return r[3] % 3 != 0; };
  const auto filtered = materialize(*filter(replay(scanned, k3, 4), keep, m));
  std::vector<Row> expected_filter;
  for (const auto& r : rows) {
    if (keep(r)) expected_filter.push_back(r);
  }
  reports.push_back(check_stage("filter", filtered, k3, &expected_filter));

  const std::vector<Aggregate> aggs = {{AggKind::kCount}, {AggKind::kSum, 3}};
  std::vector<CodedRow> grouped;
  if (opts.partitions <= 1) {
    grouped = materialize(*group_aggregate(replay(filtered, k3, 4), 2, aggs, m));
  } else {
    const std::size_t parts = opts.partitions;
    auto split = exchange_split(
        replay(filtered, k3, 4), parts,
        [parts](RowView r) { return static_cast<std::size_t>(hash_key(r.first(2), 7) % parts); }, m);
    std::vector<StreamPtr> merged_inputs;
    for (std::size_t p = 0; p < parts; ++p) {
      const auto part = materialize(*split[p]);
      reports.push_back(check_stage("partition " + std::to_string(p), part, k3, nullptr));
      auto g = materialize(*group_aggregate(replay(part, k3, 4), 2, aggs, m));
      reports.push_back(check_stage("group " + std::to_string(p), g, k2, nullptr));
      merged_inputs.push_back(replay(g, k2, 4));
    }
    grouped = materialize(*exchange_merge(std::move(merged_inputs), m));
  }
  std::map<Row, std::pair<std::uint64_t, std::uint64_t>> groups;
  for (const auto& r : expected_filter) {
    auto& [count, sum] = groups[Row{r[0], r[1]}];
    ++count;
    sum += r[3];
  }
  std::vector<Row> expected_groups;
  for (const auto& [key, acc] : groups) {
    expected_groups.push_back(Row{key[0], key[1], static_cast<Column>(acc.first), static_cast<Column>(acc.second)});
  }
  reports.push_back(check_stage("group", grouped, k2, &expected_groups));

  // Right side: a second table keyed on two columns over the same domain.
  GenSpec right;
  right.rows = 100 + rng() % 1000;
  right.key_cols = 2;
  Column domain = 1;
  for (const auto& r : rows) domain = std::max({domain, r[0] + 1, r[1] + 1});
  right.distinct_per_col = {domain};
  right.payload_cols = 1;
  right.seed = rng();
  right.sorted = true;
  const auto right_rows = generate(right);
  const auto right_scan =
      materialize(*scan_with_codes(std::make_shared<const RleTable>(RleTable::encode(right_rows, 2, 1)), m));
  const auto right_dedup = materialize(*dedup(replay(right_scan, k2, 3), m));
  std::vector<Row> expected_dedup;
  for (const auto& r : right_rows) {
    if (expected_dedup.empty() || expected_dedup.back()[0] != r[0] || expected_dedup.back()[1] != r[1]) {
      expected_dedup.push_back(r);
    }
  }
  reports.push_back(check_stage("dedup", right_dedup, k2, &expected_dedup));

  auto joined = materialize(
      *merge_join(replay(grouped, k2, 4), replay(right_dedup, k2, 3), 2, JoinKind::kInner, m, CheckMode::kChecked));
  std::map<Row, Column> right_payload;
  for (const auto& r : expected_dedup) right_payload.emplace(Row{r[0], r[1]}, r[2]);
  std::vector<Row> expected_join;
  for (const auto& g : expected_groups) {
    const auto it = right_payload.find(Row{g[0], g[1]});
    if (it == right_payload.end()) continue;
    Row o = g;
    o.push_back(it->second);
    expected_join.push_back(std::move(o));
  }
  corrupt(joined, opts.corrupt_index);
  reports.push_back(check_stage("merge join", joined, k2, &expected_join));
  return reports;
}

}  // namespace ovcq::tools
