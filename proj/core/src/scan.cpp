#include "ovcq/scan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include "ovcq/binary_io.hpp"

namespace ovcq {

RleTable RleTable::encode(const std::vector<Row>& rows, std::uint32_t arity, std::uint32_t payload_cols) {
  KeySchema{arity, Direction::kAscending}.validate();
  RleTable t;
  t.arity = arity;
  t.payload_cols = payload_cols;
  t.rows = rows.size();
  t.key_runs.resize(arity);
  t.payload.assign(payload_cols, std::vector<Column>(rows.size()));
  const std::size_t width = t.width();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Row& row = rows[r];
    if (row.size() != width) throw Error(ErrorKind::kInvalidArgument, "row width does not match the table");
    // First column where this row differs from its predecessor.
    std::uint32_t start = 0;
    if (r > 0) {
      const Row& prev = rows[r - 1];
      while (start < arity && row[start] == prev[start]) ++start;
      if (start < arity && row[start] < prev[start]) {
        throw Error(ErrorKind::kOrderViolation, "RLE encoding requires rows sorted on the key");
      }
    }
    for (std::uint32_t c = 0; c < arity; ++c) {
      if (c >= start) {
        t.key_runs[c].push_back(RleRun{row[c], 1});
      } else {
        ++t.key_runs[c].back().length;
      }
    }
    for (std::uint32_t p = 0; p < payload_cols; ++p) t.payload[p][r] = row[arity + p];
  }
  return t;
}

std::vector<Row> RleTable::decode() const {
  validate();
  std::vector<Row> out(rows, Row(width()));
  for (std::uint32_t c = 0; c < arity; ++c) {
    std::uint64_t r = 0;
    for (const auto& run : key_runs[c]) {
      for (std::uint64_t k = 0; k < run.length; ++k) out[r++][c] = run.value;
    }
  }
  for (std::uint32_t p = 0; p < payload_cols; ++p) {
    for (std::uint64_t r = 0; r < rows; ++r) out[r][arity + p] = payload[p][r];
  }
  return out;
}

void RleTable::validate() const {
  const auto fail = [](const char* what) { throw Error(ErrorKind::kFormatError, what); };
  if (arity < 1) fail("RLE table without key columns");
  if (key_runs.size() != arity) fail("RLE key column count mismatch");
  if (payload.size() != payload_cols) fail("RLE payload column count mismatch");
  for (const auto& col : payload) {
    if (col.size() != rows) fail("RLE payload length mismatch");
  }
  // Run starts of the previous column, walked in lockstep with the current one.
  std::vector<std::uint64_t> prev_starts;
  for (std::uint32_t c = 0; c < arity; ++c) {
    std::vector<std::uint64_t> starts;
    starts.reserve(key_runs[c].size());
    std::uint64_t pos = 0;
    std::size_t parent = 0;
    for (std::size_t i = 0; i < key_runs[c].size(); ++i) {
      const RleRun& run = key_runs[c][i];
      if (run.length == 0) fail("RLE run of length zero");
      starts.push_back(pos);
      bool parent_starts = c == 0 ? i == 0 : false;
      if (c > 0) {
        while (parent < prev_starts.size() && prev_starts[parent] < pos) ++parent;
        parent_starts = parent < prev_starts.size() && prev_starts[parent] == pos;
      }
      if (!parent_starts && i > 0 && run.value <= key_runs[c][i - 1].value) {
        fail("RLE runs out of key order");
      }
      if (run.length > rows - pos) fail("RLE runs exceed the row count");
      pos += run.length;
    }
    if (pos != rows) fail("RLE runs do not cover the row count");
    if (c > 0) {
      // Every run start of the previous column must also start a run here.
      std::size_t k = 0;
      for (auto s : prev_starts) {
        while (k < starts.size() && starts[k] < s) ++k;
        if (k == starts.size() || starts[k] != s) fail("RLE runs are not nested");
      }
    }
    prev_starts = std::move(starts);
  }
}

void write_rle(const RleTable& table, const std::filesystem::path& path) {
  table.validate();
  ByteWriter out(path, ErrorKind::kFormatError);
  out.u32(kRleMagic);
  out.u32(table.arity);
  out.u32(table.payload_cols);
  out.u64(table.rows);
  for (const auto& col : table.key_runs) {
    out.u64(col.size());
    for (const auto& run : col) {
      out.u32(run.value);
      out.u64(run.length);
    }
  }
  for (const auto& col : table.payload) out.u32s(col);
  out.close();
}

RleTable read_rle(const std::filesystem::path& path) {
  ByteReader in(path);
  if (in.u32() != kRleMagic) throw Error(ErrorKind::kFormatError, "not an RLE table: " + path.string());
  RleTable t;
  t.arity = in.u32();
  t.payload_cols = in.u32();
  t.rows = in.u64();
  if (t.arity < 1 || t.arity > kMaxArity) throw Error(ErrorKind::kFormatError, "bad RLE arity");
  t.key_runs.resize(t.arity);
  for (auto& col : t.key_runs) {
    const std::uint64_t n = in.u64();
    if (n > t.rows) throw Error(ErrorKind::kFormatError, "bad RLE run count");
    col.resize(n);
    for (auto& run : col) {
      run.value = in.u32();
      run.length = in.u64();
    }
  }
  t.payload.assign(t.payload_cols, std::vector<Column>(t.rows));
  for (auto& col : t.payload) in.u32s(col);
  if (!in.at_end()) throw Error(ErrorKind::kFormatError, "trailing bytes in RLE table");
  t.validate();
  return t;
}

namespace {

class RleScanStream final : public CodedStream {
 public:
  explicit RleScanStream(std::shared_ptr<const RleTable> table)
      : CodedStream(KeySchema{table->arity, Direction::kAscending}, table->width()),
        table_(std::move(table)),
        run_(table_->arity, 0),
        left_(table_->arity, 0),
        row_(width()) {}

  bool next() override {
    if (pos_ == table_->rows) return false;
    const std::uint32_t arity = table_->arity;
    std::uint32_t offset = arity;
    for (std::uint32_t c = 0; c < arity; ++c) {
      if (left_[c] != 0) continue;
      // Runs nest, so every later column starts a run here as well.
      if (offset == arity) offset = c;
      if (pos_ > 0) ++run_[c];
      const RleRun& run = table_->key_runs[c][run_[c]];
      row_[c] = run.value;
      left_[c] = run.length;
    }
    for (std::uint32_t c = 0; c < arity; ++c) --left_[c];
    for (std::uint32_t p = 0; p < table_->payload_cols; ++p) row_[arity + p] = table_->payload[p][pos_];
    code_ = make_code(offset, offset < arity ? row_[offset] : 0, schema());
    ++pos_;
    return true;
  }
  RowView row() const override { return row_; }
  Ovc code() const override { return code_; }

 private:
  std::shared_ptr<const RleTable> table_;
  std::vector<std::size_t> run_;
  std::vector<std::uint64_t> left_;
  std::uint64_t pos_ = 0;
  Row row_;
  Ovc code_;
};

using Rng = std::mt19937_64;

// Domain sizes per key column, possibly from a single shared entry.
std::vector<std::uint64_t> domains(const GenSpec& spec) {
  if (spec.ratio > 0.0) {
    const double distinct = std::max(1.0, std::round(static_cast<double>(spec.rows) / spec.ratio));
    auto d = static_cast<std::uint64_t>(std::ceil(std::pow(distinct, 1.0 / spec.key_cols) - 1e-9));
    d = std::max<std::uint64_t>(d, 1);
    // Guard against pow() rounding just below the target.
    while (std::pow(static_cast<double>(d), spec.key_cols) < distinct) ++d;
    return std::vector<std::uint64_t>(spec.key_cols, d);
  }
  if (spec.distinct_per_col.size() == 1) return std::vector<std::uint64_t>(spec.key_cols, spec.distinct_per_col[0]);
  if (spec.distinct_per_col.size() != spec.key_cols) {
    throw Error(ErrorKind::kInvalidArgument, "distinct_per_col needs one entry per key column");
  }
  return spec.distinct_per_col;
}

std::uint64_t distinct_target(const GenSpec& spec) {
  if (spec.rows == 0) return 0;
  if (spec.ratio > 0.0) {
    return std::min<std::uint64_t>(
        spec.rows, static_cast<std::uint64_t>(std::max(1.0, std::round(static_cast<double>(spec.rows) / spec.ratio))));
  }
  return spec.rows;
}

// Picks `count` distinct keys from the mixed-radix space over `radix`.
std::vector<Row> key_pool(const std::vector<std::uint64_t>& radix, std::uint64_t count, Rng& rng) {
  // Spaces up to 2^32 keep a * k below 2^64 for the affine permutation.
  constexpr std::uint64_t kExactLimit = std::uint64_t{1} << 32;
  std::uint64_t space = 1;
  for (auto r : radix) {
    if (space > kExactLimit / r) {
      space = kExactLimit + 1;
      break;
    }
    space *= r;
  }
  std::vector<Row> pool;
  if (space <= kExactLimit) {
    const std::uint64_t m = space;
    count = std::min(count, m);
    // An affine map with a multiplier coprime to m permutes [0, m).
    std::uniform_int_distribution<std::uint64_t> pick(0, m - 1);
    std::uint64_t a = 1;
    if (m > 1) {
      do a = pick(rng) | 1; while (std::gcd(a, m) != 1);
    }
    const std::uint64_t b = pick(rng);
    pool.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
      std::uint64_t idx = (a % m * k + b) % m;
      Row key(radix.size());
      for (std::size_t c = radix.size(); c-- > 0;) {
        key[c] = static_cast<Column>(idx % radix[c]);
        idx /= radix[c];
      }
      pool.push_back(std::move(key));
    }
    return pool;
  }
  // Huge key space: rejection sampling terminates quickly.
  struct KeyHash {
    std::size_t operator()(const Row& r) const {
      std::uint64_t h = 0x9E3779B97F4A7C15ull;
      for (auto v : r) h = (h ^ v) * 0xBF58476D1CE4E5B9ull;
      return static_cast<std::size_t>(h ^ (h >> 31));
    }
  };
  std::unordered_set<Row, KeyHash> seen;
  pool.reserve(count);
  while (pool.size() < count) {
    Row key(radix.size());
    for (std::size_t c = 0; c < radix.size(); ++c) {
      key[c] = static_cast<Column>(std::uniform_int_distribution<std::uint64_t>(0, radix[c] - 1)(rng));
    }
    if (seen.insert(key).second) pool.push_back(std::move(key));
  }
  return pool;
}

}  // namespace

StreamPtr scan_with_codes(std::shared_ptr<const RleTable> table, MetricsCtx& /*metrics*/) {
  table->validate();
  return std::make_unique<RleScanStream>(std::move(table));
}

std::vector<Row> generate(const GenSpec& spec) {
  if (spec.key_cols < 1) throw Error(ErrorKind::kInvalidArgument, "need at least one key column");
  Rng rng(spec.seed);
  std::vector<Row> pool;
  if (!spec.key_pool.empty()) {
    for (const auto& k : spec.key_pool) {
      if (k.size() != spec.key_cols) throw Error(ErrorKind::kInvalidArgument, "key pool row has the wrong arity");
    }
    pool = spec.key_pool;
  } else if (spec.rows > 0) {
    const auto radix = domains(spec);
    for (auto r : radix) {
      if (r < 1 || r > (std::uint64_t{1} << 32)) throw Error(ErrorKind::kInvalidArgument, "bad column domain");
    }
    pool = key_pool(radix, distinct_target(spec), rng);
  }

  const std::size_t width = std::size_t{spec.key_cols} + spec.payload_cols;
  std::vector<Row> rows;
  rows.reserve(spec.rows);
  std::uniform_int_distribution<Column> payload(0, 999);
  for (std::uint64_t i = 0; i < spec.rows; ++i) {
    Row row(width);
    const Row& key = pool[i % pool.size()];
    std::copy(key.begin(), key.end(), row.begin());
    for (std::uint32_t p = 0; p < spec.payload_cols; ++p) row[spec.key_cols + p] = payload(rng);
    rows.push_back(std::move(row));
  }
  if (spec.sorted) {
    const auto k = spec.key_cols;
    std::stable_sort(rows.begin(), rows.end(), [k](const Row& a, const Row& b) {
      return std::lexicographical_compare(a.begin(), a.begin() + k, b.begin(), b.begin() + k);
    });
  } else if (spec.key_pool.empty()) {
    std::shuffle(rows.begin(), rows.end(), rng);
  }
  return rows;
}

RowStreamPtr generate_stream(const GenSpec& spec) {
  auto rows = generate(spec);
  return std::make_unique<VectorRowStream>(std::move(rows), std::size_t{spec.key_cols} + spec.payload_cols);
}

}  // namespace ovcq
