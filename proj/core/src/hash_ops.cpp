#include "ovcq/hash_ops.hpp"

#include <algorithm>
#include <limits>

#include "ovcq/row_file.hpp"

namespace ovcq {

namespace {

constexpr std::uint64_t kSeedBase = 0x243F6A8885A308D3ull;
constexpr std::uint32_t kNoEntry = std::numeric_limits<std::uint32_t>::max();

std::uint64_t fmix64(std::uint64_t k) {
  k ^= k >> 33;
  k *= 0xFF51AFD7ED558CCDull;
  k ^= k >> 33;
  k *= 0xC4CEB9FE1A85EC53ull;
  k ^= k >> 33;
  return k;
}

std::uint64_t level_seed(std::size_t depth) { return fmix64(kSeedBase + depth); }

// Open-addressing table of distinct keys stored flat.
class KeyTable {
 public:
  KeyTable(std::size_t key_width, MetricsCtx& metrics) : key_width_(key_width), metrics_(metrics) {
    slots_.assign(16, kNoEntry);
  }

  std::uint32_t find(RowView key, std::uint64_t h) const {
    for (std::size_t s = h & mask(); slots_[s] != kNoEntry; s = (s + 1) & mask()) {
      const std::uint32_t e = slots_[s];
      if (hashes_[e] == h && equal(e, key)) return e;
    }
    return kNoEntry;
  }

  std::uint32_t insert(RowView key, std::uint64_t h) {
    if ((hashes_.size() + 1) * 2 > slots_.size()) grow();
    const auto e = static_cast<std::uint32_t>(hashes_.size());
    hashes_.push_back(h);
    keys_.insert(keys_.end(), key.begin(), key.begin() + key_width_);
    place(e);
    return e;
  }

  std::size_t size() const { return hashes_.size(); }
  RowView key(std::uint32_t e) const { return RowView(keys_).subspan(e * key_width_, key_width_); }

 private:
  std::size_t mask() const { return slots_.size() - 1; }

  bool equal(std::uint32_t e, RowView key) const {
    ++metrics_.row_comparisons;
    const Column* stored = keys_.data() + e * key_width_;
    for (std::size_t c = 0; c < key_width_; ++c) {
      ++metrics_.column_comparisons;
      if (stored[c] != key[c]) return false;
    }
    return true;
  }

  void place(std::uint32_t e) {
    std::size_t s = hashes_[e] & mask();
    while (slots_[s] != kNoEntry) s = (s + 1) & mask();
    slots_[s] = e;
  }

  void grow() {
    slots_.assign(slots_.size() * 2, kNoEntry);
    for (std::uint32_t e = 0; e < hashes_.size(); ++e) place(e);
  }

  std::size_t key_width_;
  MetricsCtx& metrics_;
  std::vector<std::uint64_t> hashes_;
  std::vector<Column> keys_;
  std::vector<std::uint32_t> slots_;
};

// Plain-row spill partitions for one recursion level.
class Partitions {
 public:
  Partitions(std::size_t count, std::size_t width, const HashOpConfig& cfg, MetricsCtx& metrics)
      : width_(width) {
    for (std::size_t p = 0; p < count; ++p) {
      files_.emplace_back("part", cfg.spill_dir);
      writers_.push_back(std::make_unique<RowFileWriter>(files_.back().path(), static_cast<std::uint32_t>(width),
                                                         0, &metrics));
    }
  }

  void add(std::uint64_t h, RowView row) { writers_[(h >> 32) % writers_.size()]->append(row.first(width_)); }

  void finish() {
    for (auto& w : writers_) w->finish();
    writers_.clear();
  }

  std::size_t size() const { return files_.size(); }
  const std::filesystem::path& path(std::size_t p) const { return files_[p].path(); }

 private:
  std::size_t width_;
  std::vector<TempFile> files_;
  std::vector<std::unique_ptr<RowFileWriter>> writers_;
};

class AggregateState {
 public:
  AggregateState(std::uint32_t g, const std::vector<Aggregate>& aggs, MetricsCtx& metrics)
      : g_(g), aggs_(aggs), table_(g, metrics) {}

  std::size_t groups() const { return table_.size(); }

  // False when the row's group is new and the table is full.
  bool add(RowView row, std::uint64_t h, std::size_t budget) {
    std::uint32_t e = table_.find(row.first(g_), h);
    if (e == kNoEntry) {
      if (table_.size() >= budget) return false;
      e = table_.insert(row, h);
      for (const auto& a : aggs_) acc_.push_back(a.kind == AggKind::kCount ? 1 : row[a.column]);
      return true;
    }
    std::uint64_t* acc = acc_.data() + std::size_t{e} * aggs_.size();
    for (std::size_t k = 0; k < aggs_.size(); ++k) {
      switch (aggs_[k].kind) {
        case AggKind::kCount:
          ++acc[k];
          break;
        case AggKind::kSum:
          acc[k] += row[aggs_[k].column];
          break;
        case AggKind::kMin:
          acc[k] = std::min<std::uint64_t>(acc[k], row[aggs_[k].column]);
          break;
        case AggKind::kMax:
          acc[k] = std::max<std::uint64_t>(acc[k], row[aggs_[k].column]);
          break;
      }
    }
    return true;
  }

  void emit(std::vector<Row>& out) const {
    constexpr std::uint64_t kMax32 = std::numeric_limits<Column>::max();
    for (std::uint32_t e = 0; e < table_.size(); ++e) {
      Row row(table_.key(e).begin(), table_.key(e).end());
      for (std::size_t k = 0; k < aggs_.size(); ++k) {
        row.push_back(static_cast<Column>(std::min(acc_[std::size_t{e} * aggs_.size() + k], kMax32)));
      }
      out.push_back(std::move(row));
    }
  }

 private:
  std::uint32_t g_;
  const std::vector<Aggregate>& aggs_;
  KeyTable table_;
  std::vector<std::uint64_t> acc_;
};

SortConfig fallback_sort_config(const HashOpConfig& cfg) {
  SortConfig s;
  s.memory_budget_rows = std::max<std::size_t>(cfg.memory_budget_rows, 2);
  s.spill_dir = cfg.spill_dir;
  return s;
}

void aggregate_level(RowStream& in, std::uint32_t g, const std::vector<Aggregate>& aggs, const HashOpConfig& cfg,
                     MetricsCtx& metrics, std::size_t depth, std::vector<Row>& out) {
  if (depth > cfg.max_depth) {
    // Sorted fallback: the sort's runs count as spill like any other.
    auto sorted = sort(in, KeySchema{g, Direction::kAscending}, fallback_sort_config(cfg), metrics);
    auto grouped = group_aggregate(std::move(sorted), g, aggs, metrics);
    while (grouped->next()) out.emplace_back(grouped->row().begin(), grouped->row().end());
    return;
  }
  const std::uint64_t seed = level_seed(depth);
  AggregateState state(g, aggs, metrics);
  std::unique_ptr<Partitions> spill;
  while (in.next()) {
    const RowView row = in.row();
    const std::uint64_t h = hash_key(row.first(g), seed);
    if (state.add(row, h, cfg.memory_budget_rows)) continue;
    if (!spill) spill = std::make_unique<Partitions>(cfg.partitions, in.width(), cfg, metrics);
    spill->add(h, row);
  }
  state.emit(out);
  if (!spill) return;
  spill->finish();
  for (std::size_t p = 0; p < spill->size(); ++p) {
    RowFileReader part(spill->path(p));
    aggregate_level(part, g, aggs, cfg, metrics, depth + 1, out);
  }
}

void join_in_memory(const std::vector<Row>& build, RowStream& probe, std::uint32_t j, std::uint64_t seed,
                    MetricsCtx& metrics, std::vector<Row>& out) {
  KeyTable table(j, metrics);
  std::vector<std::uint32_t> head;
  std::vector<std::uint32_t> next(build.size(), kNoEntry);
  std::vector<std::uint32_t> tail;
  for (std::uint32_t i = 0; i < build.size(); ++i) {
    const RowView key = RowView(build[i]).first(j);
    const std::uint64_t h = hash_key(key, seed);
    std::uint32_t e = table.find(key, h);
    if (e == kNoEntry) {
      e = table.insert(key, h);
      head.push_back(i);
      tail.push_back(i);
    } else {
      next[tail[e]] = i;
      tail[e] = i;
    }
  }
  while (probe.next()) {
    const RowView row = probe.row();
    const RowView key = row.first(j);
    const std::uint32_t e = table.find(key, hash_key(key, seed));
    if (e == kNoEntry) continue;
    for (std::uint32_t i = head[e]; i != kNoEntry; i = next[i]) {
      Row joined = build[i];
      joined.insert(joined.end(), row.begin() + j, row.end());
      out.push_back(std::move(joined));
    }
  }
}

void join_level(RowStream& build, RowStream& probe, std::uint32_t j, const HashOpConfig& cfg, MetricsCtx& metrics,
                std::size_t depth, std::vector<Row>& out) {
  if (depth > cfg.max_depth) {
    const KeySchema schema{j, Direction::kAscending};
    const SortConfig sc = fallback_sort_config(cfg);
    auto joined = merge_join(sort(build, schema, sc, metrics), sort(probe, schema, sc, metrics), j,
                             JoinKind::kInner, metrics);
    while (joined->next()) out.emplace_back(joined->row().begin(), joined->row().end());
    return;
  }
  const std::uint64_t seed = level_seed(depth);
  std::vector<Row> buffered;
  bool overflow = false;
  while (build.next()) {
    if (buffered.size() == cfg.memory_budget_rows) {
      overflow = true;
      break;
    }
    buffered.emplace_back(build.row().begin(), build.row().end());
  }
  if (!overflow) {
    join_in_memory(buffered, probe, j, seed, metrics, out);
    return;
  }
  // Grace partitioning: every build and probe row goes to disk once per level.
  Partitions build_parts(cfg.partitions, build.width(), cfg, metrics);
  for (const auto& row : buffered) build_parts.add(hash_key(RowView(row).first(j), seed), row);
  buffered.clear();
  buffered.shrink_to_fit();
  do {
    build_parts.add(hash_key(build.row().first(j), seed), build.row());
  } while (build.next());
  build_parts.finish();
  Partitions probe_parts(cfg.partitions, probe.width(), cfg, metrics);
  while (probe.next()) probe_parts.add(hash_key(probe.row().first(j), seed), probe.row());
  probe_parts.finish();
  for (std::size_t p = 0; p < build_parts.size(); ++p) {
    RowFileReader b(build_parts.path(p));
    RowFileReader q(probe_parts.path(p));
    join_level(b, q, j, cfg, metrics, depth + 1, out);
  }
}

}  // namespace

void HashOpConfig::validate() const {
  if (memory_budget_rows < 1) throw Error(ErrorKind::kInvalidArgument, "memory budget must be >= 1 row");
  if (partitions < 2) throw Error(ErrorKind::kInvalidArgument, "need at least two spill partitions");
}

std::uint64_t hash_key(RowView key, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (const Column v : key) h = fmix64(h ^ (v * 0x9E3779B97F4A7C15ull));
  return fmix64(h ^ key.size());
}

RowStreamPtr hash_aggregate(RowStream& in, std::uint32_t g, const std::vector<Aggregate>& aggs,
                            const HashOpConfig& cfg, MetricsCtx& metrics) {
  cfg.validate();
  if (g < 1 || g > in.width()) throw Error(ErrorKind::kInvalidArgument, "group prefix must be in [1, width]");
  for (const auto& a : aggs) {
    if (a.kind != AggKind::kCount && a.column >= in.width()) {
      throw Error(ErrorKind::kInvalidArgument, "aggregate column out of range");
    }
  }
  std::vector<Row> out;
  aggregate_level(in, g, aggs, cfg, metrics, 0, out);
  return std::make_unique<VectorRowStream>(std::move(out), g + aggs.size());
}

RowStreamPtr hash_join(RowStream& build, RowStream& probe, std::uint32_t j, const HashOpConfig& cfg,
                       MetricsCtx& metrics) {
  cfg.validate();
  if (j < 1 || j > build.width() || j > probe.width()) {
    throw Error(ErrorKind::kInvalidArgument, "join prefix must be in [1, min(width)]");
  }
  std::vector<Row> out;
  join_level(build, probe, j, cfg, metrics, 0, out);
  return std::make_unique<VectorRowStream>(std::move(out), build.width() + probe.width() - j);
}

}  // namespace ovcq
