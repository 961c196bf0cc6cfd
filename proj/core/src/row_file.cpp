#include "ovcq/row_file.hpp"

namespace ovcq {

namespace {

constexpr std::uint64_t kRowCountPosition = 12;

}  // namespace

RowFileWriter::RowFileWriter(const std::filesystem::path& path, std::uint32_t key_cols,
                             std::uint32_t payload_cols, MetricsCtx* metrics, ErrorKind error_kind)
    : out_(path, error_kind), width_(std::size_t{key_cols} + payload_cols), metrics_(metrics) {
  out_.u32(kRowFileMagic);
  out_.u32(key_cols);
  out_.u32(payload_cols);
  out_.u64(0);
}

void RowFileWriter::append(RowView row) {
  out_.u32s(row.first(width_));
  ++rows_;
  if (metrics_ != nullptr) {
    ++metrics_->rows_spilled;
    metrics_->bytes_spilled += out_.bytes_written() - flushed_bytes_;
    flushed_bytes_ = out_.bytes_written();
  }
}

std::uint64_t RowFileWriter::finish() {
  out_.patch_u64(kRowCountPosition, rows_);
  out_.close();
  if (metrics_ != nullptr) metrics_->bytes_spilled += out_.bytes_written() - flushed_bytes_;
  flushed_bytes_ = out_.bytes_written();
  return rows_;
}

RowFileReader::RowFileReader(const std::filesystem::path& path)
    : RowFileReader(path, [&] {
        ByteReader in(path);
        if (in.u32() != kRowFileMagic) throw Error(ErrorKind::kFormatError, "not a row file");
        Header h;
        h.key_cols = in.u32();
        h.payload_cols = in.u32();
        h.rows = in.u64();
        if (h.key_cols < 1) throw Error(ErrorKind::kFormatError, "row file without key columns");
        return h;
      }()) {}

RowFileReader::RowFileReader(const std::filesystem::path& path, Header h)
    : RowStream(std::size_t{h.key_cols} + h.payload_cols),
      in_(path),
      key_cols_(h.key_cols),
      payload_cols_(h.payload_cols),
      rows_(h.rows),
      row_(width()) {
  in_.u32();
  in_.u32();
  in_.u32();
  in_.u64();
}

bool RowFileReader::next() {
  if (read_ == rows_) return false;
  in_.u32s(row_);
  ++read_;
  return true;
}

void write_row_file(const std::filesystem::path& path, const RowTable& table) {
  RowFileWriter w(path, table.key_cols, table.payload_cols, nullptr, ErrorKind::kFormatError);
  for (const auto& r : table.rows) {
    if (r.size() != table.width()) throw Error(ErrorKind::kInvalidArgument, "row width mismatch");
    w.append(r);
  }
  w.finish();
}

RowTable read_row_file(const std::filesystem::path& path) {
  RowFileReader in(path);
  RowTable t;
  t.key_cols = in.key_cols();
  t.payload_cols = in.payload_cols();
  t.rows = drain(in);
  return t;
}

}  // namespace ovcq
