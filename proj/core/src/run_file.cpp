#include "ovcq/run_file.hpp"

#include <vector>

namespace ovcq {

namespace {

constexpr std::uint64_t kHeaderBytes = 4 * 5 + 8;
constexpr std::uint64_t kRowCountPosition = 4 * 5;

}  // namespace

RunFile::RunFile(TempFile owned, KeySchema schema, std::size_t width, std::uint64_t rows)
    : owned_(std::move(owned)), path_(owned_.path()), schema_(schema), width_(width), rows_(rows) {}

RunFile::RunFile(std::filesystem::path path, KeySchema schema, std::size_t width, std::uint64_t rows)
    : path_(std::move(path)), schema_(schema), width_(width), rows_(rows) {}

RunFile RunFile::open(const std::filesystem::path& path) {
  ByteReader in(path);
  const auto h = RunReader::read_header(in);
  return RunFile(path, h.schema, h.width, h.rows);
}

RunWriter::RunWriter(const std::filesystem::path& path, KeySchema schema, std::size_t width,
                     MetricsCtx* metrics)
    : out_(path), schema_(schema), width_(width), metrics_(metrics) {
  schema_.validate();
  if (width_ < schema_.arity) throw Error(ErrorKind::kInvalidArgument, "row width below key arity");
  out_.u32(kRunMagic);
  out_.u32(kRunVersion);
  out_.u32(schema_.arity);
  out_.u32(static_cast<std::uint32_t>(schema_.direction));
  out_.u32(static_cast<std::uint32_t>(width_ - schema_.arity));
  out_.u64(0);
}

void RunWriter::append(RowView row, Ovc code) {
  if (!code.is_current()) throw Error(ErrorKind::kFenceInput, "runs store current-run codes only");
  const std::uint32_t offset = offset_of(code, schema_);
  if (rows_ == 0 && offset != 0) {
    throw Error(ErrorKind::kInvalidArgument, "first run record must have offset 0");
  }
  out_.u64(code.raw());
  if (offset < schema_.arity) out_.u32s(row.subspan(offset, schema_.arity - offset));
  out_.u32s(row.subspan(schema_.arity, width_ - schema_.arity));
  ++rows_;
  if (metrics_ != nullptr) {
    ++metrics_->rows_spilled;
    metrics_->bytes_spilled += out_.bytes_written() - flushed_bytes_;
    flushed_bytes_ = out_.bytes_written();
  }
}

std::uint64_t RunWriter::finish() {
  out_.patch_u64(kRowCountPosition, rows_);
  out_.close();
  if (metrics_ != nullptr) metrics_->bytes_spilled += out_.bytes_written() - flushed_bytes_;
  flushed_bytes_ = out_.bytes_written();
  return rows_;
}

RunFile spill_run(CodedStream& in, const std::filesystem::path& dir, MetricsCtx& metrics) {
  TempFile file("run", dir);
  RunWriter writer(file.path(), in.schema(), in.width(), &metrics);
  while (in.next()) writer.append(in.row(), in.code());
  const auto rows = writer.finish();
  return RunFile(std::move(file), in.schema(), in.width(), rows);
}

std::uint64_t write_run(CodedStream& in, const std::filesystem::path& path) {
  RunWriter writer(path, in.schema(), in.width());
  while (in.next()) writer.append(in.row(), in.code());
  return writer.finish();
}

RunReader::Header RunReader::read_header(ByteReader& in) {
  if (in.u32() != kRunMagic) throw Error(ErrorKind::kFormatError, "not a run file");
  if (in.u32() != kRunVersion) throw Error(ErrorKind::kFormatError, "unsupported run file version");
  Header h;
  h.schema.arity = in.u32();
  const auto dir = in.u32();
  if (dir > 1) throw Error(ErrorKind::kFormatError, "bad direction in run header");
  h.schema.direction = static_cast<Direction>(dir);
  if (h.schema.arity < 1 || h.schema.arity > kMaxArity) {
    throw Error(ErrorKind::kFormatError, "bad arity in run header");
  }
  h.width = h.schema.arity + std::size_t{in.u32()};
  h.rows = in.u64();
  return h;
}

RunReader::RunReader(const RunFile& run)
    : RunReader(run.path(), Header{run.schema(), run.width(), run.row_count()}) {}

RunReader::RunReader(const std::filesystem::path& path)
    : RunReader(path, [&] {
        ByteReader in(path);
        return read_header(in);
      }()) {}

RunReader::RunReader(const std::filesystem::path& path, Header header)
    : CodedStream(header.schema, header.width), in_(path), rows_(header.rows), row_(header.width) {
  read_header(in_);
}

bool RunReader::next() {
  if (read_ == rows_) return false;
  code_ = Ovc::from_raw(in_.u64());
  if (!code_.is_current()) throw Error(ErrorKind::kFormatError, "run record without a valid code");
  const auto& s = schema();
  const std::uint32_t offset = offset_of(code_, s);
  if (offset > s.arity || (read_ == 0 && offset != 0)) {
    throw Error(ErrorKind::kFormatError, "bad offset in run record " + std::to_string(read_));
  }
  std::span<Column> cols(row_);
  if (offset < s.arity) {
    in_.u32s(cols.subspan(offset, s.arity - offset));
    if (row_[offset] != value_of(code_, s)) {
      throw Error(ErrorKind::kFormatError, "code value disagrees with stored column");
    }
  }
  in_.u32s(cols.subspan(s.arity));
  ++read_;
  return true;
}

}  // namespace ovcq
