#pragma once

// Plain row files for unsorted data and hash-partition spills.
//
// Layout, all little-endian:
//   u32 magic "OROW" | u32 key column count | u32 payload column count
//   u64 row count | rows, row-major, each column u32

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ovcq/binary_io.hpp"
#include "ovcq/stream.hpp"

namespace ovcq {

inline constexpr std::uint32_t kRowFileMagic = 0x574F524Fu;  // "OROW"

struct RowTable {
  std::uint32_t key_cols = 1;
  std::uint32_t payload_cols = 0;
  std::vector<Row> rows;

  std::size_t width() const { return std::size_t{key_cols} + payload_cols; }
};

class RowFileWriter {
 public:
  RowFileWriter(const std::filesystem::path& path, std::uint32_t key_cols, std::uint32_t payload_cols,
                MetricsCtx* metrics = nullptr, ErrorKind error_kind = ErrorKind::kSpillIo);

  void append(RowView row);
  std::uint64_t finish();
  std::uint64_t rows() const { return rows_; }

 private:
  ByteWriter out_;
  std::size_t width_;
  MetricsCtx* metrics_;
  std::uint64_t rows_ = 0;
  std::uint64_t flushed_bytes_ = 0;
};

class RowFileReader final : public RowStream {
 public:
  explicit RowFileReader(const std::filesystem::path& path);

  bool next() override;
  RowView row() const override { return row_; }

  std::uint32_t key_cols() const { return key_cols_; }
  std::uint32_t payload_cols() const { return payload_cols_; }
  std::uint64_t row_count() const { return rows_; }

 private:
  struct Header {
    std::uint32_t key_cols;
    std::uint32_t payload_cols;
    std::uint64_t rows;
  };
  RowFileReader(const std::filesystem::path& path, Header h);

  ByteReader in_;
  std::uint32_t key_cols_;
  std::uint32_t payload_cols_;
  std::uint64_t rows_;
  std::uint64_t read_ = 0;
  Row row_;
};

void write_row_file(const std::filesystem::path& path, const RowTable& table);
RowTable read_row_file(const std::filesystem::path& path);

}  // namespace ovcq
