#pragma once

// Sorted run files with stored codes and prefix truncation.
//
// Layout, all little-endian:
//   u32 magic "ORUN" | u32 version (1) | u32 arity | u32 direction
//   u32 payload column count | u64 row count
//   per row: u64 packed code, then key columns from the code's offset to the
//   end of the key, then every payload column, each u32.
// The first record has offset 0. A duplicate record stores no key columns.

#include <cstdint>
#include <filesystem>
#include <optional>

#include "ovcq/binary_io.hpp"
#include "ovcq/stream.hpp"

namespace ovcq {

inline constexpr std::uint32_t kRunMagic = 0x4E55524Fu;  // "ORUN"
inline constexpr std::uint32_t kRunVersion = 1;

// Handle to a run on disk. Runs created as temp files are deleted when the
// handle is destroyed.
class RunFile {
 public:
  RunFile(TempFile owned, KeySchema schema, std::size_t width, std::uint64_t rows);
  // Opens an existing run (not owned) and reads its header.
  static RunFile open(const std::filesystem::path& path);

  const std::filesystem::path& path() const { return path_; }
  const KeySchema& schema() const { return schema_; }
  std::size_t width() const { return width_; }
  std::uint64_t row_count() const { return rows_; }

 private:
  RunFile(std::filesystem::path path, KeySchema schema, std::size_t width, std::uint64_t rows);

  TempFile owned_;
  std::filesystem::path path_;
  KeySchema schema_;
  std::size_t width_;
  std::uint64_t rows_;
};

class RunWriter {
 public:
  // Spill counters go to `metrics` when given.
  RunWriter(const std::filesystem::path& path, KeySchema schema, std::size_t width,
            MetricsCtx* metrics = nullptr);

  void append(RowView row, Ovc code);
  // Patches the row count and closes the file; returns the row count.
  std::uint64_t finish();

 private:
  ByteWriter out_;
  KeySchema schema_;
  std::size_t width_;
  MetricsCtx* metrics_;
  std::uint64_t rows_ = 0;
  std::uint64_t flushed_bytes_ = 0;
};

// Writes a whole coded stream into a fresh temp run.
RunFile spill_run(CodedStream& in, const std::filesystem::path& dir, MetricsCtx& metrics);

// Writes a stream to `path` (not a temp file); returns the row count.
std::uint64_t write_run(CodedStream& in, const std::filesystem::path& path);

// Reconstructs rows by patching stored suffixes onto the previous row.
class RunReader final : public CodedStream {
 public:
  explicit RunReader(const RunFile& run);
  explicit RunReader(const std::filesystem::path& path);

  bool next() override;
  RowView row() const override { return row_; }
  Ovc code() const override { return code_; }
  std::uint64_t row_count() const { return rows_; }

 private:
  struct Header {
    KeySchema schema;
    std::size_t width;
    std::uint64_t rows;
  };
  RunReader(const std::filesystem::path& path, Header header);
  static Header read_header(ByteReader& in);
  friend class RunFile;

  ByteReader in_;
  std::uint64_t rows_;
  std::uint64_t read_ = 0;
  Row row_;
  Ovc code_;
};

}  // namespace ovcq
