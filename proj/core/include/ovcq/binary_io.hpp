#pragma once

// Little-endian file I/O and temp-file conventions shared by sort runs, hash
// partitions, and the table formats.
//
// Spill files go to $OVCQ_SPILL_DIR when set, else the system temp
// directory, named ovcq-<pid>-<serial>.<tag>, and are removed when their
// owning TempFile is destroyed.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <utility>

#include "ovcq/error.hpp"

namespace ovcq {

std::filesystem::path spill_directory();

class TempFile {
 public:
  TempFile() = default;
  // Reserves a fresh name under `dir` (spill_directory() when empty).
  explicit TempFile(const std::string& tag, const std::filesystem::path& dir = {});
  ~TempFile();

  TempFile(TempFile&& other) noexcept : path_(std::exchange(other.path_, {})) {}
  TempFile& operator=(TempFile&& other) noexcept;
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};

class ByteWriter {
 public:
  // Failures raise `error_kind` (kSpillIo for temp data).
  explicit ByteWriter(const std::filesystem::path& path, ErrorKind error_kind = ErrorKind::kSpillIo);

  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void u32s(std::span<const std::uint32_t> values);
  // Overwrites a u64 at an absolute position, then returns to the end.
  void patch_u64(std::uint64_t position, std::uint64_t v);

  std::uint64_t bytes_written() const { return bytes_; }
  void close();

 private:
  void write(const void* data, std::size_t n);

  // Declared first so the stdio buffer outlives the FILE that flushes into it.
  std::unique_ptr<char[]> buffer_;
  std::unique_ptr<std::FILE, FileCloser> file_;
  std::filesystem::path path_;
  ErrorKind error_kind_;
  std::uint64_t bytes_ = 0;
};

class ByteReader {
 public:
  explicit ByteReader(const std::filesystem::path& path, ErrorKind error_kind = ErrorKind::kFormatError);

  std::uint32_t u32();
  std::uint64_t u64();
  void u32s(std::span<std::uint32_t> out);
  bool at_end();

 private:
  void read(void* data, std::size_t n);

  std::unique_ptr<char[]> buffer_;
  std::unique_ptr<std::FILE, FileCloser> file_;
  std::filesystem::path path_;
  ErrorKind error_kind_;
};

// First four bytes of a file interpreted as a little-endian u32 (0 if short).
std::uint32_t peek_magic(const std::filesystem::path& path);

}  // namespace ovcq
