#include "ovcq/binary_io.hpp"

#include <atomic>
#include <bit>
#include <cstdlib>
#include <cstring>
#include <system_error>
#include <vector>

#include <unistd.h>

namespace ovcq {

namespace {

constexpr std::size_t kBufferBytes = 1 << 16;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    T out = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) out = (out << 8) | ((v >> (8 * i)) & 0xFF);
    return out;
  }
}

std::atomic<std::uint64_t> g_serial{0};

}  // namespace

std::filesystem::path spill_directory() {
  if (const char* dir = std::getenv("OVCQ_SPILL_DIR"); dir != nullptr && *dir != '\0') {
    return dir;
  }
  return std::filesystem::temp_directory_path();
}

TempFile::TempFile(const std::string& tag, const std::filesystem::path& dir) {
  const auto base = dir.empty() ? spill_directory() : dir;
  std::error_code ec;
  std::filesystem::create_directories(base, ec);
  if (ec) throw Error(ErrorKind::kSpillIo, "cannot create spill directory " + base.string());
  path_ = base / ("ovcq-" + std::to_string(::getpid()) + "-" + std::to_string(g_serial++) + "." + tag);
}

TempFile::~TempFile() {
  if (!path_.empty()) {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
}

TempFile& TempFile::operator=(TempFile&& other) noexcept {
  if (this != &other) {
    if (!path_.empty()) {
      std::error_code ec;
      std::filesystem::remove(path_, ec);
    }
    path_ = std::exchange(other.path_, {});
  }
  return *this;
}

ByteWriter::ByteWriter(const std::filesystem::path& path, ErrorKind error_kind)
    : buffer_(new char[kBufferBytes]), file_(std::fopen(path.c_str(), "wb")), path_(path),
      error_kind_(error_kind) {
  if (!file_) throw Error(error_kind_, "cannot open " + path.string() + " for writing");
  std::setvbuf(file_.get(), buffer_.get(), _IOFBF, kBufferBytes);
}

void ByteWriter::write(const void* data, std::size_t n) {
  if (!file_) throw Error(error_kind_, "write after close: " + path_.string());
  if (std::fwrite(data, 1, n, file_.get()) != n) {
    throw Error(error_kind_, "short write to " + path_.string());
  }
  bytes_ += n;
}

void ByteWriter::u32(std::uint32_t v) {
  v = to_little(v);
  write(&v, sizeof v);
}

void ByteWriter::u64(std::uint64_t v) {
  v = to_little(v);
  write(&v, sizeof v);
}

void ByteWriter::u32s(std::span<const std::uint32_t> values) {
  if constexpr (std::endian::native == std::endian::little) {
    write(values.data(), values.size_bytes());
  } else {
    for (auto v : values) u32(v);
  }
}

void ByteWriter::patch_u64(std::uint64_t position, std::uint64_t v) {
  v = to_little(v);
  if (std::fseek(file_.get(), static_cast<long>(position), SEEK_SET) != 0 ||
      std::fwrite(&v, 1, sizeof v, file_.get()) != sizeof v ||
      std::fseek(file_.get(), 0, SEEK_END) != 0) {
    throw Error(error_kind_, "cannot patch " + path_.string());
  }
}

void ByteWriter::close() {
  if (file_) {
    std::FILE* f = file_.release();
    if (std::fclose(f) != 0) throw Error(error_kind_, "close failed: " + path_.string());
  }
}

ByteReader::ByteReader(const std::filesystem::path& path, ErrorKind error_kind)
    : buffer_(new char[kBufferBytes]), file_(std::fopen(path.c_str(), "rb")), path_(path),
      error_kind_(error_kind) {
  if (!file_) throw Error(error_kind_, "cannot open " + path.string());
  std::setvbuf(file_.get(), buffer_.get(), _IOFBF, kBufferBytes);
}

void ByteReader::read(void* data, std::size_t n) {
  if (std::fread(data, 1, n, file_.get()) != n) {
    throw Error(error_kind_, "truncated file " + path_.string());
  }
}

std::uint32_t ByteReader::u32() {
  std::uint32_t v;
  read(&v, sizeof v);
  return to_little(v);
}

std::uint64_t ByteReader::u64() {
  std::uint64_t v;
  read(&v, sizeof v);
  return to_little(v);
}

void ByteReader::u32s(std::span<std::uint32_t> out) {
  read(out.data(), out.size_bytes());
  if constexpr (std::endian::native != std::endian::little) {
    for (auto& v : out) v = to_little(v);
  }
}

bool ByteReader::at_end() {
  const int c = std::fgetc(file_.get());
  if (c == EOF) return true;
  std::ungetc(c, file_.get());
  return false;
}

std::uint32_t peek_magic(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "rb"));
  if (!f) throw Error(ErrorKind::kFormatError, "cannot open " + path.string());
  unsigned char b[4];
  if (std::fread(b, 1, 4, f.get()) != 4) return 0;
  return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
         (std::uint32_t{b[3]} << 24);
}

}  // namespace ovcq
