#pragma once

// Pull-based streams. A CodedStream delivers (row, code) pairs in ascending
// key order; each code is relative to the previous row (the first row carries
// encode_first). Views returned by row() stay valid until the next next().

#include <cstddef>
#include <memory>
#include <vector>

#include "ovcq/ovc.hpp"

namespace ovcq {

struct CodedRow {
  Row row;
  Ovc code;
  bool operator==(const CodedRow&) const = default;
};

class CodedStream {
 public:
  virtual ~CodedStream() = default;

  // Advances to the next row; false once exhausted.
  virtual bool next() = 0;
  virtual RowView row() const = 0;
  virtual Ovc code() const = 0;

  const KeySchema& schema() const { return schema_; }
  std::size_t width() const { return width_; }

 protected:
  CodedStream(KeySchema schema, std::size_t width) : schema_(schema), width_(width) {
    schema_.validate();
    if (width_ < schema_.arity) throw Error(ErrorKind::kInvalidArgument, "row width below key arity");
  }

 private:
  KeySchema schema_;
  std::size_t width_;
};

using StreamPtr = std::unique_ptr<CodedStream>;

// Unsorted rows without codes.
class RowStream {
 public:
  virtual ~RowStream() = default;
  virtual bool next() = 0;
  virtual RowView row() const = 0;
  std::size_t width() const { return width_; }

 protected:
  explicit RowStream(std::size_t width) : width_(width) {}

 private:
  std::size_t width_;
};

using RowStreamPtr = std::unique_ptr<RowStream>;

class VectorRowStream final : public RowStream {
 public:
  VectorRowStream(std::vector<Row> rows, std::size_t width)
      : RowStream(width), rows_(std::move(rows)) {}

  bool next() override { return ++pos_ < rows_.size(); }
  RowView row() const override { return rows_[pos_]; }

 private:
  std::vector<Row> rows_;
  std::size_t pos_ = static_cast<std::size_t>(-1);
};

// Replays materialized (row, code) pairs verbatim.
class VectorCodedStream final : public CodedStream {
 public:
  VectorCodedStream(std::vector<CodedRow> rows, KeySchema schema, std::size_t width)
      : CodedStream(schema, width), rows_(std::move(rows)) {}

  bool next() override { return ++pos_ < rows_.size(); }
  RowView row() const override { return rows_[pos_].row; }
  Ovc code() const override { return rows_[pos_].code; }

 private:
  std::vector<CodedRow> rows_;
  std::size_t pos_ = static_cast<std::size_t>(-1);
};

std::vector<CodedRow> materialize(CodedStream& stream);
std::vector<Row> drain(RowStream& stream);

}  // namespace ovcq
