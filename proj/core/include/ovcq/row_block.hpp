#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "ovcq/ovc.hpp"

namespace ovcq {

// Fixed-width rows stored back to back.
class RowBlock {
 public:
  explicit RowBlock(std::size_t width = 1) : width_(width) {}

  std::size_t width() const { return width_; }
  std::size_t size() const { return width_ == 0 ? 0 : data_.size() / width_; }
  bool empty() const { return data_.empty(); }

  void reserve(std::size_t rows) { data_.reserve(rows * width_); }
  void clear() { data_.clear(); }

  void push_back(RowView row) { data_.insert(data_.end(), row.begin(), row.begin() + width_); }
  void assign(std::size_t i, RowView row) {
    std::copy(row.begin(), row.begin() + width_, data_.begin() + i * width_);
  }

  RowView operator[](std::size_t i) const { return {data_.data() + i * width_, width_}; }
  std::span<Column> mutable_row(std::size_t i) { return {data_.data() + i * width_, width_}; }

 private:
  std::size_t width_;
  std::vector<Column> data_;
};

}  // namespace ovcq
