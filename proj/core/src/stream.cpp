#include "ovcq/stream.hpp"

namespace ovcq {

std::vector<CodedRow> materialize(CodedStream& stream) {
  std::vector<CodedRow> out;
  while (stream.next()) {
    const RowView r = stream.row();
    out.push_back(CodedRow{Row(r.begin(), r.end()), stream.code()});
  }
  return out;
}

std::vector<Row> drain(RowStream& stream) {
  std::vector<Row> out;
  while (stream.next()) {
    const RowView r = stream.row();
    out.emplace_back(r.begin(), r.end());
  }
  return out;
}

}  // namespace ovcq
