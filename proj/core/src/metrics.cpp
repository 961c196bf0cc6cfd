#include "ovcq/metrics.hpp"

#include <nlohmann/json.hpp>

#include "ovcq/error.hpp"

namespace ovcq {

std::string MetricsCtx::to_json() const {
  nlohmann::ordered_json j;
  j["row_comparisons"] = row_comparisons;
  j["column_comparisons"] = column_comparisons;
  j["code_decisions"] = code_decisions;
  j["rows_spilled"] = rows_spilled;
  j["bytes_spilled"] = bytes_spilled;
  return j.dump();
}

MetricsCtx MetricsCtx::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetricsCtx m;
    m.row_comparisons = j.at("row_comparisons").get<std::uint64_t>();
    m.column_comparisons = j.at("column_comparisons").get<std::uint64_t>();
    m.code_decisions = j.at("code_decisions").get<std::uint64_t>();
    m.rows_spilled = j.at("rows_spilled").get<std::uint64_t>();
    m.bytes_spilled = j.at("bytes_spilled").get<std::uint64_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormatError, e.what());
  }
}

}  // namespace ovcq
