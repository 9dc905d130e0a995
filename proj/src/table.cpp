#include "absynth/converters.hpp"
#include "absynth/error.hpp"
#include "absynth/text.hpp"

namespace absynth {

TableContext::TableContext(std::vector<std::string> column_names,
                           std::vector<std::vector<std::string>> rows)
    : columns_(std::move(column_names)), rows_(std::move(rows)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (trim(columns_[i]).empty()) {
      throw Error(ErrorCode::invalid_table, "column " + std::to_string(i) + " has an empty name");
    }
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() != columns_.size()) {
      throw Error(ErrorCode::invalid_table, "row " + std::to_string(r) + " has " +
                                                std::to_string(rows_[r].size()) + " cells, expected " +
                                                std::to_string(columns_.size()));
    }
  }
}

namespace {

std::string cell_text(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return format_number(j.get<double>());
  if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
  if (j.is_null()) return "";
  throw Error(ErrorCode::invalid_table, "table cells must be strings or numbers");
}

}  // namespace

TableContext table_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("columns") || !j.at("columns").is_array()) {
    throw Error(ErrorCode::invalid_table, "table needs a \"columns\" array");
  }
  std::vector<std::string> columns;
  for (const auto& c : j.at("columns")) columns.push_back(cell_text(c));
  std::vector<std::vector<std::string>> rows;
  if (j.contains("rows")) {
    if (!j.at("rows").is_array()) throw Error(ErrorCode::invalid_table, "\"rows\" must be an array");
    for (const auto& row : j.at("rows")) {
      if (!row.is_array()) throw Error(ErrorCode::invalid_table, "each row must be an array");
      std::vector<std::string> cells;
      for (const auto& c : row) cells.push_back(cell_text(c));
      rows.push_back(std::move(cells));
    }
  }
  return TableContext(std::move(columns), std::move(rows));
}

nlohmann::json table_to_json(const TableContext& table) {
  return {{"columns", table.column_names()}, {"rows", table.rows()}};
}

std::string to_string(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  return format_number(std::get<double>(cell));
}

}  // namespace absynth
