#ifndef ABSYNTH_CONVERTERS_HPP_
#define ABSYNTH_CONVERTERS_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "absynth/ast.hpp"
#include "absynth/grammar.hpp"

namespace absynth {

// A single table: every row has one cell per column.
class TableContext {
 public:
  TableContext() = default;
  TableContext(std::vector<std::string> column_names, std::vector<std::vector<std::string>> rows);

  const std::vector<std::string>& column_names() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t width() const { return columns_.size(); }

  friend bool operator==(const TableContext&, const TableContext&) = default;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// {"columns": [...], "rows": [[...], ...]}. Numeric cells become their
// shortest decimal text.
TableContext table_from_json(const nlohmann::json& j);
nlohmann::json table_to_json(const TableContext& table);

using Cell = std::variant<std::string, double>;

struct ExecutionResult {
  std::vector<Cell> values;
  bool empty = true;

  friend bool operator==(const ExecutionResult& a, const ExecutionResult& b) {
    return a.values == b.values;
  }
};

std::string to_string(const Cell& cell);

// --- lambda calculus -------------------------------------------------------

TreePtr lambda_to_ast(std::string_view text, const Grammar& grammar);
std::string ast_to_lambda(const AbstractTree& tree);
// Whitespace and outer-parenthesis normalization, without parsing forms.
std::string canonicalize_lambda(std::string_view text);

// --- SQL -------------------------------------------------------------------

TreePtr sql_to_ast(std::string_view query, const TableContext& table, const Grammar& grammar);
std::string ast_to_sql(const AbstractTree& tree, const TableContext& table);
ExecutionResult execute_sql(const AbstractTree& tree, const TableContext& table);

// --- mini Python -----------------------------------------------------------

TreePtr pyexpr_to_ast(std::string_view code, const Grammar& grammar);
std::string ast_to_pyexpr(const AbstractTree& tree);

// --- dispatch ----------------------------------------------------------------

enum class MrFormat { lambda, sql, pyexpr };

MrFormat parse_format(std::string_view name);
std::string_view to_string(MrFormat format);

TreePtr mr_to_ast(MrFormat format, std::string_view text, const Grammar& grammar,
                  const TableContext* table = nullptr);
std::string ast_to_mr(MrFormat format, const AbstractTree& tree,
                      const TableContext* table = nullptr);

}  // namespace absynth

#endif  // ABSYNTH_CONVERTERS_HPP_
