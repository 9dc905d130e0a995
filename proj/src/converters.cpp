#include "absynth/converters.hpp"
#include "absynth/error.hpp"
#include "absynth/text.hpp"

namespace absynth {

MrFormat parse_format(std::string_view name) {
  const std::string n = to_lower(name);
  if (n == "lambda") return MrFormat::lambda;
  if (n == "sql") return MrFormat::sql;
  if (n == "pyexpr" || n == "python") return MrFormat::pyexpr;
  throw Error(ErrorCode::parse_error, "unknown format '" + std::string(name) + "'");
}

std::string_view to_string(MrFormat format) {
  switch (format) {
    case MrFormat::lambda: return "lambda";
    case MrFormat::sql: return "sql";
    case MrFormat::pyexpr: return "pyexpr";
  }
  return "?";
}

TreePtr mr_to_ast(MrFormat format, std::string_view text, const Grammar& grammar,
                  const TableContext* table) {
  switch (format) {
    case MrFormat::lambda: return lambda_to_ast(text, grammar);
    case MrFormat::pyexpr: return pyexpr_to_ast(text, grammar);
    case MrFormat::sql:
      if (!table) throw Error(ErrorCode::missing_table, "SQL needs a table");
      return sql_to_ast(text, *table, grammar);
  }
  throw Error(ErrorCode::parse_error, "bad format");
}

std::string ast_to_mr(MrFormat format, const AbstractTree& tree, const TableContext* table) {
  switch (format) {
    case MrFormat::lambda: return ast_to_lambda(tree);
    case MrFormat::pyexpr: return ast_to_pyexpr(tree);
    case MrFormat::sql:
      if (!table) throw Error(ErrorCode::missing_table, "SQL needs a table");
      return ast_to_sql(tree, *table);
  }
  throw Error(ErrorCode::parse_error, "bad format");
}

}  // namespace absynth
