#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "absynth/converters.hpp"
#include "absynth/error.hpp"
#include "absynth/text.hpp"

namespace absynth {

namespace {

constexpr std::array<const char*, 5> kAggConstructors = {"Max", "Min", "Count", "Sum", "Avg"};

struct OpSpelling {
  const char* surface;
  const char* constructor;
};
constexpr std::array<OpSpelling, 4> kOps = {{
    {"=", "Equal"}, {">", "GreaterThan"}, {"<", "LessThan"}, {"OP", "Other"}}};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Case-insensitive search for a whitespace-delimited keyword.
std::size_t find_keyword(std::string_view text, std::string_view kw, std::size_t from = 0) {
  for (std::size_t i = from; i + kw.size() <= text.size(); ++i) {
    if (!iequals(text.substr(i, kw.size()), kw)) continue;
    const bool left = i == 0 || is_space(text[i - 1]);
    const bool right = i + kw.size() == text.size() || is_space(text[i + kw.size()]);
    if (left && right) return i;
  }
  return std::string_view::npos;
}

class SqlReader {
 public:
  SqlReader(const TableContext& table, const Grammar& g) : table_(table), g_(g) {}

  TreePtr read(std::string_view query) {
    std::string_view q = trim(query);
    if (!q.empty() && q.back() == ';') q = trim(q.substr(0, q.size() - 1));
    if (q.size() < 6 || !iequals(q.substr(0, 6), "SELECT") || (q.size() > 6 && !is_space(q[6]))) {
      throw Error(ErrorCode::unsupported_syntax, "query must start with SELECT");
    }
    const std::size_t from = find_keyword(q, "FROM", 6);
    if (from == std::string_view::npos) throw Error(ErrorCode::unsupported_syntax, "missing FROM");
    std::string_view select = trim(q.substr(6, from - 6));
    std::string_view rest = trim(q.substr(from + 4));

    std::string_view where_part;
    const std::size_t where = find_keyword(rest, "WHERE");
    std::string_view table_name = trim(where == std::string_view::npos ? rest : rest.substr(0, where));
    if (table_name.empty() || split_whitespace(table_name).size() != 1) {
      throw Error(ErrorCode::unsupported_syntax, "expected a single table name after FROM");
    }
    if (where != std::string_view::npos) {
      where_part = trim(rest.substr(where + 5));
      if (where_part.empty()) throw Error(ErrorCode::unsupported_syntax, "empty WHERE clause");
    }

    std::vector<FieldValue> agg;
    std::size_t column = 0;
    if (auto exact = lookup(select)) {
      column = *exact;
    } else {
      const std::size_t open = select.find('(');
      if (open == std::string_view::npos || select.back() != ')') {
        throw Error(ErrorCode::unknown_column, "unknown column '" + std::string(select) + "'");
      }
      const std::string_view fn = trim(select.substr(0, open));
      const auto it = std::find_if(kAggConstructors.begin(), kAggConstructors.end(),
                                   [&](const char* a) { return iequals(fn, a); });
      if (it == kAggConstructors.end()) {
        throw Error(ErrorCode::unsupported_syntax, "unknown aggregate '" + std::string(fn) + "'");
      }
      agg.emplace_back(node(g_, *it));
      const std::string_view inner = trim(select.substr(open + 1, select.size() - open - 2));
      auto col = lookup(inner);
      if (!col) throw Error(ErrorCode::unknown_column, "unknown column '" + std::string(inner) + "'");
      column = *col;
    }

    std::vector<FieldValue> conditions;
    std::size_t pos = 0;
    while (pos < where_part.size()) {
      conditions.emplace_back(condition(where_part, pos));
    }
    return node(g_, "Select", {std::move(agg), prim(std::to_string(column)), std::move(conditions)});
  }

 private:
  std::optional<std::size_t> lookup(std::string_view name) const {
    const auto& cols = table_.column_names();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (iequals(trim(cols[i]), name)) return i;
    }
    return std::nullopt;
  }

  // Longest column name that prefixes `text` and is followed by whitespace
  // and a comparison operator. Returns column and the offset after the op.
  struct Head {
    std::size_t column;
    const OpSpelling* op;
    std::size_t end;
  };

  std::optional<Head> head_at(std::string_view text) const {
    std::optional<Head> best;
    std::size_t best_len = 0;
    const auto& cols = table_.column_names();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::string_view name = trim(cols[i]);
      if (name.size() > text.size() || !iequals(text.substr(0, name.size()), name)) continue;
      std::size_t p = name.size();
      while (p < text.size() && is_space(text[p])) ++p;
      for (const OpSpelling& op : kOps) {
        const std::string_view s = op.surface;
        if (text.size() - p < s.size() || !iequals(text.substr(p, s.size()), s)) continue;
        // Word operators need a space after them; symbols may touch the value.
        if (std::isalpha(static_cast<unsigned char>(s[0])) &&
            (p == name.size() || (p + s.size() < text.size() && !is_space(text[p + s.size()])))) {
          continue;
        }
        if (name.size() > best_len || !best) {
          best = Head{i, &op, p + s.size()};
          best_len = name.size();
        }
        break;
      }
    }
    return best;
  }

  void unsupported_op_check(std::string_view text) const {
    // Anything that starts with a column but lacks a known operator is
    // reported as unsupported syntax rather than an unknown column.
    const auto& cols = table_.column_names();
    for (const auto& c : cols) {
      const std::string_view name = trim(c);
      if (text.size() > name.size() && iequals(text.substr(0, name.size()), name) &&
          is_space(text[name.size()])) {
        throw Error(ErrorCode::unsupported_syntax,
                    "unsupported comparison in '" + std::string(text) + "'");
      }
    }
  }

  TreePtr condition(std::string_view where, std::size_t& pos) {
    const std::string_view text = trim(where.substr(pos));
    pos = where.size() - text.size();
    auto head = head_at(text);
    if (!head) {
      unsupported_op_check(text);
      throw Error(ErrorCode::unknown_column, "no column at '" + std::string(text) + "'");
    }
    if (head->end < text.size() && std::string_view("=<>!").find(text[head->end]) != std::string_view::npos) {
      throw Error(ErrorCode::unsupported_syntax, "unsupported comparison in '" + std::string(text) + "'");
    }
    // The value runs to the next AND that starts another condition.
    std::size_t cut = text.size();
    std::size_t next = text.size();
    for (std::size_t k = find_keyword(text, "AND", head->end); k != std::string_view::npos;
         k = find_keyword(text, "AND", k + 1)) {
      const std::string_view after = trim(text.substr(k + 3));
      if (head_at(after)) {
        cut = k;
        next = text.size() - after.size();
        break;
      }
    }
    std::string raw(trim(text.substr(head->end, cut - head->end)));
    if (raw.size() >= 2 && (raw.front() == '\'' || raw.front() == '"') && raw.back() == raw.front()) {
      raw = raw.substr(1, raw.size() - 2);
    }
    auto tokens = split_whitespace(raw);
    if (tokens.empty()) throw Error(ErrorCode::unsupported_syntax, "condition without a value");
    pos += next;
    return node(g_, "Condition", {node(g_, head->op->constructor), prim(std::to_string(head->column)),
                                  PrimitiveValue{std::move(tokens)}});
  }

  const TableContext& table_;
  const Grammar& g_;
};

const AbstractTree& child_tree(const AbstractTree& t, std::size_t field, std::size_t i = 0) {
  const auto& values = t.fields.at(field).values;
  const auto* c = i < values.size() ? std::get_if<TreePtr>(&values[i]) : nullptr;
  if (!c || !*c) throw Error(ErrorCode::invalid_tree, t.constructor->name + " expects a subtree");
  return **c;
}

const PrimitiveValue& primitive(const AbstractTree& t, std::size_t field) {
  const auto& values = t.fields.at(field).values;
  const auto* p = values.size() == 1 ? std::get_if<PrimitiveValue>(&values[0]) : nullptr;
  if (!p || p->tokens.empty()) {
    throw Error(ErrorCode::invalid_tree, t.constructor->name + " expects a primitive value");
  }
  return *p;
}

std::size_t column_of(const AbstractTree& t, std::size_t field, const TableContext& table) {
  const PrimitiveValue& p = primitive(t, field);
  const std::string& tok = p.tokens.front();
  std::size_t idx = 0;
  if (p.tokens.size() != 1 || tok.empty() ||
      !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw Error(ErrorCode::invalid_tree, "column index '" + tok + "' is not a number");
  }
  try {
    idx = std::stoul(tok);
  } catch (const std::exception&) {
    throw Error(ErrorCode::column_index_out_of_range, "column index " + tok);
  }
  if (idx >= table.width()) {
    throw Error(ErrorCode::column_index_out_of_range,
                "column " + tok + " but table has " + std::to_string(table.width()) + " columns");
  }
  return idx;
}

void expect_select(const AbstractTree& t) {
  if (t.constructor->name != "Select" || t.fields.size() != 3) {
    throw Error(ErrorCode::invalid_tree, "expected a Select tree, got " + t.constructor->name);
  }
}

const char* agg_of(const AbstractTree& select) {
  const auto& values = select.fields[0].values;
  if (values.empty()) return nullptr;
  return child_tree(select, 0).constructor->name.c_str();
}

bool cell_matches(const std::string& cell, const std::string& op, const std::string& value) {
  if (op == "Other") return false;
  const auto lhs = parse_number(trim(cell));
  const auto rhs = parse_number(trim(value));
  if (op == "Equal") {
    if (lhs && rhs) return *lhs == *rhs;
    return join(split_whitespace(cell), " ") == value;
  }
  if (!lhs || !rhs) return false;
  return op == "GreaterThan" ? *lhs > *rhs : *lhs < *rhs;
}

}  // namespace

TreePtr sql_to_ast(std::string_view query, const TableContext& table, const Grammar& grammar) {
  return SqlReader(table, grammar).read(query);
}

std::string ast_to_sql(const AbstractTree& tree, const TableContext& table) {
  expect_select(tree);
  const auto& cols = table.column_names();
  std::string out = "SELECT ";
  const std::string col = cols[column_of(tree, 1, table)];
  if (const char* agg = agg_of(tree)) {
    out += to_upper(agg) + "(" + col + ")";
  } else {
    out += col;
  }
  out += " FROM Table";
  const auto& conds = tree.fields[2].values;
  for (std::size_t i = 0; i < conds.size(); ++i) {
    const AbstractTree& c = child_tree(tree, 2, i);
    if (c.constructor->name != "Condition") throw Error(ErrorCode::invalid_tree, "expected Condition");
    const std::string& op = child_tree(c, 0).constructor->name;
    const auto spelled = std::find_if(kOps.begin(), kOps.end(),
                                      [&](const OpSpelling& s) { return op == s.constructor; });
    if (spelled == kOps.end()) throw Error(ErrorCode::invalid_tree, "unknown operator " + op);
    out += i == 0 ? " WHERE " : " AND ";
    out += cols[column_of(c, 1, table)] + " " + spelled->surface + " " + join(primitive(c, 2).tokens, " ");
  }
  return out;
}

ExecutionResult execute_sql(const AbstractTree& tree, const TableContext& table) {
  expect_select(tree);
  const std::size_t column = column_of(tree, 1, table);
  struct Filter {
    std::size_t column;
    std::string op;
    std::string value;
  };
  std::vector<Filter> filters;
  for (std::size_t i = 0; i < tree.fields[2].values.size(); ++i) {
    const AbstractTree& c = child_tree(tree, 2, i);
    filters.push_back({column_of(c, 1, table), child_tree(c, 0).constructor->name,
                       join(primitive(c, 2).tokens, " ")});
  }
  std::vector<const std::vector<std::string>*> kept;
  for (const auto& row : table.rows()) {
    const bool ok = std::all_of(filters.begin(), filters.end(), [&](const Filter& f) {
      return cell_matches(row[f.column], f.op, f.value);
    });
    if (ok) kept.push_back(&row);
  }

  ExecutionResult result;
  const std::string agg = agg_of(tree) ? agg_of(tree) : "";
  if (agg.empty()) {
    for (const auto* row : kept) result.values.emplace_back((*row)[column]);
  } else if (agg == "Count") {
    result.values.emplace_back(static_cast<double>(kept.size()));
  } else {
    std::vector<double> nums;
    for (const auto* row : kept) {
      if (auto v = parse_number(trim((*row)[column]))) nums.push_back(*v);
    }
    if (!nums.empty()) {
      double v = 0;
      if (agg == "Max") {
        v = *std::max_element(nums.begin(), nums.end());
      } else if (agg == "Min") {
        v = *std::min_element(nums.begin(), nums.end());
      } else {
        for (double n : nums) v += n;
        if (agg == "Avg") v /= static_cast<double>(nums.size());
      }
      result.values.emplace_back(v);
    }
  }
  result.empty = result.values.empty();
  return result;
}

}  // namespace absynth
