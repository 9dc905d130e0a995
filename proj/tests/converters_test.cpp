#include <gtest/gtest.h>

#include <fstream>
#include <functional>

#include <json.hpp>

#include "absynth/converters.hpp"
#include "absynth/error.hpp"
#include "absynth/text.hpp"
#include "test_util.hpp"

namespace absynth {
namespace {

using testing::grammar;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::io_error;
}

std::vector<std::string> lambda_corpus() {
  std::ifstream in(std::string(ABSYNTH_TEST_DATA_DIR) + "/lambda_forms.txt");
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!trim(line).empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

nlohmann::json sql_tables() {
  return nlohmann::json::parse(testing::read_file(std::string(ABSYNTH_TEST_DATA_DIR) + "/sql_tables.json"));
}

TableContext players() { return table_from_json(sql_tables().at("players")); }

// ---------------------------------------------------------------- lambda

TEST(LambdaTest, TypedGeoExample) {
  auto g = grammar("lambda");
  auto t = lambda_to_ast("lambda $0 e (and (state $0) (next_to $0 texas:s))", *g);
  auto var = [&](const char* v) { return node(*g, "Variable", {prim(v)}); };
  auto expected = node(*g, "Lambda", {prim("$0"), prim("e"),
      node(*g, "And", {std::vector<FieldValue>{
          node(*g, "Apply", {prim("state"), std::vector<FieldValue>{var("$0")}}),
          node(*g, "Apply", {prim("next_to"), std::vector<FieldValue>{
              var("$0"), node(*g, "Entity", {prim("texas:s")})}})}})});
  EXPECT_TRUE(trees_equal(*t, *expected)) << to_sexpr(*t);
  EXPECT_EQ(ast_to_lambda(*t), "lambda $0 e (and (state $0) (next_to $0 texas:s))");
}

TEST(LambdaTest, CompareOfVariables) {
  auto g = grammar("lambda");
  auto t = lambda_to_ast("(= x y)", *g);
  EXPECT_EQ(to_sexpr(*t),
            "(Compare op:(Equal) left:(Variable variable:\"x\") right:(Variable variable:\"y\"))");
}

TEST(LambdaTest, LeafRendering) {
  auto g = grammar("lambda");
  EXPECT_EQ(ast_to_lambda(*node(*g, "Number", {prim("2")})), "2");
  EXPECT_EQ(to_sexpr(*lambda_to_ast("2", *g)), "(Number number:\"2\")");
}

TEST(LambdaTest, Errors) {
  auto g = grammar("lambda");
  EXPECT_EQ(code_of([&] { lambda_to_ast("(and (state x)", *g); }), ErrorCode::unbalanced_parens);
  EXPECT_EQ(code_of([&] { lambda_to_ast("(state x))", *g); }), ErrorCode::unbalanced_parens);
  EXPECT_EQ(code_of([&] { lambda_to_ast("lambda x (state x)", *g); }), ErrorCode::unknown_form);
  EXPECT_EQ(code_of([&] { lambda_to_ast("(not a b)", *g); }), ErrorCode::unknown_form);
  EXPECT_EQ(code_of([&] { lambda_to_ast("(= a)", *g); }), ErrorCode::unknown_form);
  EXPECT_EQ(code_of([&] { lambda_to_ast("(count (x) y)", *g); }), ErrorCode::unknown_form);
  EXPECT_EQ(code_of([&] { lambda_to_ast("()", *g); }), ErrorCode::unknown_form);
  // A predicate named like a special form cannot be written back.
  auto bad = node(*g, "Apply", {prim("and"), std::vector<FieldValue>{}});
  EXPECT_EQ(code_of([&] { ast_to_lambda(*bad); }), ErrorCode::invalid_tree);
  EXPECT_EQ(code_of([&] { ast_to_lambda(*node(*g, "Number", {prim("abc")})); }), ErrorCode::invalid_tree);
}

TEST(LambdaTest, HandCorpusRoundTrip) {
  auto g = grammar("lambda");
  const auto forms = lambda_corpus();
  ASSERT_EQ(forms.size(), 50u);
  for (const std::string& s : forms) {
    auto t = lambda_to_ast(s, *g);
    EXPECT_TRUE(validate_ast(*g, *t).empty()) << s;
    EXPECT_EQ(ast_to_lambda(*t), canonicalize_lambda(s)) << s;
  }
}

TEST(LambdaTest, RandomTreesRoundTrip) {
  auto g = grammar("lambda");
  RandomAstOptions opts;
  opts.type_pools = testing::lambda_pools();
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    opts.seed = seed;
    auto t = random_ast(*g, opts);
    const std::string text = ast_to_lambda(*t);
    auto back = lambda_to_ast(text, *g);
    ASSERT_TRUE(trees_equal(*t, *back)) << seed << ": " << text;
  }
}

TEST(LambdaTest, Canonicalize) {
  EXPECT_EQ(canonicalize_lambda("  ( lambda  $0 e ( state $0 ) ) "), "lambda $0 e (state $0)");
  EXPECT_EQ(canonicalize_lambda("(f)"), "(f)");
  EXPECT_EQ(canonicalize_lambda("x"), "x");
}

// ---------------------------------------------------------------- tables

TEST(TableTest, JsonRoundTripAndValidation) {
  TableContext t = players();
  EXPECT_EQ(t.width(), 6u);
  EXPECT_EQ(t.rows()[2][1], "25");
  EXPECT_EQ(table_from_json(table_to_json(t)), t);
  EXPECT_EQ(code_of([] { TableContext({"a", ""}, {}); }), ErrorCode::invalid_table);
  EXPECT_EQ(code_of([] { TableContext({"a", "b"}, {{"1"}}); }), ErrorCode::invalid_table);
  EXPECT_EQ(code_of([] { table_from_json(nlohmann::json::parse(R"({"rows": []})")); }),
            ErrorCode::invalid_table);
}

// ---------------------------------------------------------------- SQL

TEST(SqlTest, PositionOfCalvinMccarty) {
  auto g = grammar("wikisql");
  TableContext table = players();
  auto t = sql_to_ast("SELECT Position FROM Table WHERE Player = Calvin Mccarty", table, *g);
  auto expected = node(*g, "Select", {std::vector<FieldValue>{}, prim("3"),
      std::vector<FieldValue>{node(*g, "Condition", {node(*g, "Equal"), prim("0"), prim("Calvin Mccarty")})}});
  EXPECT_TRUE(trees_equal(*t, *expected)) << to_sexpr(*t);
  EXPECT_EQ(ast_to_sql(*t, table), "SELECT Position FROM Table WHERE Player = Calvin Mccarty");

  ExecutionResult r = execute_sql(*t, table);
  EXPECT_FALSE(r.empty);
  EXPECT_EQ(r.values, std::vector<Cell>{std::string("Running back")});
}

TEST(SqlTest, CountWithoutWhere) {
  auto g = grammar("wikisql");
  TableContext small({"Player", "No.", "Position"}, {{"a", "1", "G"}});
  auto t = sql_to_ast("SELECT COUNT(Player) FROM Table", small, *g);
  EXPECT_EQ(to_sexpr(*t), "(Select agg:(Count) column_idx:\"0\" conditions:[])");
  EXPECT_EQ(ast_to_sql(*node(*g, "Select", {std::vector<FieldValue>{node(*g, "Count")}, prim("0"),
                                            std::vector<FieldValue>{}}),
                       small),
            "SELECT COUNT(Player) FROM Table");
}

TEST(SqlTest, Execution) {
  auto g = grammar("wikisql");
  TableContext table = players();
  auto run = [&](const char* q) { return execute_sql(*sql_to_ast(q, table, *g), table); };

  ExecutionResult none = run("SELECT COUNT(Player) FROM Table WHERE Player = Nobody");
  EXPECT_FALSE(none.empty);
  EXPECT_EQ(none.values, std::vector<Cell>{0.0});

  EXPECT_TRUE(run("SELECT Player FROM Table WHERE Player = Nobody").empty);
  EXPECT_EQ(run("SELECT MAX(No.) FROM Table").values, std::vector<Cell>{25.0});
  EXPECT_EQ(run("SELECT MIN(No.) FROM Table").values, std::vector<Cell>{2.0});
  EXPECT_EQ(run("SELECT SUM(No.) FROM Table").values, std::vector<Cell>{48.0});
  EXPECT_EQ(run("SELECT AVG(No.) FROM Table").values, std::vector<Cell>{16.0});
  EXPECT_EQ(run("SELECT COUNT(Player) FROM Table WHERE No. > 5").values, std::vector<Cell>{2.0});
  EXPECT_EQ(run("SELECT Player FROM Table WHERE No. < 5").values,
            std::vector<Cell>{std::string("Voshon Lenard")});
  // Non-numeric operands never satisfy an ordering comparison.
  EXPECT_TRUE(run("SELECT Player FROM Table WHERE Position > 5").empty);
  EXPECT_TRUE(run("SELECT Player FROM Table WHERE Player OP Antonio Lang").empty);
  // Numeric aggregate over text cells has nothing to aggregate.
  EXPECT_TRUE(run("SELECT MAX(Player) FROM Table").empty);
  EXPECT_EQ(run("SELECT Player FROM Table WHERE No. = 25.0").values,
            std::vector<Cell>{std::string("Calvin Mccarty")});

  auto t = sql_to_ast("SELECT Player FROM Table WHERE Nationality = United States", table, *g);
  EXPECT_EQ(execute_sql(*t, table), execute_sql(*t, table));
  EXPECT_EQ(execute_sql(*t, table).values.size(), 3u);
}

TEST(SqlTest, Errors) {
  auto g = grammar("wikisql");
  TableContext table = players();
  EXPECT_EQ(code_of([&] { sql_to_ast("SELECT Height FROM Table", table, *g); }), ErrorCode::unknown_column);
  EXPECT_EQ(code_of([&] { sql_to_ast("SELECT Player FROM Table WHERE Weight = 3", table, *g); }),
            ErrorCode::unknown_column);
  EXPECT_EQ(code_of([&] { sql_to_ast("SELECT Player FROM Table WHERE No. >= 3", table, *g); }),
            ErrorCode::unsupported_syntax);
  EXPECT_EQ(code_of([&] { sql_to_ast("SELECT Player FROM Table WHERE No. LIKE 3", table, *g); }),
            ErrorCode::unsupported_syntax);
  EXPECT_EQ(code_of([&] { sql_to_ast("SELECT MEDIAN(No.) FROM Table", table, *g); }),
            ErrorCode::unsupported_syntax);
  EXPECT_EQ(code_of([&] { sql_to_ast("SELECT Player", table, *g); }), ErrorCode::unsupported_syntax);
  EXPECT_EQ(code_of([&] { sql_to_ast("DELETE FROM Table", table, *g); }), ErrorCode::unsupported_syntax);
  EXPECT_EQ(code_of([&] { sql_to_ast("SELECT Player FROM Table WHERE No. =", table, *g); }),
            ErrorCode::unsupported_syntax);

  auto wide = node(*g, "Select", {std::vector<FieldValue>{}, prim("6"), std::vector<FieldValue>{}});
  EXPECT_EQ(code_of([&] { ast_to_sql(*wide, table); }), ErrorCode::column_index_out_of_range);
  EXPECT_EQ(code_of([&] { execute_sql(*wide, table); }), ErrorCode::column_index_out_of_range);
}

TEST(SqlTest, HandCorpus) {
  auto g = grammar("wikisql");
  const auto tables = sql_tables();
  std::ifstream in(std::string(ABSYNTH_TEST_DATA_DIR) + "/sql_forms.jsonl");
  int n = 0;
  for (std::string line; std::getline(in, line);) {
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line);
    TableContext table = table_from_json(tables.at(j.at("table").get<std::string>()));
    const std::string q = j.at("query");
    auto t = sql_to_ast(q, table, *g);
    EXPECT_TRUE(validate_ast(*g, *t).empty()) << q;
    EXPECT_EQ(ast_to_sql(*t, table), j.at("canonical").get<std::string>()) << q;
    EXPECT_TRUE(trees_equal(*t, *sql_to_ast(ast_to_sql(*t, table), table, *g))) << q;
    ++n;
  }
  EXPECT_EQ(n, 50);
}

TEST(SqlTest, RandomTreesRoundTrip) {
  auto g = grammar("wikisql");
  const auto tables = sql_tables();
  std::vector<TableContext> all;
  for (const auto& [name, j] : tables.items()) all.push_back(table_from_json(j));
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const TableContext& table = all[seed % all.size()];
    RandomAstOptions opts;
    opts.seed = seed;
    opts.type_pools = testing::sql_pools(table.width());
    auto t = random_ast(*g, opts);
    const std::string q = ast_to_sql(*t, table);
    auto back = sql_to_ast(q, table, *g);
    ASSERT_TRUE(trees_equal(*t, *back)) << seed << ": " << q << "\n" << to_sexpr(*t);
  }
}

// ---------------------------------------------------------------- Python

TEST(PyexprTest, ReadCsv) {
  auto g = grammar("pyexpr");
  auto t = pyexpr_to_ast("pandas.read_csv('file.csv', nrows=1000)", *g);
  EXPECT_TRUE(trees_equal(*t, *testing::read_csv_tree(*g))) << to_sexpr(*t);
  EXPECT_EQ(ast_to_pyexpr(*t), "pandas.read_csv('file.csv', nrows=1000)");
  EXPECT_EQ(to_sexpr(*pyexpr_to_ast("x", *g)), "(Expr value:(Name id:\"x\"))");
}

TEST(PyexprTest, Forms) {
  auto g = grammar("pyexpr");
  auto canon = [&](const char* code) { return ast_to_pyexpr(*pyexpr_to_ast(code, *g)); };
  EXPECT_EQ(canon("f( a ,b,k = \"two  words\" )"), "f(a, b, k='two words')");
  EXPECT_EQ(canon("(1).real"), "(1).real");
  EXPECT_EQ(canon("((x))"), "x");
  EXPECT_EQ(canon("f()()"), "f()()");
  EXPECT_EQ(canon("'it\\'s'.upper()"), "'it\\'s'.upper()");
  EXPECT_EQ(canon("g(-2.5e3)"), "g(-2.5e3)");
}

TEST(PyexprTest, Errors) {
  auto g = grammar("pyexpr");
  for (const char* bad : {"a + b", "x[0]", "f(k=1, 2)", "''", "f(", "'open", "lambda: 1", "a.", ""}) {
    EXPECT_EQ(code_of([&] { pyexpr_to_ast(bad, *g); }), ErrorCode::unsupported_construct) << bad;
  }
  EXPECT_EQ(code_of([&] { ast_to_pyexpr(*node(*g, "Expr", {node(*g, "Name", {prim("1x")})})); }),
            ErrorCode::invalid_tree);
}

TEST(PyexprTest, RandomTreesRoundTrip) {
  auto g = grammar("pyexpr");
  RandomAstOptions opts;
  opts.type_pools = testing::pyexpr_pools();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    opts.seed = seed;
    auto t = random_ast(*g, opts);
    const std::string code = ast_to_pyexpr(*t);
    ASSERT_TRUE(trees_equal(*t, *pyexpr_to_ast(code, *g))) << seed << ": " << code;
  }
}

// ---------------------------------------------------------------- dispatch

TEST(FormatTest, Dispatch) {
  EXPECT_EQ(parse_format("SQL"), MrFormat::sql);
  EXPECT_EQ(to_string(parse_format("lambda")), "lambda");
  EXPECT_EQ(code_of([] { parse_format("prolog"); }), ErrorCode::parse_error);
  auto g = grammar("wikisql");
  EXPECT_EQ(code_of([&] { mr_to_ast(MrFormat::sql, "SELECT a FROM t", *g); }), ErrorCode::missing_table);
  TableContext table = players();
  auto t = mr_to_ast(MrFormat::sql, "SELECT Player FROM t", *g, &table);
  EXPECT_EQ(ast_to_mr(MrFormat::sql, *t, &table), "SELECT Player FROM Table");
}

}  // namespace
}  // namespace absynth
