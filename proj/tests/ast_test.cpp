#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "absynth/ast.hpp"
#include "absynth/error.hpp"
#include "test_util.hpp"

namespace absynth {
namespace {

using testing::grammar;
using testing::read_csv_tree;

const std::vector<std::string> kPool = {"a", "b", "c", "x1", "file.csv"};

TEST(AstTest, ReadCsvTreeIsValid) {
  auto g = grammar("pyexpr");
  EXPECT_TRUE(validate_ast(*g, *read_csv_tree(*g)).empty());
}

TEST(AstTest, MissingMandatoryChild) {
  auto g = grammar("minimal");
  AbstractTree t = make_node(g->constructor("Name"));
  auto v = validate_ast(*g, t);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::cardinality);
  EXPECT_EQ(v[0].path, "id");
}

TEST(AstTest, PathsUseDottedNamesAndIndices) {
  auto g = grammar("pyexpr");
  auto bad_str = node(*g, "Str", {PrimitiveValue{}});
  auto call = node(*g, "Call", {node(*g, "Name", {prim("f")}),
                                std::vector<FieldValue>{node(*g, "Name", {prim("x")}), bad_str},
                                std::vector<FieldValue>{}});
  auto v = validate_ast(*g, *node(*g, "Expr", {call}));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].path, "value.args[1].s");
  EXPECT_EQ(v[0].kind, Violation::Kind::bad_token);
}

TEST(AstTest, TypeMismatchAndPrimitiveMisuse) {
  auto g = grammar("pyexpr");
  // keyword is not an expr.
  auto kw = node(*g, "keyword", {prim("k"), node(*g, "Name", {prim("v")})});
  auto v = validate_ast(*g, *node(*g, "Expr", {kw}));
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].kind, Violation::Kind::type_mismatch);

  AbstractTree name = make_node(g->constructor("Name"));
  name.fields[0].values.push_back(node(*g, "Name", {prim("x")}));
  v = validate_ast(*g, name);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::expected_primitive);

  AbstractTree two_tokens = make_node(g->constructor("Name"));
  two_tokens.fields[0].values.push_back(prim("x y"));
  EXPECT_EQ(validate_ast(*g, two_tokens).at(0).kind, Violation::Kind::bad_token);
}

TEST(AstTest, ForeignConstructorThrows) {
  auto g = grammar("minimal");
  auto other = grammar("minimal");
  auto t = node(*other, "Name", {prim("x")});
  try {
    validate_ast(*g, *t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::foreign_constructor);
  }
}

TEST(AstTest, TreesEqual) {
  auto g = grammar("pyexpr");
  auto a = read_csv_tree(*g);
  EXPECT_TRUE(trees_equal(*a, *a));
  EXPECT_TRUE(trees_equal(*a, *read_csv_tree(*g)));
  auto changed = node(*g, "Expr", {node(*g, "Call",
      {node(*g, "Attribute", {node(*g, "Name", {prim("pandas")}), prim("read_csv")}),
       std::vector<FieldValue>{node(*g, "Str", {prim("file.csv")})},
       std::vector<FieldValue>{node(*g, "keyword", {prim("nrows"), node(*g, "Num", {prim("100")})})}})});
  EXPECT_FALSE(trees_equal(*a, *changed));
}

TEST(AstTest, SexprIsCanonicalAndParsesBack) {
  auto g = grammar("pyexpr");
  auto t = read_csv_tree(*g);
  EXPECT_EQ(to_sexpr(*t),
            "(Expr value:(Call func:(Attribute value:(Name id:\"pandas\") attr:\"read_csv\") "
            "args:[(Str s:\"file.csv\")] keywords:[(keyword arg:\"nrows\" value:(Num n:\"1000\"))]))");
  auto back = parse_sexpr(*g, to_sexpr(*t));
  EXPECT_TRUE(trees_equal(*t, *back));

  auto sql = grammar("wikisql");
  auto select = node(*sql, "Select", {std::vector<FieldValue>{}, prim("2"), std::vector<FieldValue>{}});
  EXPECT_EQ(to_sexpr(*select), "(Select agg:[] column_idx:\"2\" conditions:[])");
  EXPECT_TRUE(trees_equal(*select, *parse_sexpr(*sql, to_sexpr(*select))));
}

TEST(AstTest, RandomMinimalTree) {
  auto g = grammar("minimal");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto t = random_ast(*g, 3, seed, kPool);
    EXPECT_EQ(t->constructor->name, "Name");
    const auto& tok = std::get<PrimitiveValue>(t->fields[0].values.at(0)).tokens;
    ASSERT_EQ(tok.size(), 1u);
    EXPECT_NE(std::find(kPool.begin(), kPool.end(), tok[0]), kPool.end());
  }
}

TEST(AstTest, RandomIsDeterministic) {
  auto g = grammar("lambda");
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EXPECT_TRUE(trees_equal(*random_ast(*g, 4, seed, kPool), *random_ast(*g, 4, seed, kPool)));
  }
}

TEST(AstTest, RandomTreesValidate) {
  for (const char* name : {"minimal", "lambda", "wikisql", "pyexpr"}) {
    auto g = grammar(name);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      auto t = random_ast(*g, 5, seed, kPool);
      ASSERT_TRUE(validate_ast(*g, *t).empty()) << name << " seed " << seed << ": " << to_sexpr(*t);
      ASSERT_EQ(t->constructor->type, g->root_type());
    }
  }
}

TEST(AstTest, RandomTreesVaryInShape) {
  auto g = grammar("lambda");
  std::set<std::string> shapes;
  for (std::uint64_t seed = 0; seed < 100; ++seed) shapes.insert(to_sexpr(*random_ast(*g, 4, seed, kPool)));
  EXPECT_GT(shapes.size(), 80u);
}

TEST(AstTest, NonTerminatingGrammar) {
  Grammar g = parse_grammar("expr = Wrap(expr inner)", "expr");
  try {
    random_ast(g, 3, 0, kPool);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_terminating_grammar);
  }
  // Recursion through a sequential field terminates with an empty list.
  Grammar ok = parse_grammar("expr = List(expr* items)", "expr");
  EXPECT_TRUE(validate_ast(ok, *random_ast(ok, 3, 7, kPool)).empty());
}

// Corrupting one field of a valid tree must surface at least one violation.
TEST(AstTest, MutationsAreDetected) {
  auto g = grammar("pyexpr");
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto t = random_ast(*g, 4, seed, kPool);
    AbstractTree root = *t;
    // Expr.value is single: empty it, then double it.
    root.fields[0].values.clear();
    EXPECT_FALSE(validate_ast(*g, root).empty());
    root.fields[0].values = {t->fields[0].values[0], t->fields[0].values[0]};
    EXPECT_FALSE(validate_ast(*g, root).empty());
    root.fields[0].values = {prim("oops")};
    EXPECT_FALSE(validate_ast(*g, root).empty());
  }
}

}  // namespace
}  // namespace absynth
