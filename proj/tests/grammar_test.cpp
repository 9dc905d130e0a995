#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "absynth/error.hpp"
#include "absynth/grammar.hpp"
#include "test_util.hpp"

namespace absynth {
namespace {

using testing::grammar;
using testing::grammar_path;
using testing::read_file;

std::set<std::string> type_names(const Grammar& g, TypeKind kind) {
  std::set<std::string> out;
  for (const TypeName& t : g.types()) {
    if (t.kind == kind) out.insert(t.name);
  }
  return out;
}

std::vector<std::string> names(const std::vector<const Constructor*>& cs) {
  std::vector<std::string> out;
  for (const Constructor* c : cs) out.push_back(c->name);
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::io_error;
}

TEST(GrammarTest, WikiSqlGrammar) {
  auto g = grammar("wikisql");
  EXPECT_EQ(type_names(*g, TypeKind::composite),
            (std::set<std::string>{"stmt", "cond_expr", "agg_op", "cmp_op"}));
  EXPECT_EQ(type_names(*g, TypeKind::primitive), (std::set<std::string>{"idx", "string"}));
  EXPECT_EQ(names(constructors_of(*g, "stmt")), (std::vector<std::string>{"Select"}));
  EXPECT_EQ(g->constructors().size(), 11u);
  EXPECT_EQ(names(constructors_of(*g, "agg_op")),
            (std::vector<std::string>{"Max", "Min", "Count", "Sum", "Avg"}));
  EXPECT_EQ(names(constructors_of(*g, "cmp_op")),
            (std::vector<std::string>{"Equal", "GreaterThan", "LessThan", "Other"}));

  const Constructor& select = g->constructor("Select");
  ASSERT_EQ(select.fields.size(), 3u);
  EXPECT_EQ(select.fields[0].name, "agg");
  EXPECT_EQ(select.fields[0].cardinality, Cardinality::optional);
  EXPECT_EQ(select.fields[1].type, "idx");
  EXPECT_EQ(select.fields[1].cardinality, Cardinality::single);
  EXPECT_EQ(select.fields[2].cardinality, Cardinality::sequential);
}

TEST(GrammarTest, LambdaGrammar) {
  auto g = grammar("lambda");
  EXPECT_EQ(type_names(*g, TypeKind::composite), (std::set<std::string>{"expr", "cmp_op"}));
  EXPECT_EQ(type_names(*g, TypeKind::primitive),
            (std::set<std::string>{"var", "ent", "num", "pred", "var_type"}));
  // 17 expression constructors plus 3 comparison operators.
  EXPECT_EQ(g->constructors().size(), 20u);
  EXPECT_EQ(names(constructors_of(*g, "cmp_op")),
            (std::vector<std::string>{"Equal", "LessThan", "GreaterThan"}));
  EXPECT_EQ(g->constructor("Lambda").fields[1].type, "var_type");
}

TEST(GrammarTest, MinimalGrammar) {
  Grammar g = parse_grammar("expr = Name(identifier id)", "expr");
  ASSERT_EQ(g.constructors().size(), 1u);
  EXPECT_EQ(names(constructors_of(g, "expr")), (std::vector<std::string>{"Name"}));
  ASSERT_EQ(g.constructors()[0].fields.size(), 1u);
  EXPECT_EQ(g.constructors()[0].fields[0].cardinality, Cardinality::single);
  EXPECT_TRUE(g.is_primitive("identifier"));
}

TEST(GrammarTest, PrimitiveQueryIsRejected) {
  auto g = grammar("wikisql");
  EXPECT_EQ(code_of([&] { constructors_of(*g, "idx"); }), ErrorCode::primitive_type_query);
}

TEST(GrammarTest, Errors) {
  EXPECT_EQ(code_of([] { parse_grammar("expr = Name(identifier", "expr"); }),
            ErrorCode::syntax_error);
  EXPECT_EQ(code_of([] { parse_grammar("expr = = Name", "expr"); }), ErrorCode::syntax_error);
  EXPECT_EQ(code_of([] { parse_grammar("expr = Name\nstmt = Name", "expr"); }),
            ErrorCode::duplicate_constructor);
  EXPECT_EQ(code_of([] { parse_grammar("expr = Name(identifier id)", "stmt"); }),
            ErrorCode::unknown_root_type);
  EXPECT_EQ(code_of([] { parse_grammar("expr = Name(identifier id)", "identifier"); }),
            ErrorCode::unknown_root_type);
  EXPECT_EQ(code_of([] { parse_grammar("expr = (identifier id)", "expr"); }),
            ErrorCode::syntax_error);
  EXPECT_EQ(code_of([] { parse_grammar("expr = A(x a, y a)", "expr"); }), ErrorCode::syntax_error);
  EXPECT_EQ(code_of([] { parse_grammar("   \n# only a comment\n", "expr"); }),
            ErrorCode::syntax_error);
}

TEST(GrammarTest, CommentsAndAttributes) {
  Grammar g = parse_grammar(
      "-- leading comment\n"
      "expr = Name(identifier id) # trailing\n"
      "     | Num(object n)\n"
      "     attributes (int lineno, int col_offset)\n",
      "expr");
  EXPECT_EQ(names(constructors_of(g, "expr")), (std::vector<std::string>{"Name", "Num"}));
  EXPECT_FALSE(g.find_type("int"));
}

TEST(GrammarTest, RenderRoundTripPreservesOrder) {
  for (const char* name : {"minimal", "lambda", "wikisql", "pyexpr"}) {
    auto g = grammar(name);
    Grammar again = parse_grammar(g->render(), g->root_type());
    EXPECT_TRUE(grammars_equal(*g, again)) << name;
    for (std::size_t i = 0; i < g->types().size(); ++i) {
      EXPECT_EQ(g->types()[i].name, again.types()[i].name);
    }
    for (std::size_t i = 0; i < g->constructors().size(); ++i) {
      const Constructor& a = g->constructors()[i];
      const Constructor& b = again.constructors()[i];
      EXPECT_EQ(a.name, b.name);
      ASSERT_EQ(a.fields.size(), b.fields.size());
      for (std::size_t j = 0; j < a.fields.size(); ++j) {
        EXPECT_EQ(a.fields[j].name, b.fields[j].name);
        EXPECT_EQ(a.fields[j].type, b.fields[j].type);
        EXPECT_EQ(a.fields[j].cardinality, b.fields[j].cardinality);
      }
    }
  }
}

TEST(GrammarTest, ConstructorsOfCoverEveryCompositeType) {
  for (const char* name : {"minimal", "lambda", "wikisql", "pyexpr"}) {
    auto g = grammar(name);
    for (const TypeName& t : g->types()) {
      if (t.kind != TypeKind::composite) continue;
      auto cs = constructors_of(*g, t.name);
      EXPECT_FALSE(cs.empty());
      for (const Constructor* c : cs) EXPECT_EQ(c->type, t.name);
    }
  }
}

TEST(GrammarTest, FingerprintIgnoresFormatting) {
  const std::string text = read_file(grammar_path("lambda"));
  const auto a = grammar_fingerprint(parse_grammar(text, "expr"));
  EXPECT_EQ(a, grammar_fingerprint(parse_grammar(text + "\n", "expr")));
  EXPECT_EQ(a, grammar_fingerprint(parse_grammar("# header\n" + text + "\n-- footer\n", "expr")));
  EXPECT_NE(a, grammar_fingerprint(*grammar("wikisql")));
  EXPECT_EQ(a.size(), 16u);
}

TEST(GrammarTest, FingerprintIsFrozen) {
  // Recorded from a previous build; guards against accidental changes to the
  // canonical rendering or the hash, which would orphan existing checkpoints.
  EXPECT_EQ(grammar_fingerprint(*grammar("minimal")), "e586823b66576190");
}

TEST(GrammarTest, FieldIdsAreDense) {
  auto g = grammar("pyexpr");
  std::set<std::size_t> ids;
  for (const Constructor& c : g->constructors()) {
    for (std::size_t i = 0; i < c.fields.size(); ++i) ids.insert(g->field_id(c, i));
  }
  EXPECT_EQ(ids.size() + 1, g->field_count());
  EXPECT_EQ(*ids.begin(), 1u);
  EXPECT_EQ(*ids.rbegin(), g->field_count() - 1);
}

}  // namespace
}  // namespace absynth
