#ifndef ABSYNTH_AST_HPP_
#define ABSYNTH_AST_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absynth/grammar.hpp"

namespace absynth {

struct AbstractTree;
using TreePtr = std::shared_ptr<const AbstractTree>;

// Tokens of a primitive value. Non-string primitives hold exactly one token.
struct PrimitiveValue {
  std::vector<std::string> tokens;

  bool operator==(const PrimitiveValue&) const = default;
};

using FieldValue = std::variant<TreePtr, PrimitiveValue>;

struct RealizedField {
  const Field* field = nullptr;
  std::vector<FieldValue> values;
};

// A constructor node. Children are shared and never mutated after the tree is
// published, so subtrees can be reused across hypotheses.
struct AbstractTree {
  const Constructor* constructor = nullptr;
  std::vector<RealizedField> fields;
};

// Node with one empty RealizedField per constructor field.
AbstractTree make_node(const Constructor& constructor);

// Convenience builder used by converters and tests:
//   node(g, "Name", {prim("x")})
// Each argument fills the next field; sequential/optional fields take a list.
struct Arg {
  std::vector<FieldValue> values;

  Arg(TreePtr tree) { values.emplace_back(std::move(tree)); }
  Arg(PrimitiveValue value) { values.emplace_back(std::move(value)); }
  Arg(std::vector<FieldValue> list) : values(std::move(list)) {}
};
TreePtr node(const Grammar& grammar, std::string_view constructor, std::vector<Arg> args = {});
PrimitiveValue prim(std::string_view text);  // whitespace-split
FieldValue value(TreePtr tree);
FieldValue value(PrimitiveValue v);

// Primitive types named "string" take a token sequence; all other primitives
// take exactly one token.
bool is_multi_token(const Field& field);

struct Violation {
  enum class Kind { cardinality, type_mismatch, expected_primitive, expected_tree, bad_token, arity };
  Kind kind;
  std::string path;
  std::string message;
};

// Empty result means the tree is valid. Throws foreign_constructor when a
// node's constructor does not belong to `grammar`.
std::vector<Violation> validate_ast(const Grammar& grammar, const AbstractTree& tree);

bool trees_equal(const AbstractTree& a, const AbstractTree& b);

// Canonical nested s-expression: (Constr f:(...) g:[(...) (...)] h:"a b")
std::string to_sexpr(const AbstractTree& tree);
TreePtr parse_sexpr(const Grammar& grammar, std::string_view text);

std::size_t tree_size(const AbstractTree& tree);

struct RandomAstOptions {
  int max_depth = 4;
  std::uint64_t seed = 0;
  std::vector<std::string> token_pool;
  // Per primitive-type pools override token_pool.
  std::map<std::string, std::vector<std::string>> type_pools;
  int max_sequence = 3;
};

TreePtr random_ast(const Grammar& grammar, const RandomAstOptions& options);
TreePtr random_ast(const Grammar& grammar, int max_depth, std::uint64_t seed,
                   const std::vector<std::string>& token_pool);

}  // namespace absynth

#endif  // ABSYNTH_AST_HPP_
